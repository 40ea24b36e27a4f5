"""End-to-end solve: scatter precomputation, search, refiners, anytime log."""

from __future__ import annotations

import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .graphs import (
    Config,
    DistTable,
    Instance,
    flowtime,
    lower_bound,
    sum_of_loss,
    UnsolvableInstanceError,
)
from .refine import BestSolutionHandle, RefinerConfig, orchestrate
from .scatter import ScatterPaths, compute_scatter
from .search import SearchParams, SearchResult, SolveStatus, search

PRESETS = ("vanilla", "all", "no-suo", "no-mc", "no-refiners", "no-extract")


@dataclass
class SolverConfig:
    """Feature gates and budgets; presets mirror the ablation naming."""

    time_limit_ms: float = 10_000.0
    seed: int = 0
    suo_margin: int = -1  # -1 disables scattered-path guidance
    mc_samples: int = 1
    mc_workers: int = 0  # 0 = auto (hardware parallelism, capped at k)
    refiners: int = 0
    recursive_prob: float = 0.2
    recursive_timeout_ms: float = 1000.0
    lns_budget_ms: float = 1000.0
    extract_prob: float = 0.0
    extract_strategy: str = "random"
    reinsert_init_prob: float = 0.001
    swap_enabled: bool = True

    @classmethod
    def preset(cls, name: str, **overrides) -> "SolverConfig":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
        cfg = cls()
        if name != "vanilla":
            cfg = cls(
                suo_margin=2,
                mc_samples=10,
                refiners=4,
                recursive_prob=0.2,
                extract_prob=0.01,
                extract_strategy="random",
            )
        if name == "no-suo":
            cfg = replace(cfg, suo_margin=-1)
        elif name == "no-mc":
            cfg = replace(cfg, mc_samples=1)
        elif name == "no-refiners":
            cfg = replace(cfg, refiners=0)
        elif name == "no-extract":
            cfg = replace(cfg, extract_prob=0.0)
        return replace(cfg, **overrides)


@dataclass
class AnytimeRecord:
    elapsed_ms: float
    sum_of_loss: int
    flowtime: int
    source: str


@dataclass
class RunResult:
    status: SolveStatus
    solution: list[Config] | None
    records: list[AnytimeRecord]
    lower_bound: int | None
    scatter: ScatterPaths | None
    search_result: SearchResult | None
    scatter_ms: float = 0.0
    total_ms: float = 0.0

    @property
    def final_cost(self) -> int | None:
        return self.records[-1].sum_of_loss if self.records else None

    @property
    def initial_cost(self) -> int | None:
        return self.records[0].sum_of_loss if self.records else None

    @property
    def initial_time_ms(self) -> float | None:
        return self.records[0].elapsed_ms if self.records else None


def solve(
    instance: Instance,
    config: SolverConfig | None = None,
    on_improvement: Callable[[AnytimeRecord, list[Config]], None] | None = None,
) -> RunResult:
    """Solve an instance per config; returns status, solution, anytime records.

    Improvement records are strictly decreasing in sum-of-loss.  When scatter
    guidance is enabled its precomputation deadline is half the time limit.
    """
    config = config or SolverConfig()
    t0 = time.monotonic()
    deadline = t0 + config.time_limit_ms / 1000.0
    dist = DistTable(instance)
    try:
        lb = lower_bound(instance, dist)
    except UnsolvableInstanceError:
        return RunResult(
            SolveStatus.NO_SOLUTION, None, [], None, None, None,
            total_ms=(time.monotonic() - t0) * 1000.0,
        )

    scatter = None
    scatter_ms = 0.0
    if config.suo_margin >= 0:
        scatter = compute_scatter(
            instance,
            config.suo_margin,
            deadline=t0 + config.time_limit_ms / 2000.0,
            dist=dist,
        )
        scatter_ms = (time.monotonic() - t0) * 1000.0

    params = SearchParams(
        time_limit_ms=config.time_limit_ms,
        seed=config.seed,
        extract_prob=config.extract_prob,
        extract_strategy=config.extract_strategy,
        reinsert_init_prob=config.reinsert_init_prob,
        mc_samples=config.mc_samples,
        swap_enabled=config.swap_enabled,
        scatter=scatter,
    )

    pool = None
    if config.mc_samples > 1:
        workers = config.mc_workers or min(os.cpu_count() or 1, config.mc_samples)
        if workers > 1:
            pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="mcgen")

    records: list[AnytimeRecord] = []
    goals = instance.goals
    best = BestSolutionHandle()
    mailbox: deque = deque()
    orch_box: list = []

    def hook(elapsed: float, cost: int, solution: list[Config], source: str) -> None:
        rec = AnytimeRecord(
            elapsed_ms=(time.monotonic() - t0) * 1000.0,
            sum_of_loss=cost,
            flowtime=flowtime(solution, goals),
            source=source,
        )
        records.append(rec)
        rows = np.asarray(solution, dtype=np.int32)
        best.update(rows, cost)
        if on_improvement is not None:
            on_improvement(rec, solution)
        if config.refiners > 0 and not orch_box:
            rcfg = RefinerConfig(
                workers=config.refiners,
                recursive_prob=config.recursive_prob,
                lns_budget_ms=config.lns_budget_ms,
                recursive_budget_ms=config.recursive_timeout_ms,
                seed=config.seed,
                mc_samples=config.mc_samples,
                extract_prob=config.extract_prob,
                extract_strategy=config.extract_strategy,
            )
            orch_box.append(
                orchestrate(
                    instance, dist, rcfg, best, mailbox, deadline, search, scatter
                )
            )

    try:
        result = search(
            instance,
            params,
            hooks=[hook],
            mailbox=mailbox,
            pool=pool,
            deadline=deadline,
            dist=dist,
        )
    finally:
        if orch_box:
            orch_box[0].stop()
        if pool is not None:
            pool.shutdown(wait=False)

    return RunResult(
        status=result.status,
        solution=result.solution,
        records=records,
        lower_bound=lb,
        scatter=scatter,
        search_result=result,
        scatter_ms=scatter_ms,
        total_ms=(time.monotonic() - t0) * 1000.0,
    )
