"""Concurrent solution refiners feeding the search's incorporation mailbox.

Two kinds of worker: large-neighborhood replanning (freeze everyone outside a
random subset of at most 30 agents, replan the subset sequentially with SIPP
against the frozen trajectories) and a recursive sub-search (restart the full
solver from a random configuration of the incumbent and stitch the result).
Workers only ever post solutions strictly cheaper than the base they started
from, so the mailbox stream is improvement-only.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import backend
from .graphs import DistTable, Instance
from .rng import Rng, derive_seed

SOURCE_LNS = "lns"
SOURCE_RECURSIVE = "recursive"

MAX_SUBSET = 30


@dataclass
class RefinementTask:
    """One unit of refiner work over a value-copied base solution."""

    base: np.ndarray  # (T, n) int32 configuration rows
    instance: Instance
    seed: int
    budget_ms: float
    kind: str  # SOURCE_LNS | SOURCE_RECURSIVE


class SafeIntervalTable:
    """Occupancy of the frozen agents: per-vertex timelines plus edge blocks.

    occ[v, t] is 1 iff some frozen agent stands on v at time t; the final
    column stands for every t >= horizon (frozen agents are parked by then).
    Paths of replanned agents are added incrementally so later agents in the
    subset treat earlier ones as obstacles.
    """

    def __init__(self, num_vertices: int, horizon: int) -> None:
        self.horizon = horizon
        self.occ = np.zeros((num_vertices, horizon + 1), dtype=np.uint8)
        self.blocks = backend.active().EdgeBlocks()
        self._steps = np.arange(horizon + 1)

    @classmethod
    def from_frozen(
        cls, base: np.ndarray, frozen_agents: np.ndarray, horizon: int, num_vertices: int
    ) -> "SafeIntervalTable":
        table = cls(num_vertices, horizon)
        t_idx = np.minimum(np.arange(horizon + 1), base.shape[0] - 1)
        padded = base[t_idx][:, frozen_agents].T  # (F, horizon+1)
        table.occ[padded, table._steps] = 1
        table.blocks.add_paths(padded)
        return table

    def add_path(self, path: np.ndarray) -> None:
        idx = np.minimum(self._steps, len(path) - 1)
        padded = path[idx]
        self.occ[padded, self._steps] = 1
        self.blocks.add_paths(padded[None, :])


def sipp_plan(
    agent: int,
    start_vertex: int,
    start_time: int,
    goal: int,
    table: SafeIntervalTable,
    horizon: int,
    dist: DistTable,
) -> np.ndarray | None:
    """Minimal-arrival timed path from (start_vertex, start_time) to goal.

    Waits are allowed; vertex and swap conflicts with the frozen trajectories
    are avoided; the goal's final safe interval must be unbounded so the agent
    can park forever.  Returns the dense vertex-per-step path covering
    start_time..arrival, or None when infeasible within the horizon.
    """
    kern = backend.active()
    gmap = dist.instance.gmap
    row = dist.row(agent)
    if start_time == 0:
        return kern.sipp_plan(
            gmap.indptr, gmap.indices, row, start_vertex, goal,
            table.occ, table.blocks, table.horizon,
        )
    # shifted copy for mid-trajectory starts: drop the first start_time steps
    sub_h = table.horizon - start_time
    if sub_h < 0:
        return None
    occ = np.ascontiguousarray(table.occ[:, start_time:])
    blocks = kern.EdgeBlocks()
    blocks.extend_shifted(table.blocks, -start_time)
    return kern.sipp_plan(
        gmap.indptr, gmap.indices, row, start_vertex, goal, occ, blocks, sub_h
    )


def _pad_to(path: np.ndarray, length: int) -> np.ndarray:
    idx = np.minimum(np.arange(length), len(path) - 1)
    return path[idx]


def _trim_parked_tail(rows: np.ndarray, goals: np.ndarray) -> np.ndarray:
    keep = rows.shape[0]
    while keep > 1 and (rows[keep - 2] == goals).all() and (rows[keep - 1] == goals).all():
        keep -= 1
    return rows[:keep]


def _loss_of(rows: np.ndarray, goals: np.ndarray) -> int:
    parked = (rows[:-1] == rows[1:]) & (rows[1:] == goals)
    return int((~parked).sum())


def lns_refine(
    task: RefinementTask,
    dist: DistTable,
    should_stop: Callable[[], bool] | None = None,
) -> np.ndarray | None:
    """Subset replanning until the budget ends; best strict improvement or None.

    Each iteration freezes all agents outside a uniform subset of 1..30 and
    replans the subset in random priority order with SIPP; a spliced candidate
    replaces the working solution only when its sum-of-loss strictly drops.
    """
    inst = task.instance
    n = inst.num_agents
    goals = np.array(inst.goals, dtype=np.int32)
    rng = Rng(task.seed)
    deadline = time.monotonic() + task.budget_ms / 1000.0
    current = task.base
    current_loss = _loss_of(current, goals)
    base_loss = current_loss
    nv = inst.gmap.num_vertices

    while time.monotonic() < deadline and not (should_stop and should_stop()):
        if current.shape[0] < 2:
            break  # already everyone parked at goals
        size = 1 + rng.randrange(min(MAX_SUBSET, n))
        subset = np.array(rng.sample_indices(n, size), dtype=np.int64)
        mask = np.zeros(n, dtype=bool)
        mask[subset] = True
        frozen = np.where(~mask)[0]
        horizon = 2 * (current.shape[0] - 1)
        table = SafeIntervalTable.from_frozen(current, frozen, horizon, nv)
        new_paths: dict[int, np.ndarray] = {}
        feasible = True
        for a in subset:  # subset order is already a random permutation
            path = sipp_plan(int(a), int(current[0, a]), 0, int(goals[a]), table, horizon, dist)
            if path is None:
                feasible = False
                break
            new_paths[int(a)] = path
            table.add_path(path)
        if not feasible:
            continue
        length = max(
            current.shape[0], max(len(p) for p in new_paths.values())
        )
        rows = np.empty((length, n), dtype=np.int32)
        t_idx = np.minimum(np.arange(length), current.shape[0] - 1)
        rows[:, :] = current[t_idx]
        for a, p in new_paths.items():
            rows[:, a] = _pad_to(p, length)
        rows = _trim_parked_tail(rows, goals)
        loss = _loss_of(rows, goals)
        if loss < current_loss:
            from .graphs import validate_solution

            if validate_solution(inst, [tuple(r) for r in rows]) is None:
                current = rows
                current_loss = loss
    return current if current_loss < base_loss else None


def recursive_refine(
    task: RefinementTask,
    search_entry: Callable[..., "object"],
    dist: DistTable,
    scatter=None,
    mc_samples: int = 1,
    extract_prob: float = 0.0,
    extract_strategy: str = "random",
    should_stop: Callable[[], bool] | None = None,
) -> np.ndarray | None:
    """Restart the search from a random configuration of the base solution.

    The sub-instance keeps the goals; the sub-search runs with recursion and
    refiners disabled.  Its result is stitched onto the base prefix and
    returned only when strictly cheaper.
    """
    from .search import SearchParams

    inst = task.instance
    goals = np.array(inst.goals, dtype=np.int32)
    rng = Rng(task.seed)
    base = task.base
    t = rng.randrange(base.shape[0])
    sub_start = tuple(int(v) for v in base[t])
    sub_inst = Instance(inst.gmap, sub_start, inst.goals)
    params = SearchParams(
        time_limit_ms=task.budget_ms,
        seed=rng.next_u64(),
        extract_prob=extract_prob,
        extract_strategy=extract_strategy,
        mc_samples=mc_samples,
        scatter=scatter,
        check_every=1024,
    )
    # goals are unchanged, so the parent's distance table is directly reusable
    result = search_entry(sub_inst, params, should_stop=should_stop, dist=dist)
    if result.solution is None:
        return None
    sub_rows = np.asarray(result.solution, dtype=np.int32)
    stitched = np.vstack([base[:t], sub_rows])
    stitched = _trim_parked_tail(stitched, goals)
    if _loss_of(stitched, goals) >= _loss_of(base, goals):
        return None
    return stitched


class BestSolutionHandle:
    """Read-snapshot of the incumbent, updated only by the search thread."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._rows: np.ndarray | None = None
        self._cost: float = float("inf")

    def update(self, rows: np.ndarray, cost: int) -> None:
        with self._lock:
            if cost < self._cost:
                self._rows = rows
                self._cost = cost

    def get(self) -> tuple[np.ndarray | None, float]:
        with self._lock:
            return self._rows, self._cost


@dataclass
class RefinerConfig:
    workers: int = 4
    recursive_prob: float = 0.2
    lns_budget_ms: float = 1000.0
    recursive_budget_ms: float = 1000.0
    seed: int = 0
    mc_samples: int = 1
    extract_prob: float = 0.0
    extract_strategy: str = "random"


class Orchestrator:
    """R worker slots drawing LNS or recursive tasks against the incumbent."""

    def __init__(
        self,
        instance: Instance,
        dist: DistTable,
        config: RefinerConfig,
        best: BestSolutionHandle,
        mailbox: deque,
        deadline: float,
        search_entry: Callable[..., "object"],
        scatter=None,
    ) -> None:
        self.instance = instance
        self.dist = dist
        self.config = config
        self.best = best
        self.mailbox = mailbox
        self.deadline = deadline
        self.search_entry = search_entry
        self.scatter = scatter
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def start(self) -> None:
        for wid in range(self.config.workers):
            th = threading.Thread(target=self._worker, args=(wid,), daemon=True)
            self._threads.append(th)
            th.start()

    def stop(self) -> None:
        self._stop.set()
        for th in self._threads:
            th.join(timeout=5.0)

    def _should_stop(self) -> bool:
        return self._stop.is_set() or time.monotonic() >= self.deadline

    def _worker(self, wid: int) -> None:
        rng = Rng(derive_seed(self.config.seed, 1_000 + wid))
        goals = np.array(self.instance.goals, dtype=np.int32)
        while not self._should_stop():
            rows, cost = self.best.get()
            if rows is None:
                time.sleep(0.005)
                continue
            remaining_ms = (self.deadline - time.monotonic()) * 1000.0
            if remaining_ms <= 1.0:
                break
            recursive = rng.random() < self.config.recursive_prob
            kind = SOURCE_RECURSIVE if recursive else SOURCE_LNS
            budget = min(
                self.config.recursive_budget_ms if recursive else self.config.lns_budget_ms,
                remaining_ms,
            )
            task = RefinementTask(
                base=rows, instance=self.instance, seed=rng.next_u64(),
                budget_ms=budget, kind=kind,
            )
            if recursive:
                refined = recursive_refine(
                    task,
                    self.search_entry,
                    self.dist,
                    scatter=self.scatter,
                    mc_samples=self.config.mc_samples,
                    extract_prob=self.config.extract_prob,
                    extract_strategy=self.config.extract_strategy,
                    should_stop=self._should_stop,
                )
            else:
                refined = lns_refine(task, self.dist, should_stop=self._should_stop)
            if refined is not None and _loss_of(refined, goals) < _loss_of(task.base, goals):
                self.mailbox.append((refined, kind))


def orchestrate(
    instance: Instance,
    dist: DistTable,
    config: RefinerConfig,
    best: BestSolutionHandle,
    mailbox: deque,
    deadline: float,
    search_entry: Callable[..., "object"],
    scatter=None,
) -> Orchestrator:
    """Start the refiner workers; the caller owns stop()/join."""
    orch = Orchestrator(
        instance, dist, config, best, mailbox, deadline, search_entry, scatter
    )
    orch.start()
    return orch
