"""Monte-Carlo configuration generation: sample k successors, keep the best.

Samples run on independent sub-streams derived from one master seed, so the
chosen configuration is identical whether the batch executed sequentially or
on a worker pool; ties between equal scores go to the lowest sample index,
never to completion order.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass

import numpy as np

from .pibt import ConstraintSet, PreferenceContext, _EMPTY_I32
from .rng import derive_seed


@dataclass
class SampleBatch:
    """k generator samples for one (configuration, constraints) pair."""

    k: int
    candidates: list[np.ndarray | None]
    costs: list[int]
    h_values: list[int]

    def scores(self) -> list[int | None]:
        return [
            None if q is None else c + h
            for q, c, h in zip(self.candidates, self.costs, self.h_values)
        ]

    def best_index(self) -> int | None:
        best: int | None = None
        for i, s in enumerate(self.scores()):
            if s is not None and (best is None or s < self.scores()[best]):
                best = i
        return best


def sample_batch(
    q_from: np.ndarray,
    constraints: ConstraintSet,
    order: np.ndarray,
    ctx: PreferenceContext,
    k: int,
    master_seed: int,
    pool: Executor | None = None,
) -> SampleBatch:
    """Run the generator k times on derived sub-streams (pool optional)."""
    n = q_from.shape[0]
    cons_who = np.asarray(constraints.who, dtype=np.int32) if constraints.who else _EMPTY_I32
    cons_where = (
        np.asarray(constraints.where, dtype=np.int32) if constraints.where else _EMPTY_I32
    )
    out = np.empty((k, n), dtype=np.int32)
    oks = [False] * k
    costs = [0] * k
    hs = [0] * k

    def run(lo: int, hi: int) -> None:
        for s in range(lo, hi):
            ok, cost, h = ctx.step_into(
                q_from, order, cons_who, cons_where, derive_seed(master_seed, s), out[s]
            )
            oks[s], costs[s], hs[s] = ok, cost, h

    if pool is None or k == 1:
        run(0, k)
    else:
        workers = getattr(pool, "_max_workers", 2)
        chunk = max(1, (k + workers - 1) // workers)
        futures = [
            pool.submit(run, lo, min(lo + chunk, k)) for lo in range(0, k, chunk)
        ]
        for f in futures:
            f.result()
    return SampleBatch(
        k=k,
        candidates=[out[s] if oks[s] else None for s in range(k)],
        costs=costs,
        h_values=hs,
    )


def mc_generate(
    q_from: np.ndarray,
    constraints: ConstraintSet,
    order: np.ndarray,
    ctx: PreferenceContext,
    k: int = 1,
    pool: Executor | None = None,
    master_seed: int | None = None,
) -> tuple[np.ndarray, int, int] | None:
    """argmin over k samples of edge cost + cost-to-go; None iff all fail.

    Returns (configuration, edge_cost, h).  With k=1 this is exactly one
    generator invocation on sub-stream 0 of the master seed.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if master_seed is None:
        master_seed = ctx.rng.next_u64()
    batch = sample_batch(q_from, constraints, order, ctx, k, master_seed, pool)
    best = -1
    best_score = None
    for s in range(k):
        if batch.candidates[s] is None:
            continue
        score = batch.costs[s] + batch.h_values[s]
        if best_score is None or score < best_score:
            best, best_score = s, score
    if best < 0:
        return None
    return batch.candidates[best], batch.costs[best], batch.h_values[best]
