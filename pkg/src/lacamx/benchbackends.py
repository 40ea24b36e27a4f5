"""Micro-benchmark comparing the compiled kernels against the fallback.

Times BFS distance fills, single PIBT steps, Monte-Carlo batches (sequential
vs worker pool), and a full solve-to-first-solution, on a seeded random grid.
"""

from __future__ import annotations

import argparse
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import backend
from .graphs import DistTable, GridMap, Instance
from .montecarlo import mc_generate
from .pibt import EMPTY_CONSTRAINTS, PreferenceContext, PrioritySet
from .rng import Rng
from .search import SearchParams, search


def _random_instance(side: int, agents: int, seed: int) -> Instance:
    rng = Rng(seed)
    while True:
        passable = np.ones((side, side), dtype=bool)
        blocked = int(side * side * 0.2)
        for _ in range(blocked):
            passable[rng.randrange(side), rng.randrange(side)] = False
        gmap = GridMap(passable)
        if gmap.num_vertices < 2 * agents:
            continue
        # keep only fully connected grids so any start/goal pair works
        dist = np.full(gmap.num_vertices, -1, dtype=np.int32)
        backend.active().bfs_fill(gmap.indptr, gmap.indices, 0, dist)
        if (dist < 0).any():
            continue
        starts = rng.sample_indices(gmap.num_vertices, agents)
        goals = rng.sample_indices(gmap.num_vertices, agents)
        return Instance(gmap, tuple(starts), tuple(goals))


def _time(fn, repeat: int = 1) -> float:
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat * 1000.0


def bench_backend(name: str, instance: Instance, k: int, seed: int) -> dict[str, float]:
    backend.select(name)
    gmap = instance.gmap
    out: dict[str, float] = {}

    dist_buf = np.empty(gmap.num_vertices, dtype=np.int32)
    out["bfs_ms"] = _time(
        lambda: backend.active().bfs_fill(gmap.indptr, gmap.indices, 0, dist_buf),
        repeat=20,
    )

    ctx = PreferenceContext(instance, rng=Rng(seed))
    prio = PrioritySet.initial(instance.starts, instance.goals, Rng(seed))
    order = prio.order()
    q = np.array(instance.starts, dtype=np.int32)
    out["pibt_step_ms"] = _time(
        lambda: mc_generate(q, EMPTY_CONSTRAINTS, order, ctx, k=1, master_seed=7),
        repeat=50,
    )
    out[f"mc{k}_seq_ms"] = _time(
        lambda: mc_generate(q, EMPTY_CONSTRAINTS, order, ctx, k=k, master_seed=7),
        repeat=10,
    )
    workers = min(os.cpu_count() or 1, k)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        out[f"mc{k}_par{workers}_ms"] = _time(
            lambda: mc_generate(q, EMPTY_CONSTRAINTS, order, ctx, k=k, pool=pool, master_seed=7),
            repeat=10,
        )

    t0 = time.perf_counter()
    res = search(instance, SearchParams(time_limit_ms=30_000, seed=seed))
    out["first_solution_ms"] = (time.perf_counter() - t0) * 1000.0
    out["first_solution_cost"] = float(res.state.best_cost)
    return out


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="lacamx-bench")
    p.add_argument("--side", type=int, default=32)
    p.add_argument("--agents", type=int, default=100)
    p.add_argument("--mc-samples", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    instance = _random_instance(args.side, args.agents, args.seed)
    print(
        f"grid {args.side}x{args.side}, {instance.gmap.num_vertices} vertices, "
        f"{instance.num_agents} agents, k={args.mc_samples}"
    )
    rows = {}
    for name in backend.available():
        rows[name] = bench_backend(name, instance, args.mc_samples, args.seed)
    backend.select("auto")

    keys = list(next(iter(rows.values())).keys())
    width = max(len(k) for k in keys) + 2
    header = "metric".ljust(width) + "".join(n.rjust(14) for n in rows)
    print(header)
    for key in keys:
        line = key.ljust(width)
        for name in rows:
            line += f"{rows[name][key]:14.3f}"
        print(line)
    if "compiled" in rows and "python" in rows:
        speedup = rows["python"]["pibt_step_ms"] / max(rows["compiled"]["pibt_step_ms"], 1e-9)
        print(f"\ncompiled pibt_step speedup over python: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
