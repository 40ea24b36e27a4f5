"""Spatially scattered per-agent paths that bias the PIBT preferences.

Each agent gets a start-to-goal path of length at most dist+margin; paths are
replanned round-robin, each replacement strictly reducing the (collisions,
length) pair, so the loop terminates on every finite instance.  The
collection is handed to the generator, which prefers moves along an agent's
own scattered path.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import backend
from .graphs import DistTable, Instance, UnsolvableInstanceError

_BIG = 1 << 30

#: Safety valve for a single collision-minimal replan; beyond this the plain
#: shortest path is used for the current pass.
MAX_REPLAN_EXPANSIONS = 500_000


@dataclass
class ScatterPaths:
    """One dispersed path per agent (or None) plus the collection's collisions."""

    paths: list[np.ndarray | None]
    collisions: int = 0

    def has_edge(self, agent: int, u: int, v: int) -> bool:
        """True iff (u, v) is an ordered edge of agent's stored path."""
        p = self.paths[agent]
        if p is None:
            return False
        hits = np.where(p[:-1] == u)[0]
        return bool((p[hits + 1] == v).any())

    def kernel_form(self, num_vertices: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-agent sorted packed directed edges (from * V + to) as CSR."""
        indptr = np.zeros(len(self.paths) + 1, dtype=np.int64)
        chunks: list[np.ndarray] = []
        for i, p in enumerate(self.paths):
            if p is None or p.size < 2:
                indptr[i + 1] = indptr[i]
                continue
            keys = np.unique(
                p[:-1].astype(np.int64) * num_vertices + p[1:].astype(np.int64)
            )
            chunks.append(keys)
            indptr[i + 1] = indptr[i] + keys.size
        keys = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
        return indptr, keys


class CollisionIndex:
    """Time-indexed occupancy of the stored paths, parked tails included.

    cnt[v, t] counts stored agents at vertex v at time t (agents occupy their
    final vertex for every t past arrival); directed moves live in a separate
    index for swap detection.  Patched incrementally on every replacement.
    """

    def __init__(self, num_vertices: int, horizon: int) -> None:
        self.horizon = horizon
        self.cnt = np.zeros((num_vertices, horizon + 1), dtype=np.int32)
        self.moves = backend.active().MoveIndex()
        self._steps = np.arange(horizon + 1)

    def _extended(self, path: np.ndarray) -> np.ndarray:
        idx = np.minimum(self._steps, len(path) - 1)
        return path[idx]

    def add_path(self, path: np.ndarray) -> None:
        np.add.at(self.cnt, (self._extended(path), self._steps), 1)
        self.moves.add_path(path, 1)

    def remove_path(self, path: np.ndarray) -> None:
        np.add.at(self.cnt, (self._extended(path), self._steps), -1)
        self.moves.add_path(path, -1)


def count_collisions(path: np.ndarray, agent: int, idx: CollisionIndex) -> int:
    """Coincidences between path and the stored paths (which must exclude
    agent's own): vertex meets at the same time, swaps along an edge, and the
    occupancy of the path's final vertex after arrival."""
    ext = idx._extended(path)
    total = int(idx.cnt[ext, idx._steps].sum())
    for t in range(len(path) - 1):
        u, v = int(path[t]), int(path[t + 1])
        if u != v:
            total += idx.moves.count(t, v, u)
    return total


def _greedy_shortest(gmap, dist_row: np.ndarray, start: int) -> np.ndarray:
    """Canonical shortest path: follow strictly decreasing distance, first
    minimum in ascending-neighbor order."""
    path = [start]
    v = start
    while dist_row[v] > 0:
        nxt = min(
            (u for u in gmap.neighbors(v) if dist_row[u] == dist_row[v] - 1),
        )
        path.append(nxt)
        v = nxt
    return np.array(path, dtype=np.int32)


def replan_single(
    agent: int,
    margin: int,
    idx: CollisionIndex,
    instance: Instance,
    dist: DistTable,
    deadline: float | None = None,
) -> tuple[np.ndarray, int]:
    """Best (collisions, length) path for agent against the stored paths.

    Returns (path, collisions).  On an exhausted search budget the plain
    shortest path is returned instead.
    """
    row = dist.row(agent)
    start = instance.starts[agent]
    goal = instance.goals[agent]
    d = int(row[start])
    if d < 0:
        raise UnsolvableInstanceError(f"goal of agent {agent} unreachable")
    cap = min(d + margin, idx.horizon)
    path, coll = backend.active().scatter_replan(
        instance.gmap.indptr,
        instance.gmap.indices,
        row,
        start,
        goal,
        cap,
        idx.cnt,
        idx.moves,
        MAX_REPLAN_EXPANSIONS,
    )
    if path is None:
        path = _greedy_shortest(instance.gmap, row, start)
        coll = count_collisions(path, agent, idx)
    return path, coll


def compute_scatter(
    instance: Instance,
    margin: int,
    deadline: float | None = None,
    dist: DistTable | None = None,
) -> ScatterPaths:
    """Round-robin replanning until a full pass makes no replacement.

    A stored path is replaced only on a strict (collisions, length) improvement,
    which makes the global collision count non-increasing and the loop finite.
    A deadline stops the loop early with the collection built so far.
    """
    dist = dist if dist is not None else DistTable(instance)
    n = instance.num_agents
    dist.ensure_all()
    horizon = max(int(dist.row(i)[instance.starts[i]]) for i in range(n)) + max(margin, 0)
    horizon = max(horizon, 1)
    idx = CollisionIndex(instance.gmap.num_vertices, horizon)
    paths: list[np.ndarray | None] = [None] * n
    colls: list[int] = [0] * n

    def expired() -> bool:
        return deadline is not None and time.monotonic() >= deadline

    updated = True
    while updated and not expired():
        updated = False
        for i in range(n):
            if expired():
                break
            old = paths[i]
            if old is not None:
                idx.remove_path(old)
            cand, cand_coll = replan_single(i, margin, idx, instance, dist, deadline)
            if old is None:
                better = True
            else:
                old_coll = count_collisions(old, i, idx)
                better = (cand_coll, len(cand)) < (old_coll, len(old))
                if not better:
                    cand, cand_coll = old, old_coll
            if better:
                updated = True
            paths[i] = cand
            colls[i] = cand_coll
            idx.add_path(cand)
    # each pairwise coincidence is tallied once per involved agent
    return ScatterPaths(paths, _total_collisions(idx, paths) // 2)


def _total_collisions(idx: CollisionIndex, paths: list[np.ndarray | None]) -> int:
    total = 0
    for i, p in enumerate(paths):
        if p is None:
            continue
        idx.remove_path(p)
        total += count_collisions(p, i, idx)
        idx.add_path(p)
    return total
