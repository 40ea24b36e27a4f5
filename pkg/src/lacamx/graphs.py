"""Grid/instance representation, distance oracles, metrics, and validation.

Vertices are dense integer ids assigned to passable cells in row-major cell
order, so ascending vertex order is also ascending row-major cell order.
Configurations are plain tuples of vertex ids (one per agent); tuples give
structural hashing/equality for free and keep the search's explored table
simple.  All heavy lifting over configurations happens on int32 arrays inside
the kernels; this module is the semantic reference the rest of the package
(and the test suite) is checked against.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from . import backend

Config = tuple[int, ...]
Solution = list[Config]

#: Distance reported for vertices that cannot reach the goal.  A float so it
#: can never collide with a hop count, and so sums/comparisons behave.
UNREACHABLE = math.inf


class UnsolvableInstanceError(ValueError):
    """Raised when some agent's goal is unreachable from its start."""


class GridMap:
    """Four-connected grid with dense vertex ids over passable cells.

    Attributes:
        width, height: grid dimensions in cells.
        passable: bool array of shape (height, width).
        num_vertices: number of passable cells.
    """

    def __init__(self, passable: np.ndarray) -> None:
        passable = np.asarray(passable, dtype=bool)
        if passable.ndim != 2:
            raise ValueError("passable must be a 2-D boolean array")
        self.passable = passable
        self.passable.setflags(write=False)
        self.height, self.width = passable.shape

        flat = passable.ravel()
        self.cell_of_vertex = np.flatnonzero(flat).astype(np.int32)
        self.num_vertices = int(self.cell_of_vertex.size)
        self.vertex_of_cell = np.full(flat.size, -1, dtype=np.int32)
        self.vertex_of_cell[self.cell_of_vertex] = np.arange(
            self.num_vertices, dtype=np.int32
        )
        self._build_adjacency()

    def _build_adjacency(self) -> None:
        # CSR adjacency; neighbor lists ascend by cell index, which realizes
        # the canonical up, left, right, down order.
        w = self.width
        cells = self.cell_of_vertex
        cols = cells % w
        neigh_cells = [cells - w, cells - 1, cells + 1, cells + w]
        valid = [
            cells >= w,
            cols > 0,
            cols < w - 1,
            cells < (self.height - 1) * w,
        ]
        rows: list[np.ndarray] = []
        targets: list[np.ndarray] = []
        for nc, ok in zip(neigh_cells, valid):
            nc = nc[ok]
            tv = np.where(ok)[0][self.vertex_of_cell[nc] >= 0]
            rows.append(tv.astype(np.int32))
            targets.append(self.vertex_of_cell[nc[self.vertex_of_cell[nc] >= 0]])
        row = np.concatenate(rows) if rows else np.empty(0, np.int32)
        tgt = np.concatenate(targets) if targets else np.empty(0, np.int32)
        order = np.lexsort((tgt, row))
        row, tgt = row[order], tgt[order]
        self.indptr = np.zeros(self.num_vertices + 1, dtype=np.int32)
        np.add.at(self.indptr, row + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.indptr = self.indptr.astype(np.int32)
        self.indices = tgt.astype(np.int32)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    def vertex_at(self, x: int, y: int) -> int:
        """Vertex id of cell (x, y); raises on blocked or out-of-range cells."""
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValueError(f"cell ({x}, {y}) outside {self.width}x{self.height} grid")
        v = int(self.vertex_of_cell[y * self.width + x])
        if v < 0:
            raise ValueError(f"cell ({x}, {y}) is blocked")
        return v

    def coords(self, v: int) -> tuple[int, int]:
        """(x, y) cell of vertex v."""
        cell = int(self.cell_of_vertex[v])
        return cell % self.width, cell // self.width

    def neighbors(self, v: int) -> list[int]:
        if not 0 <= v < self.num_vertices:
            raise ValueError(f"invalid vertex id {v}")
        return self.indices[self.indptr[v] : self.indptr[v + 1]].tolist()

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])


def neighbors(gmap: GridMap, v: int) -> list[int]:
    """Passable 4-adjacent vertices of v in canonical (ascending) order."""
    return gmap.neighbors(v)


@dataclass(frozen=True)
class Instance:
    """A MAPF instance: map, starts, goals."""

    gmap: GridMap
    starts: Config
    goals: Config

    def __post_init__(self) -> None:
        n = len(self.starts)
        if n < 1:
            raise ValueError("an instance needs at least one agent")
        if len(self.goals) != n:
            raise ValueError("starts and goals must have equal length")
        for label, conf in (("start", self.starts), ("goal", self.goals)):
            for v in conf:
                if not 0 <= v < self.gmap.num_vertices:
                    raise ValueError(f"{label} vertex {v} is invalid")
            if len(set(conf)) != n:
                raise ValueError(f"{label} vertices must be pairwise distinct")

    @property
    def num_agents(self) -> int:
        return len(self.starts)


class DistTable:
    """Per-agent BFS distances to each agent's goal, filled lazily.

    Rows are immutable once filled; concurrent readers are safe and fills are
    serialized by a lock, so a query result never changes once returned.
    """

    def __init__(self, instance: Instance) -> None:
        self.instance = instance
        n = instance.num_agents
        self._table = np.full((n, instance.gmap.num_vertices), -1, dtype=np.int32)
        self._filled = np.zeros(n, dtype=bool)
        self._lock = threading.Lock()

    def row(self, agent: int) -> np.ndarray:
        """Raw int32 distance row for agent (-1 marks unreachable)."""
        if not self._filled[agent]:
            with self._lock:
                if not self._filled[agent]:
                    backend.active().bfs_fill(
                        self.instance.gmap.indptr,
                        self.instance.gmap.indices,
                        int(self.instance.goals[agent]),
                        self._table[agent],
                    )
                    self._filled[agent] = True
        return self._table[agent]

    def get(self, agent: int, v: int) -> int | float:
        """Exact hop distance from v to agent's goal, or UNREACHABLE."""
        d = int(self.row(agent)[v])
        return UNREACHABLE if d < 0 else d

    def ensure_all(self) -> np.ndarray:
        """Fill every row and return the dense (n, V) matrix."""
        for agent in range(self.instance.num_agents):
            self.row(agent)
        return self._table

    @property
    def matrix(self) -> np.ndarray:
        return self._table


def dist_to_goal(table: DistTable, agent: int, v: int) -> int | float:
    """Hop distance from v to goals[agent] (UNREACHABLE if disconnected)."""
    return table.get(agent, v)


def _has_vertex_collision(conf: Sequence[int]) -> bool:
    return len(set(conf)) != len(conf)


def connected(x: Sequence[int], y: Sequence[int], gmap: GridMap) -> bool:
    """True iff configurations x and y are one collision-free step apart.

    Requires y[i] in neighbors(x[i]) + {x[i]} for all i, no vertex collision
    in either configuration, and no swap along an edge.
    """
    if len(x) != len(y):
        raise ValueError("configurations must have equal length")
    if _has_vertex_collision(x) or _has_vertex_collision(y):
        return False
    pos_x = {v: i for i, v in enumerate(x)}
    for i, (u, v) in enumerate(zip(x, y)):
        if v != u and v not in gmap.neighbors(u):
            return False
        j = pos_x.get(v)
        if j is not None and j != i and y[j] == u:
            return False  # swap along edge (u, v)
    return True


def cost_edge(x: Sequence[int], y: Sequence[int], goals: Sequence[int]) -> int:
    """Number of agents i for which not (x[i] == y[i] == goals[i])."""
    if len(x) != len(y):
        raise ValueError("configurations must have equal length")
    return sum(1 for u, v, g in zip(x, y, goals) if not (u == v == g))


def sum_of_loss(sol: Sequence[Sequence[int]], goals: Sequence[int]) -> int:
    """Total actions in which agents are not parked at their goals."""
    if not sol:
        raise ValueError("solution must be nonempty")
    return sum(cost_edge(a, b, goals) for a, b in zip(sol, sol[1:]))


def flowtime(sol: Sequence[Sequence[int]], goals: Sequence[int]) -> int:
    """Sum over agents of the earliest step after which they stay at goal."""
    if not sol:
        raise ValueError("solution must be nonempty")
    last = sol[-1]
    if any(v != g for v, g in zip(last, goals)):
        raise ValueError("solution does not end at the goal configuration")
    total = 0
    for i, g in enumerate(goals):
        t = len(sol) - 1
        while t > 0 and sol[t - 1][i] == g:
            t -= 1
        total += t
    return total


def lower_bound(instance: Instance, table: DistTable | None = None) -> int:
    """Sum of per-agent shortest path lengths from start to goal."""
    table = table if table is not None else DistTable(instance)
    total = 0
    for i, s in enumerate(instance.starts):
        d = table.get(i, s)
        if d == UNREACHABLE:
            raise UnsolvableInstanceError(
                f"goal of agent {i} is unreachable from its start"
            )
        total += int(d)
    return total


class ViolationKind(Enum):
    EMPTY = "empty"
    START_MISMATCH = "start_mismatch"
    GOAL_MISMATCH = "goal_mismatch"
    LENGTH_MISMATCH = "length_mismatch"
    INVALID_MOVE = "invalid_move"
    VERTEX_COLLISION = "vertex_collision"
    EDGE_COLLISION = "edge_collision"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    timestep: int
    agents: tuple[int, ...]


def _first_transition_violation(
    x: Sequence[int], y: Sequence[int], gmap: GridMap, t: int
) -> Violation | None:
    seen: dict[int, int] = {}
    for i, v in enumerate(y):
        if v in seen:
            return Violation(ViolationKind.VERTEX_COLLISION, t, (seen[v], i))
        seen[v] = i
    pos_x = {v: i for i, v in enumerate(x)}
    for i, (u, v) in enumerate(zip(x, y)):
        if v != u and v not in gmap.neighbors(u):
            return Violation(ViolationKind.INVALID_MOVE, t, (i,))
        j = pos_x.get(v)
        if j is not None and j != i and y[j] == u:
            return Violation(ViolationKind.EDGE_COLLISION, t, tuple(sorted((i, j))))
    return None


def validate_solution(instance: Instance, sol: Sequence[Sequence[int]]) -> Violation | None:
    """None iff sol satisfies the solution definition; else the first violation."""
    if not sol:
        return Violation(ViolationKind.EMPTY, 0, ())
    if tuple(sol[0]) != instance.starts:
        bad = tuple(
            i for i, (a, b) in enumerate(zip(sol[0], instance.starts)) if a != b
        )
        return Violation(ViolationKind.START_MISMATCH, 0, bad)
    for t in range(len(sol) - 1):
        x, y = sol[t], sol[t + 1]
        if len(x) != len(y) or len(x) != instance.num_agents:
            return Violation(ViolationKind.LENGTH_MISMATCH, t + 1, ())
        seen0: dict[int, int] = {}
        for i, v in enumerate(x):
            if v in seen0:
                return Violation(ViolationKind.VERTEX_COLLISION, t, (seen0[v], i))
            seen0[v] = i
        bad_step = _first_transition_violation(x, y, instance.gmap, t + 1)
        if bad_step is not None:
            return bad_step
    last = sol[-1]
    off = tuple(i for i, (v, g) in enumerate(zip(last, instance.goals)) if v != g)
    if off:
        return Violation(ViolationKind.GOAL_MISMATCH, len(sol) - 1, off)
    return None


def iter_joint_moves(gmap: GridMap, conf: Sequence[int]) -> Iterator[Config]:
    """All connected successors of conf (exponential; tests/oracles only)."""
    import itertools

    choices = [[v] + gmap.neighbors(v) for v in conf]
    for cand in itertools.product(*choices):
        if connected(conf, cand, gmap):
            yield tuple(cand)
