"""PIBT successor generation: one connected configuration per invocation.

Given a configuration and a (possibly empty) constraint set, produce a
successor in which every constrained agent sits on its required vertex.
Free agents are assigned greedily in descending priority with priority
inheritance and backtracking; preferences follow goal distance, overridden
to 0 along an agent's scattered path, with a reversal heuristic for swaps
in narrow passages.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import backend
from .graphs import DistTable, GridMap, Instance
from .rng import Rng

if TYPE_CHECKING:
    from .scatter import ScatterPaths

_BIG = 1 << 30

_EMPTY_I32 = np.empty(0, dtype=np.int32)
_EMPTY_I64 = np.empty(0, dtype=np.int64)


@dataclass(frozen=True)
class ConstraintSet:
    """Required (agent, vertex) assignments for the next configuration."""

    who: tuple[int, ...] = ()
    where: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.who) != len(self.where):
            raise ValueError("who and where must have equal length")
        if len(set(self.who)) != len(self.who):
            raise ValueError("an agent may appear at most once in a constraint set")

    def __len__(self) -> int:
        return len(self.who)

    def validate_for(self, q: Sequence[int], gmap: GridMap) -> None:
        for i, v in zip(self.who, self.where):
            if not 0 <= i < len(q):
                raise ValueError(f"constraint on unknown agent {i}")
            u = q[i]
            if v != u and v not in gmap.neighbors(u):
                raise ValueError(
                    f"constraint of agent {i} targets non-adjacent vertex {v}"
                )


EMPTY_CONSTRAINTS = ConstraintSet()


class PrioritySet:
    """Per-agent priorities: random base in [0,1) plus steps-off-goal streak.

    Induces a strict total order (ties broken by agent index).
    """

    __slots__ = ("bases", "streak")

    def __init__(self, bases: np.ndarray, streak: np.ndarray) -> None:
        self.bases = bases
        self.streak = streak

    @classmethod
    def initial(cls, starts: Sequence[int], goals: Sequence[int], rng: Rng) -> "PrioritySet":
        n = len(starts)
        bases = np.array([rng.random() for _ in range(n)], dtype=np.float64)
        streak = np.array(
            [0 if s == g else 1 for s, g in zip(starts, goals)], dtype=np.int32
        )
        return cls(bases, streak)

    def values(self) -> np.ndarray:
        return self.bases + self.streak

    def order(self) -> np.ndarray:
        """Agent indices in descending priority (index breaks ties)."""
        vals = self.values()
        n = vals.shape[0]
        return np.lexsort((np.arange(n), -vals)).astype(np.int32)


def update_priorities(
    priorities: PrioritySet, q: Sequence[int], goals: Sequence[int]
) -> PrioritySet:
    """Off-goal agents gain 1; agents at their goals reset to their base."""
    at_goal = np.asarray(q, dtype=np.int64) == np.asarray(goals, dtype=np.int64)
    streak = np.where(at_goal, 0, priorities.streak + 1).astype(np.int32)
    return PrioritySet(priorities.bases, streak)


class PreferenceContext:
    """Everything the generator consults: distances, guidance, randomness."""

    def __init__(
        self,
        instance: Instance,
        dist: DistTable | None = None,
        scatter: "ScatterPaths | None" = None,
        rng: Rng | None = None,
        swap_enabled: bool = True,
    ) -> None:
        self.instance = instance
        self.gmap = instance.gmap
        self.dist = dist if dist is not None else DistTable(instance)
        self.scatter = scatter
        self.rng = rng if rng is not None else Rng(0)
        self.swap_enabled = swap_enabled
        self.goals_arr = np.array(instance.goals, dtype=np.int32)
        self.dist_matrix = self.dist.ensure_all()
        if scatter is not None:
            self.sc_indptr, self.sc_keys = scatter.kernel_form(self.gmap.num_vertices)
        else:
            self.sc_indptr = np.zeros(instance.num_agents + 1, dtype=np.int64)
            self.sc_keys = _EMPTY_I64
        self._local = threading.local()

    def workspace(self):
        """Per-thread kernel scratch buffers (kernels are not re-entrant)."""
        kern = backend.active()
        cached = getattr(self._local, "ws", None)
        if cached is None or cached[0] is not kern:
            ws = kern.make_workspace(self.gmap.num_vertices, self.instance.num_agents)
            self._local.ws = (kern, ws)
            return ws
        return cached[1]

    def step_into(self, q_from, order, cons_who, cons_where, seed, q_to):
        """Low-level kernel call; arrays in, (ok, edge_cost, h) out."""
        return backend.active().pibt_step(
            self.workspace(),
            q_from,
            order,
            cons_who,
            cons_where,
            self.dist_matrix,
            self.gmap.indptr,
            self.gmap.indices,
            self.sc_indptr,
            self.sc_keys,
            self.goals_arr,
            seed,
            self.swap_enabled,
            q_to,
        )


def _pref_key(agent: int, current: int, u: int, ctx: PreferenceContext) -> int:
    if ctx.scatter is not None and ctx.scatter.has_edge(agent, current, u):
        return 0
    d = ctx.dist_matrix[agent, u]
    return int(d) if d >= 0 else _BIG


def build_preferences(agent: int, q: Sequence[int], ctx: PreferenceContext) -> list[int]:
    """neighbors(q[agent]) + {q[agent]} sorted ascending by the preference key.

    Ties are broken uniformly at random from ctx's stream (shuffle before a
    stable sort).  With no scattered paths this is pure distance ordering.
    """
    v = q[agent]
    cand = [v] + ctx.gmap.neighbors(v)
    ctx.rng.shuffle(cand)
    cand.sort(key=lambda u: _pref_key(agent, v, u, ctx))
    return cand


def apply_swap_heuristic(
    agent: int,
    q: Sequence[int],
    prefs: list[int],
    ctx: PreferenceContext,
    priorities: PrioritySet | None = None,
) -> list[int]:
    """Reverse prefs when a narrow-passage location exchange is detected.

    Fires iff the agent's top preference is occupied by an agent whose own
    (deterministic) top preference is this agent's vertex, both cells of the
    exchange have degree <= 2, and the occupant outranks this agent (only the
    dominated side retreats; with no priorities given the agent is treated as
    dominated).
    """
    u0 = prefs[0]
    v = q[agent]
    if u0 == v:
        return prefs
    try:
        j = q.index(u0) if isinstance(q, (list, tuple)) else int(np.where(np.asarray(q) == u0)[0][0])
    except (ValueError, IndexError):
        return prefs
    if j == agent:
        return prefs
    if priorities is not None:
        rank = {int(a): t for t, a in enumerate(priorities.order())}
        if rank[j] >= rank[agent]:
            return prefs
    if ctx.gmap.degree(v) > 2 or ctx.gmap.degree(u0) > 2:
        return prefs
    # occupant's best candidate, deterministic first-minimum in canonical order
    vj = q[j]
    best, best_key = vj, _pref_key(j, vj, vj, ctx)
    for u in ctx.gmap.neighbors(vj):
        key = _pref_key(j, vj, u, ctx)
        if key < best_key:
            best, best_key = u, key
    if best != v:
        return prefs
    return list(reversed(prefs))


def generate(
    q_from: Sequence[int],
    constraints: ConstraintSet,
    priorities: PrioritySet,
    ctx: PreferenceContext,
    seed: int | None = None,
) -> tuple[int, ...] | None:
    """One connected successor of q_from, or None if the constraints are dead.

    Constrained agents always occupy their required vertices in the output.
    """
    constraints.validate_for(q_from, ctx.gmap)
    q = np.asarray(q_from, dtype=np.int32)
    cons_who = np.asarray(constraints.who, dtype=np.int32) if constraints.who else _EMPTY_I32
    cons_where = (
        np.asarray(constraints.where, dtype=np.int32) if constraints.where else _EMPTY_I32
    )
    q_to = np.empty_like(q)
    if seed is None:
        seed = ctx.rng.next_u64()
    ok, _cost, _h = ctx.step_into(q, priorities.order(), cons_who, cons_where, seed, q_to)
    if not ok:
        return None
    return tuple(int(x) for x in q_to)
