"""The anytime high-level search over configurations.

A stack-based OPEN holds nodes that are invoked repeatedly; each invocation
consumes one constraint-tree leaf, generates at most one successor
configuration, and either creates a node or rewires the neighbor graph with a
Dijkstra-style g rewrite.  After the first goal encounter the search keeps
running, pruning on f against the incumbent, optionally extracting random or
start nodes to escape stuck regions, and folding externally found solutions
into the search graph through a mailbox.  An empty OPEN proves optimality
(goal known) or unsolvability (goal never seen).
"""

from __future__ import annotations

import time
from collections import deque
from concurrent.futures import Executor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .graphs import Config, Instance
from .montecarlo import mc_generate
from .pibt import ConstraintSet, PreferenceContext, PrioritySet
from .rng import Rng, derive_seed
from .scatter import ScatterPaths

ImprovementHook = Callable[[float, int, list[Config], str], None]

SOURCE_SEARCH = "search"


class SolveStatus(Enum):
    SOLVED = "solved"
    OPTIMALLY_SOLVED = "optimally_solved"
    NO_SOLUTION = "no_solution"
    TIMEOUT_FAILURE = "timeout_failure"


class ConstraintNode:
    """One constraint-tree node; the root path encodes the active constraints."""

    __slots__ = ("parent", "who", "where", "depth")

    def __init__(self, parent: "ConstraintNode | None", who: int, where: int) -> None:
        self.parent = parent
        self.who = who
        self.where = where
        self.depth = 0 if parent is None else parent.depth + 1


def _root_constraint() -> ConstraintNode:
    return ConstraintNode(None, -1, -1)


class Node:
    """High-level search node: a configuration plus search bookkeeping."""

    __slots__ = (
        "key",
        "parent",
        "g",
        "h",
        "tree",
        "neighbors",
        "streak",
        "is_goal",
        "_order",
    )

    def __init__(
        self,
        key: bytes,
        parent: "Node | None",
        g: int,
        h: int,
        streak: np.ndarray,
        is_goal: bool,
    ) -> None:
        self.key = key
        self.parent = parent
        self.g = g
        self.h = h
        self.tree: deque[ConstraintNode] = deque([_root_constraint()])
        self.neighbors: set[Node] = set()
        self.streak = streak
        self.is_goal = is_goal
        self._order: np.ndarray | None = None

    @property
    def config(self) -> np.ndarray:
        return np.frombuffer(self.key, dtype=np.int32)

    @property
    def f(self) -> int:
        return self.g + self.h

    def order(self, bases: np.ndarray) -> np.ndarray:
        if self._order is None:
            vals = bases + self.streak
            n = vals.shape[0]
            self._order = np.lexsort((np.arange(n), -vals)).astype(np.int32)
        return self._order


@dataclass
class SearchParams:
    time_limit_ms: float = 10_000.0
    seed: int = 0
    extract_prob: float = 0.0
    extract_strategy: str = "random"  # "random" | "restart"
    reinsert_init_prob: float = 0.001
    mc_samples: int = 1
    swap_enabled: bool = True
    scatter: ScatterPaths | None = None
    check_every: int = 4096


@dataclass
class Counters:
    iterations: int = 0
    nodes: int = 0
    generator_calls: int = 0
    incorporations: int = 0


@dataclass
class SearchState:
    instance: Instance
    params: SearchParams
    ctx: PreferenceContext
    rng: Rng
    bases: np.ndarray
    open: list[Node]
    explored: dict[bytes, Node]
    init_node: Node
    goal_key: bytes
    goal_node: Node | None = None
    best_cost: float = float("inf")
    counters: Counters = field(default_factory=Counters)


def _h_of(ctx: PreferenceContext, q: np.ndarray) -> int:
    return int(ctx.dist_matrix[np.arange(q.shape[0]), q].sum())


def _edge_cost(ctx: PreferenceContext, a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(~((a == b) & (b == ctx.goals_arr))))


def _child_streak(streak: np.ndarray, q: np.ndarray, goals: np.ndarray) -> np.ndarray:
    return np.where(q == goals, 0, streak + 1).astype(np.int32)


def create_state(
    instance: Instance,
    params: SearchParams,
    ctx: PreferenceContext | None = None,
    dist=None,
) -> SearchState:
    rng = Rng(derive_seed(params.seed, 0))
    if ctx is None:
        ctx = PreferenceContext(
            instance,
            dist=dist,
            scatter=params.scatter,
            rng=rng,
            swap_enabled=params.swap_enabled,
        )
    else:
        ctx.rng = rng
    starts = np.array(instance.starts, dtype=np.int32)
    goals = np.array(instance.goals, dtype=np.int32)
    priorities = PrioritySet.initial(instance.starts, instance.goals, rng)
    init = Node(
        key=starts.tobytes(),
        parent=None,
        g=0,
        h=_h_of(ctx, starts),
        streak=priorities.streak,
        is_goal=bool((starts == goals).all()),
    )
    state = SearchState(
        instance=instance,
        params=params,
        ctx=ctx,
        rng=rng,
        bases=priorities.bases,
        open=[init],
        explored={init.key: init},
        init_node=init,
        goal_key=goals.tobytes(),
    )
    state.counters.nodes = 1
    return state


def extract_node(state: SearchState) -> tuple[Node, bool]:
    """Next node to invoke; the bool says whether it was the stack top.

    Before an initial solution exists this is always the top.  Afterwards,
    with probability extract_prob, a uniformly random OPEN entry ("random")
    or the start node ("restart") is taken instead.
    """
    p = state.params.extract_prob
    if state.goal_node is not None and p > 0.0 and state.rng.random() < p:
        if state.params.extract_strategy == "restart":
            node = state.init_node
            return node, state.open[-1] is node
        idx = state.rng.randrange(len(state.open))
        return state.open[idx], idx == len(state.open) - 1
    return state.open[-1], True


def low_level_search(node: Node, state: SearchState) -> ConstraintSet | None:
    """Pop the next constraint-tree leaf breadth-first and grow its children.

    Children constrain the highest-priority agent absent from the leaf's
    ancestry: stuck agents (whose priority grows) get forced through first.
    Returns the constraint set along the leaf's root path, or None when the
    tree is exhausted (the caller discards the node).
    """
    if not node.tree:
        return None
    c = node.tree.popleft()
    n = state.instance.num_agents
    if c.depth < n:
        used = set()
        a = c
        while a.parent is not None:
            used.add(a.who)
            a = a.parent
        order = node.order(state.bases)
        agent = next(int(i) for i in order if int(i) not in used)
        q = node.config
        v = int(q[agent])
        gmap = state.instance.gmap
        node.tree.append(ConstraintNode(c, agent, v))
        for u in gmap.neighbors(v):
            node.tree.append(ConstraintNode(c, agent, u))
    who: list[int] = []
    where: list[int] = []
    a = c
    while a.parent is not None:
        who.append(a.who)
        where.append(a.where)
        a = a.parent
    who.reverse()
    where.reverse()
    return ConstraintSet(tuple(who), tuple(where))


def dijkstra_update(node: Node, state: SearchState) -> None:
    """Propagate g improvements outward from node, rewriting parents.

    Nodes whose improved f drops below the incumbent's are pushed back onto
    OPEN so pruned regions revive.
    """
    goal = state.goal_node
    dq: deque[Node] = deque([node])
    while dq:
        n_from = dq.popleft()
        cfg_from = n_from.config
        for n_to in n_from.neighbors:
            g2 = n_from.g + _edge_cost(state.ctx, cfg_from, n_to.config)
            if g2 < n_to.g:
                n_to.g = g2
                n_to.parent = n_from
                dq.append(n_to)
                if goal is not None and n_to.f < goal.g + goal.h:
                    state.open.append(n_to)


def backtrack(node: Node) -> list[Config]:
    """Parent chain reversed into a configuration sequence from the start."""
    rows: list[Config] = []
    n: Node | None = node
    while n is not None:
        rows.append(tuple(int(x) for x in n.config))
        n = n.parent
    rows.reverse()
    return rows


class IncorporationError(ValueError):
    """The fed solution cannot be merged (invalid, or unknown first config)."""


def incorporate_solution(state: SearchState, solution: Sequence[Sequence[int]]) -> None:
    """Fold an externally found solution into the search graph (mailbox path).

    Unknown configurations become new nodes chained to the walk's frontier;
    known ones gain a neighbor edge followed by a Dijkstra rewrite.  The fed
    solution's first configuration must already be explored.
    """
    from .graphs import validate_solution

    rows = np.asarray(solution, dtype=np.int32)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise IncorporationError("solution must be a nonempty 2-D sequence")
    frontier = state.explored.get(rows[0].tobytes())
    if frontier is None:
        raise IncorporationError("first configuration of the solution is unexplored")
    bad = validate_solution(state.instance, [tuple(r) for r in rows])
    if bad is not None:
        raise IncorporationError(f"fed solution is invalid: {bad}")
    goals = state.ctx.goals_arr
    for t in range(1, rows.shape[0]):
        q = rows[t]
        key = q.tobytes()
        known = state.explored.get(key)
        if known is None:
            g = frontier.g + _edge_cost(state.ctx, frontier.config, q)
            child = Node(
                key=key,
                parent=frontier,
                g=g,
                h=_h_of(state.ctx, q),
                streak=_child_streak(frontier.streak, q, goals),
                is_goal=key == state.goal_key,
            )
            state.explored[key] = child
            state.open.append(child)
            frontier.neighbors.add(child)
            state.counters.nodes += 1
            frontier = child
        else:
            frontier.neighbors.add(known)
            dijkstra_update(frontier, state)
            frontier = known
    state.counters.incorporations += 1
    if state.goal_node is None:
        state.goal_node = state.explored.get(state.goal_key)


@dataclass
class SearchResult:
    status: SolveStatus
    solution: list[Config] | None
    counters: Counters
    state: SearchState


def search(
    instance: Instance,
    params: SearchParams,
    hooks: Sequence[ImprovementHook] = (),
    mailbox: deque | None = None,
    pool: Executor | None = None,
    deadline: float | None = None,
    should_stop: Callable[[], bool] | None = None,
    dist=None,
) -> SearchResult:
    """Run the anytime loop until OPEN empties or the deadline/stop fires.

    hooks fire on every strict improvement of the incumbent cost with
    (elapsed seconds, cost, solution, source); the mailbox (a deque of
    (solution_rows, source) pairs) is polled once per iteration.
    """
    t_start = time.monotonic()
    if deadline is None:
        deadline = t_start + params.time_limit_ms / 1000.0
    state = create_state(instance, params, dist=dist)
    # unreachable goal for any agent: unsolvable regardless of interactions
    sarr = np.array(instance.starts, dtype=np.int32)
    if (state.ctx.dist_matrix[np.arange(instance.num_agents), sarr] < 0).any():
        return SearchResult(SolveStatus.NO_SOLUTION, None, state.counters, state)

    def fire_improvement(source: str) -> None:
        goal = state.goal_node
        if goal is None or goal.g >= state.best_cost:
            return
        state.best_cost = goal.g
        if hooks:
            sol = backtrack(goal)
            elapsed = time.monotonic() - t_start
            for hook in hooks:
                hook(elapsed, goal.g, sol, source)

    counters = state.counters
    interrupted = False
    check_every = max(1, params.check_every)
    k = max(1, params.mc_samples)

    while state.open:
        counters.iterations += 1
        if counters.iterations % check_every == 0:
            if time.monotonic() >= deadline or (should_stop is not None and should_stop()):
                interrupted = True
                break
        if mailbox:
            while mailbox:
                rows, source = mailbox.popleft()
                try:
                    incorporate_solution(state, rows)
                except IncorporationError:
                    pass
                else:
                    fire_improvement(source)

        node, from_top = extract_node(state)
        if node.is_goal and state.goal_node is None:
            state.goal_node = node
            fire_improvement(SOURCE_SEARCH)
        goal = state.goal_node
        if goal is not None and goal.g + goal.h <= node.f:
            if from_top:
                state.open.pop()
            continue
        if not node.tree:
            if from_top:
                state.open.pop()
            continue
        constraints = low_level_search(node, state)
        counters.generator_calls += 1
        produced = mc_generate(
            node.config,
            constraints,
            node.order(state.bases),
            state.ctx,
            k=k,
            pool=pool,
        )
        if produced is None:
            continue
        q_new, cost, h = produced
        key = q_new.tobytes()
        known = state.explored.get(key)
        if known is None:
            child = Node(
                key=key,
                parent=node,
                g=node.g + cost,
                h=h,
                streak=_child_streak(node.streak, q_new, state.ctx.goals_arr),
                is_goal=key == state.goal_key,
            )
            state.explored[key] = child
            state.open.append(child)
            node.neighbors.add(child)
            counters.nodes += 1
        else:
            node.neighbors.add(known)
            dijkstra_update(node, state)
            fire_improvement(SOURCE_SEARCH)
            if state.rng.random() < params.reinsert_init_prob:
                state.open.append(state.init_node)
            else:
                state.open.append(known)

    goal = state.goal_node
    if goal is not None:
        status = (
            SolveStatus.SOLVED if state.open else SolveStatus.OPTIMALLY_SOLVED
        )
        solution = backtrack(goal)
    elif not state.open:
        status, solution = SolveStatus.NO_SOLUTION, None
    else:
        status, solution = SolveStatus.TIMEOUT_FAILURE, None
    return SearchResult(status, solution, counters, state)
