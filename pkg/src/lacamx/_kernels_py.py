"""Pure-Python kernels: the reference semantics for the compiled extension.

Every function here has a bit-identical counterpart in ``_kernels.pyx``;
the backend equivalence tests hold the two to exact output equality,
random tie-breaking included.  Keep the draw order of the RNG and every
tie-break rule in sync when touching either side.

Conventions shared by both backends:
  * vertices are dense int32 ids; -1 is the universal "unset" sentinel;
  * distance rows use -1 for unreachable;
  * scatter guidance is a per-agent sorted list of packed directed edges
    (from_vertex * num_vertices + to_vertex) consulted via binary search;
  * PIBT preference order: stay-candidate first, then CSR neighbors, then a
    Fisher-Yates shuffle, then a stable sort on the preference key.
"""

from __future__ import annotations

from bisect import bisect_left

import numpy as np

from .rng import Rng

NAME = "python"

_BIG = 1 << 30


def bfs_fill(indptr, indices, source: int, out) -> None:
    """Fill out[v] with hop distance from source (-1 where unreachable)."""
    out[:] = -1
    out[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if out[v] < 0:
                    out[v] = d
                    nxt.append(v)
        frontier = nxt


class Workspace:
    """Reusable per-thread scratch state for pibt_step."""

    def __init__(self, num_vertices: int, num_agents: int) -> None:
        self.occ_now = np.full(num_vertices, -1, dtype=np.int32)
        self.occ_next = np.full(num_vertices, -1, dtype=np.int32)
        self.hard = np.zeros(num_vertices, dtype=np.int8)
        self.rank = np.zeros(num_agents, dtype=np.int32)


def make_workspace(num_vertices: int, num_agents: int) -> Workspace:
    # priority inheritance recurses up to num_agents deep
    import sys

    need = num_agents * 4 + 1000
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)
    return Workspace(num_vertices, num_agents)


def _pref_key(i, u, q_from, dist, num_vertices, sc_indptr, sc_keys):
    # 0 when (q_from[i], u) is a directed edge of agent i's scatter path,
    # else the goal distance.
    lo, hi = sc_indptr[i], sc_indptr[i + 1]
    if lo < hi:
        key = int(q_from[i]) * num_vertices + int(u)
        pos = bisect_left(sc_keys, key, lo, hi)
        if pos < hi and sc_keys[pos] == key:
            return 0
    d = dist[i, u]
    return int(d) if d >= 0 else _BIG


def _build_prefs(i, q_from, dist, indptr, indices, sc_indptr, sc_keys, rng):
    v = int(q_from[i])
    cand = [v] + [int(indices[k]) for k in range(indptr[v], indptr[v + 1])]
    rng.shuffle(cand)
    nv = indptr.shape[0] - 1
    cand.sort(key=lambda u: _pref_key(i, u, q_from, dist, nv, sc_indptr, sc_keys))
    return cand


def _top_pref_canonical(i, q_from, dist, indptr, indices, sc_indptr, sc_keys):
    # Deterministic best candidate (first minimum in canonical order); used
    # by the swap predicate so it never consumes the random stream.
    v = int(q_from[i])
    nv = indptr.shape[0] - 1
    best, best_key = v, _pref_key(i, v, q_from, dist, nv, sc_indptr, sc_keys)
    for k in range(indptr[v], indptr[v + 1]):
        u = int(indices[k])
        key = _pref_key(i, u, q_from, dist, nv, sc_indptr, sc_keys)
        if key < best_key:
            best, best_key = u, key
    return best


def _swap_should_reverse(
    i, prefs, q_from, occ_now, rank, dist, indptr, indices, sc_indptr, sc_keys
):
    u0 = prefs[0]
    v = int(q_from[i])
    if u0 == v:
        return False
    j = int(occ_now[u0])
    if j < 0 or j == i:
        return False
    if rank[j] >= rank[i]:
        return False  # only the dominated side retreats, or both livelock
    if indptr[v + 1] - indptr[v] > 2 or indptr[u0 + 1] - indptr[u0] > 2:
        return False  # only fires in narrow passages
    top_j = _top_pref_canonical(j, q_from, dist, indptr, indices, sc_indptr, sc_keys)
    return top_j == v


def pibt_step(
    ws: Workspace,
    q_from,
    order,
    cons_who,
    cons_where,
    dist,
    indptr,
    indices,
    sc_indptr,
    sc_keys,
    goals,
    seed: int,
    use_swap: bool,
    q_to,
):
    """One PIBT configuration step under constraints.

    Returns (ok, edge_cost, h_sum); on ok=False the contents of q_to are
    unspecified.  q_to must be an int32 array of length n.
    """
    n = q_from.shape[0]
    rng = Rng(seed)
    occ_now, occ_next, hard = ws.occ_now, ws.occ_next, ws.hard
    rank = ws.rank
    q_to[:] = -1
    for i in range(n):
        occ_now[q_from[i]] = i
        rank[order[i]] = i

    def rec(i: int) -> int:
        # 1: placed; 0: stayed put (caller retries its next candidate);
        # -1: dead branch (an agent could not even stay).
        prefs = _build_prefs(i, q_from, dist, indptr, indices, sc_indptr, sc_keys, rng)
        if use_swap and _swap_should_reverse(
            i, prefs, q_from, occ_now, rank, dist, indptr, indices, sc_indptr, sc_keys
        ):
            prefs.reverse()
        vi = int(q_from[i])
        for u in prefs:
            if occ_next[u] >= 0:
                continue
            k = int(occ_now[u])
            if k >= 0 and q_to[k] >= 0 and q_to[k] == vi:
                continue  # swap with a committed move
            q_to[i] = u
            occ_next[u] = i
            if k >= 0 and q_to[k] < 0:
                r = rec(k)  # priority inheritance
                if r < 0:
                    return -1
                if r == 0:
                    continue  # k reclaimed u by staying; retry next candidate
            return 1
        holder = int(occ_next[vi])
        if holder >= 0 and hard[vi]:
            return -1  # a constrained agent owns our cell; cannot stay
        # Stay put.  Overwriting a displacer's claim is the backtrack signal.
        q_to[i] = vi
        occ_next[vi] = i
        return 0

    ok = True
    c = cons_who.shape[0]
    for t in range(c):
        i, v = int(cons_who[t]), int(cons_where[t])
        if occ_next[v] >= 0:
            ok = False  # two constraints on one vertex
            break
        j = int(occ_now[v])
        if j >= 0 and j != i and q_to[j] >= 0 and q_to[j] == q_from[i]:
            ok = False  # two constraints swapping an edge
            break
        q_to[i] = v
        occ_next[v] = i
        hard[v] = 1
    if ok:
        # Agents displaced by a constraint move first.
        for t in range(c):
            j = int(occ_now[cons_where[t]])
            if j >= 0 and q_to[j] < 0:
                if rec(j) < 0:
                    ok = False
                    break
    if ok:
        for t in range(n):
            i = int(order[t])
            if q_to[i] < 0:
                if rec(i) < 0:
                    ok = False
                    break

    cost = 0
    h = 0
    if ok:
        for i in range(n):
            if not (q_from[i] == q_to[i] == goals[i]):
                cost += 1
            d = dist[i, q_to[i]]
            h += int(d) if d >= 0 else _BIG
    # cleanup touched cells (occ arrays persist across calls)
    for i in range(n):
        occ_now[q_from[i]] = -1
        if q_to[i] >= 0:
            occ_next[q_to[i]] = -1
    for t in range(c):
        occ_next[cons_where[t]] = -1
        hard[cons_where[t]] = 0
    return ok, cost, h


class MoveIndex:
    """Counts directed moves (t, u -> v) across stored scatter paths."""

    def __init__(self) -> None:
        self._counts: dict[int, int] = {}

    @staticmethod
    def _key(t: int, u: int, v: int) -> int:
        return (t << 42) | (u << 21) | v

    def add(self, t: int, u: int, v: int, delta: int) -> None:
        k = self._key(t, u, v)
        c = self._counts.get(k, 0) + delta
        if c:
            self._counts[k] = c
        else:
            self._counts.pop(k, None)

    def count(self, t: int, u: int, v: int) -> int:
        return self._counts.get(self._key(t, u, v), 0)

    def add_path(self, path, delta: int) -> None:
        for t in range(len(path) - 1):
            u, v = int(path[t]), int(path[t + 1])
            if u != v:
                self.add(t, u, v, delta)


def scatter_replan(
    indptr,
    indices,
    dist_row,
    start: int,
    goal: int,
    cap: int,
    cnt,
    moves: MoveIndex,
    max_pops: int = 1 << 62,
):
    """Collision-minimal length-capped single-agent path.

    Time-expanded A* over (vertex, t), t <= cap, minimizing (collisions
    entered + post-arrival parking collisions, arrival time), deterministic
    final tie-break by vertex id.  cnt is the (V, T+1) occupancy count of all
    other stored paths with parked tails materialized.  Returns (path,
    collisions); (None, 0) when goal is out of reach within cap or the
    expansion budget max_pops runs out.
    """
    nv = indptr.shape[0] - 1
    horizon = cnt.shape[1] - 1
    if dist_row[start] < 0 or dist_row[start] > cap:
        return None, 0
    width = cap + 1
    g_coll = np.full(nv * width, _BIG, dtype=np.int64)
    came = np.full(nv * width, -1, dtype=np.int64)
    closed = np.zeros(nv * width, dtype=bool)
    # parking tail: collisions suffered at the goal from arrival+1 .. horizon
    goal_tail = np.zeros(horizon + 2, dtype=np.int64)
    goal_tail[horizon] = cnt[goal, horizon]
    for t in range(horizon - 1, -1, -1):
        goal_tail[t] = goal_tail[t + 1] + cnt[goal, t]

    import heapq

    s_state = start * width + 0
    g_coll[s_state] = 0
    # heap priority: (total collisions incl. tail if goal, f-time, vertex, t)
    heap: list[tuple[int, int, int, int]] = []

    def tail(v: int, t: int) -> int:
        return int(goal_tail[t + 1]) if v == goal else 0

    heapq.heappush(heap, (tail(start, 0), dist_row[start], start, 0))
    best_goal_state = -1
    pops = 0
    while heap:
        pops += 1
        if pops > max_pops:
            return None, 0
        coll, ft, v, t = heapq.heappop(heap)
        state = v * width + t
        if closed[state]:
            continue
        closed[state] = True
        if v == goal:
            best_goal_state = state
            best_coll = coll
            break
        base = int(g_coll[state])
        for k in range(indptr[v], indptr[v + 1] + 1):
            u = int(indices[k]) if k < indptr[v + 1] else v  # neighbors + wait
            t2 = t + 1
            if t2 > cap or dist_row[u] < 0 or t2 + dist_row[u] > cap:
                continue
            s2 = u * width + t2
            if closed[s2]:
                continue
            step = int(cnt[u, t2]) if t2 <= horizon else 0
            if u != v:
                step += moves.count(t, u, v)  # swap against opposing movers
            c2 = base + step
            if c2 < g_coll[s2]:
                g_coll[s2] = c2
                came[s2] = state
                heapq.heappush(heap, (c2 + tail(u, t2), t2 + dist_row[u], u, t2))
    if best_goal_state < 0:
        return None, 0
    path = []
    s = best_goal_state
    while s >= 0:
        path.append(s // width)
        s = came[s]
    path.reverse()
    return np.array(path, dtype=np.int32), int(best_coll)


class EdgeBlocks:
    """Set of frozen directed moves (t, u -> v) for SIPP swap avoidance."""

    def __init__(self) -> None:
        self._set: set[int] = set()

    @staticmethod
    def _key(t: int, u: int, v: int) -> int:
        return (t << 42) | (u << 21) | v

    def add(self, t: int, u: int, v: int) -> None:
        self._set.add(self._key(t, u, v))

    def blocked(self, t: int, u: int, v: int) -> bool:
        return self._key(t, u, v) in self._set

    def add_paths(self, paths) -> None:
        for row in paths:
            for t in range(len(row) - 1):
                u, v = int(row[t]), int(row[t + 1])
                if u != v:
                    self.add(t, u, v)

    def extend_shifted(self, other: "EdgeBlocks", dt: int) -> None:
        """Copy other's blocks with every timestamp shifted by dt."""
        for key in other._set:
            t = key >> 42
            t2 = t + dt
            if t2 >= 0:
                self._set.add((t2 << 42) | (key & ((1 << 42) - 1)))


def _intervals_of(occ_row, horizon: int):
    """Maximal free intervals [a, b) of one vertex; b == _BIG marks 'forever'.

    occ_row has horizon+1 entries; entry `horizon` stands for every t >=
    horizon (frozen agents are parked by then).
    """
    ivs = []
    t = 0
    while t <= horizon:
        if occ_row[t]:
            t += 1
            continue
        a = t
        while t <= horizon and not occ_row[t]:
            t += 1
        if t > horizon:
            ivs.append((a, _BIG))
        else:
            ivs.append((a, t))
    return ivs


def sipp_plan(
    indptr,
    indices,
    dist_row,
    start: int,
    goal: int,
    occ,
    blocks: EdgeBlocks,
    horizon: int,
):
    """Minimal-arrival timed path avoiding frozen agents; None if infeasible.

    occ is (V, horizon+1) uint8 occupancy of frozen agents with parked tails;
    row entry `horizon` encodes "occupied forever from horizon on".  The goal
    must have an unbounded final safe interval (the agent parks forever).
    Returns the dense vertex-per-timestep path (length arrival+1).
    """
    import heapq

    if dist_row[start] < 0:
        return None
    iv_cache: dict[int, list[tuple[int, int]]] = {}

    def intervals(v: int):
        got = iv_cache.get(v)
        if got is None:
            got = _intervals_of(occ[v], horizon)
            iv_cache[v] = got
        return got

    ivs_s = intervals(start)
    if not ivs_s or ivs_s[0][0] != 0:
        return None
    best: dict[tuple[int, int], int] = {(start, 0): 0}
    came: dict[tuple[int, int], tuple[int, int, int]] = {}
    heap = [(int(dist_row[start]), 0, start, 0)]
    while heap:
        f, g, v, iv = heapq.heappop(heap)
        if best.get((v, iv), _BIG) < g:
            continue
        ivs_v = intervals(v)
        end_v = ivs_v[iv][1]
        if v == goal and end_v == _BIG:
            # reconstruct and expand waits
            arrival = g
            chain = [(v, iv, g)]
            key = (v, iv)
            while key in came:
                pv, piv, pg = came[key]
                chain.append((pv, piv, pg))
                key = (pv, piv)
            chain.reverse()
            path = np.empty(arrival + 1, dtype=np.int32)
            idx = 0
            for pos, (cv, _, _cg) in enumerate(chain):
                until = chain[pos + 1][2] if pos + 1 < len(chain) else arrival + 1
                while idx < until:  # waiting at cv until the departure step
                    path[idx] = cv
                    idx += 1
            return path
        for k in range(indptr[v], indptr[v + 1]):
            u = int(indices[k])
            if dist_row[u] < 0:
                continue
            for jv, (a, b) in enumerate(intervals(u)):
                if a > end_v:  # cannot wait at v long enough to enter
                    break
                arrive = max(g + 1, a)
                if arrive >= b:
                    continue
                # delay departure past swap blocks, within both intervals
                while (
                    arrive - 1 < end_v
                    and arrive < b
                    and blocks.blocked(arrive - 1, u, v)
                ):
                    arrive += 1
                if arrive - 1 >= end_v or arrive >= b or arrive > horizon:
                    continue
                if best.get((u, jv), _BIG) > arrive:
                    best[(u, jv)] = arrive
                    came[(u, jv)] = (v, iv, g)
                    heapq.heappush(heap, (arrive + int(dist_row[u]), arrive, u, jv))
    return None
