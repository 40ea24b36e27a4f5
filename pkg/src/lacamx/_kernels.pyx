# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False
"""Compiled kernels; bit-identical to lacamx._kernels_py.

Any change here must be mirrored in the pure-Python module (and vice versa):
the equivalence tests hold both backends to exact output equality, random
tie-breaking included.  The RNG is the same splitmix64 stream as
lacamx.rng.Rng.  All heap keys in the planners are unique, so pop order
equals sorted order and matches heapq exactly.
"""

from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t, uint64_t
from libc.stdlib cimport free, malloc, realloc
from libcpp.unordered_map cimport unordered_map
from libcpp.unordered_set cimport unordered_set
from libcpp.vector cimport vector

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "compiled"

cdef int64_t BIG = (<int64_t>1) << 30
cdef uint64_t GAMMA = <uint64_t>0x9E3779B97F4A7C15


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t _next(uint64_t* state) nogil:
    state[0] = state[0] + GAMMA
    return _mix64(state[0])


def bfs_fill(const int32_t[:] indptr, const int32_t[:] indices, int source, int32_t[:] out):
    """Fill out[v] with hop distance from source (-1 where unreachable)."""
    cdef Py_ssize_t nv = out.shape[0]
    cdef int32_t* queue = <int32_t*> malloc(nv * sizeof(int32_t))
    if queue == NULL:
        raise MemoryError()
    cdef Py_ssize_t head = 0, tail = 0, k
    cdef int32_t u, v, d
    with nogil:
        for k in range(nv):
            out[k] = -1
        out[source] = 0
        queue[tail] = source
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            d = out[u] + 1
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if out[v] < 0:
                    out[v] = d
                    queue[tail] = v
                    tail += 1
    free(queue)


cdef class Workspace:
    """Reusable per-thread scratch state for pibt_step."""

    cdef int32_t* occ_now
    cdef int32_t* occ_next
    cdef int8_t* hard
    cdef int32_t* rank

    def __cinit__(self, int num_vertices, int num_agents):
        cdef Py_ssize_t i
        self.occ_now = <int32_t*> malloc(num_vertices * sizeof(int32_t))
        self.occ_next = <int32_t*> malloc(num_vertices * sizeof(int32_t))
        self.hard = <int8_t*> malloc(num_vertices * sizeof(int8_t))
        self.rank = <int32_t*> malloc(num_agents * sizeof(int32_t))
        if (self.occ_now == NULL or self.occ_next == NULL
                or self.hard == NULL or self.rank == NULL):
            raise MemoryError()
        for i in range(num_vertices):
            self.occ_now[i] = -1
            self.occ_next[i] = -1
            self.hard[i] = 0
        for i in range(num_agents):
            self.rank[i] = 0

    def __dealloc__(self):
        free(self.occ_now)
        free(self.occ_next)
        free(self.hard)
        free(self.rank)


def make_workspace(int num_vertices, int num_agents):
    return Workspace(num_vertices, num_agents)


# ---------------------------------------------------------------------------
# PIBT
# ---------------------------------------------------------------------------

cdef struct PibtCtx:
    const int32_t* q_from
    int32_t* q_to
    int32_t* occ_now
    int32_t* occ_next
    int8_t* hard
    int32_t* rank
    const int32_t* dist
    const int32_t* indptr
    const int32_t* indices
    const int64_t* sc_indptr
    const int64_t* sc_keys
    Py_ssize_t n
    Py_ssize_t nv
    uint64_t rng
    bint use_swap


cdef inline int64_t _pref_key(PibtCtx* c, Py_ssize_t i, int32_t u) nogil:
    cdef int64_t lo = c.sc_indptr[i]
    cdef int64_t hi = c.sc_indptr[i + 1]
    cdef int64_t end = hi
    cdef int64_t key, mid
    cdef int32_t d
    if lo < hi:
        key = <int64_t>c.q_from[i] * c.nv + u
        while lo < hi:
            mid = (lo + hi) >> 1
            if c.sc_keys[mid] < key:
                lo = mid + 1
            else:
                hi = mid
        if lo < end and c.sc_keys[lo] == key:
            return 0
    d = c.dist[i * c.nv + u]
    return d if d >= 0 else BIG


cdef Py_ssize_t _build_prefs(PibtCtx* c, Py_ssize_t i, int32_t* cand, int64_t* keys) nogil:
    cdef int32_t v = c.q_from[i]
    cdef Py_ssize_t m = 0, k, j, idx
    cdef int32_t tmp
    cdef int64_t ktmp
    cand[m] = v
    m += 1
    for k in range(c.indptr[v], c.indptr[v + 1]):
        cand[m] = c.indices[k]
        m += 1
    # Fisher-Yates shuffle, then a stable insertion sort on the preference
    # key: identical to shuffle + stable sort in the Python backend
    for idx in range(m - 1, 0, -1):
        j = <Py_ssize_t>(_next(&c.rng) % <uint64_t>(idx + 1))
        tmp = cand[idx]; cand[idx] = cand[j]; cand[j] = tmp
    for idx in range(m):
        keys[idx] = _pref_key(c, i, cand[idx])
    for idx in range(1, m):
        ktmp = keys[idx]
        tmp = cand[idx]
        j = idx
        while j > 0 and keys[j - 1] > ktmp:
            keys[j] = keys[j - 1]
            cand[j] = cand[j - 1]
            j -= 1
        keys[j] = ktmp
        cand[j] = tmp
    return m


cdef bint _swap_should_reverse(PibtCtx* c, Py_ssize_t i, int32_t* cand) nogil:
    cdef int32_t u0 = cand[0]
    cdef int32_t v = c.q_from[i]
    cdef int32_t j, vj, best, u
    cdef int64_t best_key, key
    cdef Py_ssize_t k
    if u0 == v:
        return False
    j = c.occ_now[u0]
    if j < 0 or j == <int32_t>i:
        return False
    if c.rank[j] >= c.rank[i]:
        return False  # only the dominated side retreats, or both livelock
    if c.indptr[v + 1] - c.indptr[v] > 2 or c.indptr[u0 + 1] - c.indptr[u0] > 2:
        return False
    vj = c.q_from[j]
    best = vj
    best_key = _pref_key(c, j, vj)
    for k in range(c.indptr[vj], c.indptr[vj + 1]):
        u = c.indices[k]
        key = _pref_key(c, j, u)
        if key < best_key:
            best = u
            best_key = key
    return best == v


cdef int _rec(PibtCtx* c, Py_ssize_t i) nogil:
    # 1: placed; 0: stayed put (caller retries); -1: dead branch
    cdef int32_t cand[8]
    cdef int64_t keys[8]
    cdef Py_ssize_t m, idx
    cdef int32_t u, vi, tmp, k
    cdef int r
    m = _build_prefs(c, i, cand, keys)
    if c.use_swap and _swap_should_reverse(c, i, cand):
        for idx in range(m >> 1):
            tmp = cand[idx]; cand[idx] = cand[m - 1 - idx]; cand[m - 1 - idx] = tmp
    vi = c.q_from[i]
    for idx in range(m):
        u = cand[idx]
        if c.occ_next[u] >= 0:
            continue
        k = c.occ_now[u]
        if k >= 0 and c.q_to[k] >= 0 and c.q_to[k] == vi:
            continue  # swap with a committed move
        c.q_to[i] = u
        c.occ_next[u] = <int32_t>i
        if k >= 0 and c.q_to[k] < 0:
            r = _rec(c, k)  # priority inheritance
            if r < 0:
                return -1
            if r == 0:
                continue  # k reclaimed u by staying; retry next candidate
        return 1
    if c.occ_next[vi] >= 0 and c.hard[vi]:
        return -1  # a constrained agent owns our cell; cannot stay
    c.q_to[i] = vi
    c.occ_next[vi] = <int32_t>i
    return 0


def pibt_step(
    Workspace ws,
    const int32_t[:] q_from,
    const int32_t[:] order,
    const int32_t[:] cons_who,
    const int32_t[:] cons_where,
    const int32_t[:, :] dist,
    const int32_t[:] indptr,
    const int32_t[:] indices,
    const int64_t[:] sc_indptr,
    const int64_t[:] sc_keys,
    const int32_t[:] goals,
    object seed,
    bint use_swap,
    int32_t[:] q_to,
):
    """One PIBT configuration step under constraints -> (ok, edge_cost, h)."""
    cdef PibtCtx c
    cdef Py_ssize_t n = q_from.shape[0]
    cdef Py_ssize_t ncons = cons_who.shape[0]
    cdef Py_ssize_t t, i
    cdef int32_t v, j
    cdef bint ok = True
    cdef int64_t cost = 0, h = 0
    cdef int32_t d
    cdef uint64_t seed_val = seed

    c.q_from = &q_from[0]
    c.q_to = &q_to[0]
    c.occ_now = ws.occ_now
    c.occ_next = ws.occ_next
    c.hard = ws.hard
    c.rank = ws.rank
    c.dist = &dist[0, 0]
    c.indptr = &indptr[0]
    c.indices = &indices[0] if indices.shape[0] > 0 else NULL
    c.sc_indptr = &sc_indptr[0]
    c.sc_keys = &sc_keys[0] if sc_keys.shape[0] > 0 else NULL
    c.n = n
    c.nv = indptr.shape[0] - 1
    c.rng = seed_val
    c.use_swap = use_swap

    with nogil:
        for i in range(n):
            q_to[i] = -1
            c.occ_now[q_from[i]] = <int32_t>i
            c.rank[order[i]] = <int32_t>i
        for t in range(ncons):
            i = cons_who[t]
            v = cons_where[t]
            if c.occ_next[v] >= 0:
                ok = False  # two constraints on one vertex
                break
            j = c.occ_now[v]
            if j >= 0 and j != <int32_t>i and c.q_to[j] >= 0 and c.q_to[j] == q_from[i]:
                ok = False  # two constraints swapping an edge
                break
            c.q_to[i] = v
            c.occ_next[v] = <int32_t>i
            c.hard[v] = 1
        if ok:
            # agents displaced by a constraint move first
            for t in range(ncons):
                j = c.occ_now[cons_where[t]]
                if j >= 0 and c.q_to[j] < 0:
                    if _rec(&c, j) < 0:
                        ok = False
                        break
        if ok:
            for t in range(n):
                i = order[t]
                if c.q_to[i] < 0:
                    if _rec(&c, i) < 0:
                        ok = False
                        break
        if ok:
            for i in range(n):
                if not (q_from[i] == q_to[i] and q_to[i] == goals[i]):
                    cost += 1
                d = c.dist[i * c.nv + q_to[i]]
                h += d if d >= 0 else BIG
        for i in range(n):
            c.occ_now[q_from[i]] = -1
            if q_to[i] >= 0:
                c.occ_next[q_to[i]] = -1
        for t in range(ncons):
            c.occ_next[cons_where[t]] = -1
            c.hard[cons_where[t]] = 0
    return bool(ok), int(cost), int(h)


# ---------------------------------------------------------------------------
# Scatter-path replanning
# ---------------------------------------------------------------------------

cdef inline int64_t _pack_move(int64_t t, int64_t u, int64_t v) nogil:
    return (t << 42) | (u << 21) | v


cdef class MoveIndex:
    """Counts directed moves (t, u -> v) across stored scatter paths."""

    cdef unordered_map[int64_t, int32_t] counts

    cdef void _add(self, int64_t t, int64_t u, int64_t v, int32_t delta) nogil:
        cdef int64_t k = _pack_move(t, u, v)
        cdef int32_t c = 0
        if self.counts.count(k):
            c = self.counts[k]
        c += delta
        if c:
            self.counts[k] = c
        else:
            self.counts.erase(k)

    cdef int32_t _count(self, int64_t t, int64_t u, int64_t v) nogil:
        cdef int64_t k = _pack_move(t, u, v)
        if self.counts.count(k):
            return self.counts[k]
        return 0

    def add(self, int t, int u, int v, int delta):
        self._add(t, u, v, delta)

    def count(self, int t, int u, int v):
        return self._count(t, u, v)

    def add_path(self, const int32_t[:] path, int delta):
        cdef Py_ssize_t t
        cdef int32_t u, v
        with nogil:
            for t in range(path.shape[0] - 1):
                u = path[t]
                v = path[t + 1]
                if u != v:
                    self._add(t, u, v, delta)


cdef struct HeapEntry:
    int64_t coll
    int64_t ft
    int32_t v
    int32_t t


cdef inline bint _he_less(HeapEntry a, HeapEntry b) nogil:
    if a.coll != b.coll:
        return a.coll < b.coll
    if a.ft != b.ft:
        return a.ft < b.ft
    if a.v != b.v:
        return a.v < b.v
    return a.t < b.t


cdef inline void _he_push(vector[HeapEntry]& heap, HeapEntry e) nogil:
    cdef Py_ssize_t child, parent
    cdef HeapEntry tmp
    heap.push_back(e)
    child = <Py_ssize_t>heap.size() - 1
    while child > 0:
        parent = (child - 1) >> 1
        if _he_less(heap[child], heap[parent]):
            tmp = heap[child]; heap[child] = heap[parent]; heap[parent] = tmp
            child = parent
        else:
            break


cdef inline HeapEntry _he_pop(vector[HeapEntry]& heap) nogil:
    cdef HeapEntry top = heap[0]
    cdef Py_ssize_t i = 0, l, r, s, size
    cdef HeapEntry tmp
    heap[0] = heap[heap.size() - 1]
    heap.pop_back()
    size = <Py_ssize_t>heap.size()
    while True:
        l = 2 * i + 1
        r = l + 1
        s = i
        if l < size and _he_less(heap[l], heap[s]):
            s = l
        if r < size and _he_less(heap[r], heap[s]):
            s = r
        if s == i:
            break
        tmp = heap[i]; heap[i] = heap[s]; heap[s] = tmp
        i = s
    return top


def scatter_replan(
    const int32_t[:] indptr,
    const int32_t[:] indices,
    const int32_t[:] dist_row,
    int start,
    int goal,
    int cap,
    const int32_t[:, :] cnt,
    MoveIndex moves,
    object max_pops=None,
):
    """Collision-minimal length-capped single-agent path; see _kernels_py."""
    cdef Py_ssize_t nv = indptr.shape[0] - 1
    cdef Py_ssize_t horizon = cnt.shape[1] - 1
    cdef int64_t budget = BIG * 4 if max_pops is None else <int64_t>max_pops
    if dist_row[start] < 0 or dist_row[start] > cap:
        return None, 0
    cdef Py_ssize_t width = cap + 1
    cdef Py_ssize_t nstates = nv * width
    cdef int64_t* g_coll = <int64_t*> malloc(nstates * sizeof(int64_t))
    cdef int64_t* came = <int64_t*> malloc(nstates * sizeof(int64_t))
    cdef uint8_t* closed = <uint8_t*> malloc(nstates * sizeof(uint8_t))
    cdef int64_t* goal_tail = <int64_t*> malloc((horizon + 2) * sizeof(int64_t))
    if g_coll == NULL or came == NULL or closed == NULL or goal_tail == NULL:
        free(g_coll); free(came); free(closed); free(goal_tail)
        raise MemoryError()
    cdef vector[HeapEntry] heap
    cdef HeapEntry e, cur
    cdef Py_ssize_t s, s2, k, t2
    cdef int64_t best_coll = -1, base, c2, step, pops = 0
    cdef int32_t v, u, t
    cdef Py_ssize_t best_goal_state = -1

    with nogil:
        for s in range(nstates):
            g_coll[s] = BIG
            came[s] = -1
            closed[s] = 0
        goal_tail[horizon + 1] = 0
        goal_tail[horizon] = cnt[goal, horizon]
        for t2 in range(horizon - 1, -1, -1):
            goal_tail[t2] = goal_tail[t2 + 1] + cnt[goal, t2]
        g_coll[<Py_ssize_t>start * width] = 0
        e.coll = goal_tail[1] if start == goal else 0
        e.ft = dist_row[start]
        e.v = start
        e.t = 0
        _he_push(heap, e)
        while heap.size() > 0:
            pops += 1
            if pops > budget:
                break
            cur = _he_pop(heap)
            s = <Py_ssize_t>cur.v * width + cur.t
            if closed[s]:
                continue
            closed[s] = 1
            if cur.v == goal:
                best_goal_state = s
                best_coll = cur.coll
                break
            base = g_coll[s]
            v = cur.v
            t = cur.t
            for k in range(indptr[v], indptr[v + 1] + 1):
                u = indices[k] if k < indptr[v + 1] else v  # neighbors + wait
                t2 = t + 1
                if t2 > cap or dist_row[u] < 0 or t2 + dist_row[u] > cap:
                    continue
                s2 = <Py_ssize_t>u * width + t2
                if closed[s2]:
                    continue
                step = cnt[u, t2] if t2 <= horizon else 0
                if u != v:
                    step += moves._count(t, u, v)  # swap against opposing movers
                c2 = base + step
                if c2 < g_coll[s2]:
                    g_coll[s2] = c2
                    came[s2] = s
                    e.coll = c2 + (goal_tail[t2 + 1] if u == goal else 0)
                    e.ft = t2 + dist_row[u]
                    e.v = u
                    e.t = <int32_t>t2
                    _he_push(heap, e)

    if best_goal_state < 0:
        free(g_coll); free(came); free(closed); free(goal_tail)
        return None, 0
    rev = []
    cdef int64_t walk = best_goal_state
    while walk >= 0:
        rev.append(walk // width)
        walk = came[walk]
    rev.reverse()
    out = np.asarray(rev, dtype=np.int32)
    free(g_coll); free(came); free(closed); free(goal_tail)
    return out, int(best_coll)


# ---------------------------------------------------------------------------
# SIPP
# ---------------------------------------------------------------------------

cdef class EdgeBlocks:
    """Set of frozen directed moves (t, u -> v) for SIPP swap avoidance."""

    cdef unordered_set[int64_t] blocked_set

    cdef bint _blocked(self, int64_t t, int64_t u, int64_t v) nogil:
        return self.blocked_set.count(_pack_move(t, u, v)) > 0

    def add(self, int t, int u, int v):
        self.blocked_set.insert(_pack_move(t, u, v))

    def blocked(self, int t, int u, int v):
        return self._blocked(t, u, v)

    def add_paths(self, const int32_t[:, :] paths):
        cdef Py_ssize_t r, t
        cdef int32_t u, v
        with nogil:
            for r in range(paths.shape[0]):
                for t in range(paths.shape[1] - 1):
                    u = paths[r, t]
                    v = paths[r, t + 1]
                    if u != v:
                        self.blocked_set.insert(_pack_move(t, u, v))

    def extend_shifted(self, EdgeBlocks other, int dt):
        """Copy other's blocks with every timestamp shifted by dt."""
        cdef int64_t key, t, t2
        cdef int64_t low_mask = (((<int64_t>1) << 42) - 1)
        for key in other.blocked_set:
            t = key >> 42
            t2 = t + dt
            if t2 >= 0:
                self.blocked_set.insert((t2 << 42) | (key & low_mask))


cdef struct SippEntry:
    int64_t f
    int64_t g
    int32_t v
    int32_t iv


cdef inline bint _se_less(SippEntry a, SippEntry b) nogil:
    if a.f != b.f:
        return a.f < b.f
    if a.g != b.g:
        return a.g < b.g
    if a.v != b.v:
        return a.v < b.v
    return a.iv < b.iv


cdef inline void _se_push(vector[SippEntry]& heap, SippEntry e) nogil:
    cdef Py_ssize_t child, parent
    cdef SippEntry tmp
    heap.push_back(e)
    child = <Py_ssize_t>heap.size() - 1
    while child > 0:
        parent = (child - 1) >> 1
        if _se_less(heap[child], heap[parent]):
            tmp = heap[child]; heap[child] = heap[parent]; heap[parent] = tmp
            child = parent
        else:
            break


cdef inline SippEntry _se_pop(vector[SippEntry]& heap) nogil:
    cdef SippEntry top = heap[0]
    cdef Py_ssize_t i = 0, l, r, s, size
    cdef SippEntry tmp
    heap[0] = heap[heap.size() - 1]
    heap.pop_back()
    size = <Py_ssize_t>heap.size()
    while True:
        l = 2 * i + 1
        r = l + 1
        s = i
        if l < size and _se_less(heap[l], heap[s]):
            s = l
        if r < size and _se_less(heap[r], heap[s]):
            s = r
        if s == i:
            break
        tmp = heap[i]; heap[i] = heap[s]; heap[s] = tmp
        i = s
    return top


cdef void _touch(
    const uint8_t[:, :] occ,
    int32_t v,
    Py_ssize_t horizon,
    int64_t* offset,
    int32_t* count,
    vector[int64_t]& iv_start,
    vector[int64_t]& iv_end,
    vector[int32_t]& slot_vertex,
    vector[int64_t]& best_g,
    vector[int64_t]& came,
) nogil:
    # build the maximal free intervals of vertex v into the arena
    cdef Py_ssize_t t = 0, a
    offset[v] = <int64_t>iv_start.size()
    while t <= horizon:
        if occ[v, t]:
            t += 1
            continue
        a = t
        while t <= horizon and not occ[v, t]:
            t += 1
        iv_start.push_back(a)
        iv_end.push_back(BIG if t > horizon else t)
        slot_vertex.push_back(v)
        best_g.push_back(BIG)
        came.push_back(-1)
        count[v] += 1


def sipp_plan(
    const int32_t[:] indptr,
    const int32_t[:] indices,
    const int32_t[:] dist_row,
    int start,
    int goal,
    const uint8_t[:, :] occ,
    EdgeBlocks blocks,
    int horizon,
):
    """Minimal-arrival timed path avoiding frozen agents; see _kernels_py."""
    cdef Py_ssize_t nv = indptr.shape[0] - 1
    if dist_row[start] < 0:
        return None
    cdef int64_t* offset = <int64_t*> malloc(nv * sizeof(int64_t))
    cdef int32_t* count = <int32_t*> malloc(nv * sizeof(int32_t))
    if offset == NULL or count == NULL:
        free(offset); free(count)
        raise MemoryError()
    cdef vector[int64_t] iv_start
    cdef vector[int64_t] iv_end
    cdef vector[int32_t] slot_vertex
    cdef vector[int64_t] best_g
    cdef vector[int64_t] came
    cdef vector[SippEntry] heap
    cdef SippEntry e, cur
    cdef Py_ssize_t i, k, jv, si, sj
    cdef int64_t end_v, a2, b2, arrive
    cdef int32_t v, u
    cdef Py_ssize_t found = -1
    cdef int64_t found_g = -1

    with nogil:
        for i in range(nv):
            offset[i] = -1
            count[i] = 0
        _touch(occ, start, horizon, offset, count,
               iv_start, iv_end, slot_vertex, best_g, came)
        if count[start] > 0 and iv_start[offset[start]] == 0:
            best_g[offset[start]] = 0
            e.f = dist_row[start]
            e.g = 0
            e.v = start
            e.iv = 0
            _se_push(heap, e)
        while heap.size() > 0:
            cur = _se_pop(heap)
            v = cur.v
            si = offset[v] + cur.iv
            if best_g[si] < cur.g:
                continue
            end_v = iv_end[si]
            if v == goal and end_v == BIG:
                found = si
                found_g = cur.g
                break
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if dist_row[u] < 0:
                    continue
                if offset[u] < 0:
                    _touch(occ, u, horizon, offset, count,
                           iv_start, iv_end, slot_vertex, best_g, came)
                for jv in range(count[u]):
                    sj = offset[u] + jv
                    a2 = iv_start[sj]
                    b2 = iv_end[sj]
                    if a2 > end_v:
                        break  # cannot wait at v long enough to enter
                    arrive = cur.g + 1 if cur.g + 1 > a2 else a2
                    if arrive >= b2:
                        continue
                    # delay departure past swap blocks, within both intervals
                    while arrive - 1 < end_v and arrive < b2 and blocks._blocked(arrive - 1, u, v):
                        arrive += 1
                    if arrive - 1 >= end_v or arrive >= b2 or arrive > horizon:
                        continue
                    if best_g[sj] > arrive:
                        best_g[sj] = arrive
                        came[sj] = si
                        e.f = arrive + dist_row[u]
                        e.g = arrive
                        e.v = u
                        e.iv = <int32_t>jv
                        _se_push(heap, e)

    if found < 0:
        free(offset); free(count)
        return None
    chain_v = []
    chain_g = []
    cdef int64_t node = found
    while node >= 0:
        chain_v.append(int(slot_vertex[<Py_ssize_t>node]))
        chain_g.append(int(best_g[<Py_ssize_t>node]))
        node = came[<Py_ssize_t>node]
    chain_v.reverse()
    chain_g.reverse()
    arrival = int(found_g)
    path = np.empty(arrival + 1, dtype=np.int32)
    idx = 0
    for w in range(len(chain_v)):
        until = chain_g[w + 1] if w + 1 < len(chain_v) else arrival + 1
        while idx < until:  # waiting at the vertex until the departure step
            path[idx] = chain_v[w]
            idx += 1
    free(offset)
    free(count)
    return path
