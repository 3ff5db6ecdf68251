# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.

Every function here has a pure-Python twin with the same signature in
``cubeperc._fallback``; ``cubeperc.kernels`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, int32_t, uint8_t
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t cp_mulhilo(uint64_t a, uint64_t b, uint64_t *hi) {
        unsigned __int128 p = (unsigned __int128)a * (unsigned __int128)b;
        *hi = (uint64_t)(p >> 64);
        return (uint64_t)p;
    }
    /* Philox4x64-10 block for counter (ctr,0,0,0) and key (k0,k1); word 0. */
    static inline uint64_t cp_philox(uint64_t ctr, uint64_t k0, uint64_t k1) {
        uint64_t c0 = ctr, c1 = 0, c2 = 0, c3 = 0;
        uint64_t hi0, hi1, lo0, lo1;
        int r;
        for (r = 0; r < 10; r++) {
            if (r > 0) {
                k0 += 0x9E3779B97F4A7C15ULL;
                k1 += 0xBB67AE8584CAA73BULL;
            }
            lo0 = cp_mulhilo(0xD2E7470EE14C6C93ULL, c0, &hi0);
            lo1 = cp_mulhilo(0xCA5A826395121157ULL, c2, &hi1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
        }
        return c0;
    }
    """
    uint64_t cp_philox(uint64_t ctr, uint64_t k0, uint64_t k1) nogil


BACKEND = "cython"


cdef inline bint _is_open(uint64_t seed, uint64_t idx, uint64_t thr, bint full) noexcept nogil:
    if full:
        return True
    return cp_philox(idx, seed, 0) < thr


def philox_one(uint64_t seed, uint64_t index):
    return cp_philox(index, seed, 0)


def edge_draws(uint64_t seed, const uint64_t[::1] indices):
    cdef Py_ssize_t i, n = indices.shape[0]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = cp_philox(indices[i], seed, 0)
    return out


def open_table(int d, uint64_t seed, uint64_t thr, bint full, const int64_t[::1] verts):
    """Open flag of each (vertex, coordinate) edge, shape (len(verts), d)."""
    cdef Py_ssize_t i, m = verts.shape[0]
    cdef int j
    cdef uint64_t v, lower
    out = np.zeros((m, d), dtype=np.uint8)
    cdef uint8_t[:, ::1] o = out
    with nogil:
        for i in range(m):
            v = <uint64_t>verts[i]
            for j in range(d):
                lower = v & ~((<uint64_t>1) << j)
                o[i, j] = _is_open(seed, lower * d + j, thr, full)
    return out


cdef inline int64_t _find(int64_t* parent, int64_t x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def label_components(int d, uint64_t seed, uint64_t thr, bint full):
    """Union-find over one sweep of the canonical edges; label = smallest vertex."""
    cdef int64_t n = (<int64_t>1) << d
    labels = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] par = labels
    cdef int64_t v, w, a, b
    cdef int j
    with nogil:
        for v in range(n):
            par[v] = v
        for v in range(n):
            for j in range(d):
                if (v >> j) & 1:
                    continue
                if not _is_open(seed, <uint64_t>(v * d + j), thr, full):
                    continue
                w = v | ((<int64_t>1) << j)
                a = _find(&par[0], v)
                b = _find(&par[0], w)
                if a < b:
                    par[b] = a
                elif b < a:
                    par[a] = b
        for v in range(n):
            par[v] = _find(&par[0], v)
    return labels


def explore(int d, uint64_t seed, uint64_t thr, bint full, int64_t start, int64_t cap):
    """FIFO exploration from ``start``; cap <= 0 means unbounded.

    Returns (settled, frontier, touched, capped).
    """
    cdef int64_t n = (<int64_t>1) << d
    seen_arr = np.zeros(n, dtype=np.uint8)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef uint8_t[::1] seen = seen_arr
    cdef int64_t[::1] queue = queue_arr
    cdef int64_t head = 0, tail = 0, touched = 0, u, w
    cdef int j
    cdef bint capped = False
    with nogil:
        seen[start] = 1
        queue[tail] = start
        tail += 1
        if cap > 0 and tail >= cap:
            capped = True
        while head < tail and not capped:
            u = queue[head]
            for j in range(d):
                w = u ^ ((<int64_t>1) << j)
                if seen[w]:
                    continue
                touched += 1
                if _is_open(seed, <uint64_t>((u & w) * d + j), thr, full):
                    seen[w] = 1
                    queue[tail] = w
                    tail += 1
                    if cap > 0 and tail >= cap:
                        capped = True
                        break
            if capped:
                break
            head += 1
    return queue_arr[:head].copy(), queue_arr[head:tail].copy(), touched, capped


def oracle_distance(int d, uint64_t seed, uint64_t thr, bint full,
                    int64_t src, int64_t dst, int64_t max_dist):
    """BFS over the edge oracle from src until dst is found.

    Returns the vertex path src..dst, or None when dst is farther than
    ``max_dist`` (max_dist < 0: unbounded) or unreachable.
    """
    cdef int64_t n = (<int64_t>1) << d
    parent_arr = np.full(n, -1, dtype=np.int64)
    dist_arr = np.full(n, -1, dtype=np.int32)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] parent = parent_arr
    cdef int32_t[::1] dist = dist_arr
    cdef int64_t[::1] queue = queue_arr
    cdef int64_t head = 0, tail = 0, u, w
    cdef int j
    cdef bint found = src == dst
    with nogil:
        dist[src] = 0
        queue[tail] = src
        tail += 1
        while head < tail and not found:
            u = queue[head]
            head += 1
            if max_dist >= 0 and dist[u] >= max_dist:
                break
            for j in range(d):
                w = u ^ ((<int64_t>1) << j)
                if dist[w] >= 0:
                    continue
                if _is_open(seed, <uint64_t>((u & w) * d + j), thr, full):
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue[tail] = w
                    tail += 1
                    if w == dst:
                        found = True
                        break
    if not found:
        return None
    path = [dst]
    cdef int64_t x = dst
    while x != src:
        x = parent[x]
        path.append(x)
    path.reverse()
    return path


cdef void _bfs(const int64_t[::1] indptr, const int32_t[::1] indices, int32_t src,
               int32_t* dist, int32_t* queue, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, head = 0, tail = 0
    cdef int64_t e
    cdef int32_t u, w
    for i in range(m):
        dist[i] = -1
    dist[src] = 0
    queue[tail] = src
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            w = indices[e]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue[tail] = w
                tail += 1


def bfs_csr(const int64_t[::1] indptr, const int32_t[::1] indices, int32_t src):
    cdef Py_ssize_t m = indptr.shape[0] - 1
    dist_arr = np.empty(m, dtype=np.int32)
    queue_arr = np.empty(m, dtype=np.int32)
    cdef int32_t[::1] dist = dist_arr
    cdef int32_t[::1] queue = queue_arr
    with nogil:
        _bfs(indptr, indices, src, &dist[0], &queue[0], m)
    return dist_arr


def eccentricities(const int64_t[::1] indptr, const int32_t[::1] indices,
                   const int32_t[::1] sources):
    """Largest BFS distance from each source (-1 distances ignored)."""
    cdef Py_ssize_t m = indptr.shape[0] - 1
    cdef Py_ssize_t s, i, ns = sources.shape[0]
    out = np.empty(ns, dtype=np.int32)
    cdef int32_t[::1] o = out
    cdef int32_t* dist = <int32_t*>malloc(m * sizeof(int32_t))
    cdef int32_t* queue = <int32_t*>malloc(m * sizeof(int32_t))
    cdef int32_t best
    if dist == NULL or queue == NULL:
        free(dist)
        free(queue)
        raise MemoryError()
    try:
        with nogil:
            for s in range(ns):
                _bfs(indptr, indices, sources[s], dist, queue, m)
                best = 0
                for i in range(m):
                    if dist[i] > best:
                        best = dist[i]
                o[s] = best
    finally:
        free(dist)
        free(queue)
    return out


def lazy_step(const int64_t[::1] indptr, const int32_t[::1] indices,
              const double[::1] inv2deg, const double[:, ::1] mu):
    """One lazy-walk step applied to each column of ``mu`` (shape m x s)."""
    cdef Py_ssize_t m = mu.shape[0], s = mu.shape[1], v, c
    cdef int64_t e
    out = np.empty((m, s), dtype=np.float64)
    cdef double[:, ::1] nu = out
    with nogil:
        for v in range(m):
            for c in range(s):
                nu[v, c] = 0.5 * mu[v, c]
            for e in range(indptr[v], indptr[v + 1]):
                for c in range(s):
                    nu[v, c] += mu[indices[e], c] * inv2deg[indices[e]]
    return out
