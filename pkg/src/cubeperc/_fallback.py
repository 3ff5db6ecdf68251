"""Pure numpy/scipy implementations of the kernels in ``_kernels.pyx``."""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

BACKEND = "python"

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_MUL0 = 0xD2E7470EE14C6C93
_MUL1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B
_MASK64 = (1 << 64) - 1


def _mulhilo(a: np.ndarray, b: int) -> tuple[np.ndarray, np.ndarray]:
    # 64x64 -> 128 product from 32-bit halves; every partial fits in uint64.
    b_lo = np.uint64(b & 0xFFFFFFFF)
    b_hi = np.uint64(b >> 32)
    a_lo = a & _M32
    a_hi = a >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _S32) + (lh & _M32) + (hl & _M32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    lo = a * np.uint64(b)
    return hi, lo


def _philox(ctr: np.ndarray, seed: int) -> np.ndarray:
    c0 = np.asarray(ctr, dtype=np.uint64).copy()
    c1 = np.zeros_like(c0)
    c2 = np.zeros_like(c0)
    c3 = np.zeros_like(c0)
    k0, k1 = seed & _MASK64, 0
    for r in range(10):
        if r:
            k0 = (k0 + _W0) & _MASK64
            k1 = (k1 + _W1) & _MASK64
        hi0, lo0 = _mulhilo(c0, _MUL0)
        hi1, lo1 = _mulhilo(c2, _MUL1)
        c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint64(k0), lo1, hi0 ^ c3 ^ np.uint64(k1), lo0
    return c0


def philox_one(seed: int, index: int) -> int:
    return int(_philox(np.array([index], dtype=np.uint64), seed)[0])


def edge_draws(seed: int, indices: np.ndarray) -> np.ndarray:
    return _philox(np.ascontiguousarray(indices, dtype=np.uint64), seed)


def _open(seed: int, idx: np.ndarray, thr: int, full: bool) -> np.ndarray:
    if full:
        return np.ones(idx.shape, dtype=bool)
    return _philox(idx.astype(np.uint64), seed) < np.uint64(thr)


def open_table(d: int, seed: int, thr: int, full: bool, verts: np.ndarray) -> np.ndarray:
    verts = np.asarray(verts, dtype=np.int64)
    coords = np.arange(d, dtype=np.int64)
    lower = verts[:, None] & ~(np.int64(1) << coords)[None, :]
    idx = lower * d + coords[None, :]
    return _open(seed, idx.ravel(), thr, full).reshape(len(verts), d).astype(np.uint8)


def _open_edges(d: int, seed: int, thr: int, full: bool) -> tuple[np.ndarray, np.ndarray]:
    n = 1 << d
    v = np.arange(n, dtype=np.int64)
    us, ws = [], []
    for j in range(d):
        lower = v[(v >> j) & 1 == 0]
        keep = _open(seed, lower * d + j, thr, full)
        us.append(lower[keep])
        ws.append(lower[keep] | (1 << j))
    return np.concatenate(us), np.concatenate(ws)


def label_components(d: int, seed: int, thr: int, full: bool) -> np.ndarray:
    n = 1 << d
    u, w = _open_edges(d, seed, thr, full)
    graph = coo_matrix((np.ones(len(u), dtype=np.int8), (u, w)), shape=(n, n)).tocsr()
    _, comp = connected_components(graph, directed=False)
    smallest = np.full(comp.max() + 1, n, dtype=np.int64)
    np.minimum.at(smallest, comp, np.arange(n, dtype=np.int64))
    return smallest[comp]


def explore(d: int, seed: int, thr: int, full: bool, start: int, cap: int):
    seen = {start}
    queue = [start]
    head = touched = 0
    coords = np.arange(d, dtype=np.int64)
    capped = cap > 0 and len(queue) >= cap
    while head < len(queue) and not capped:
        u = queue[head]
        nbrs = u ^ (np.int64(1) << coords)
        # the oracle is stateless, so reading all d flags at once changes nothing
        flags = _open(seed, (u & nbrs) * d + coords, thr, full)
        for w, ok in zip(nbrs.tolist(), flags.tolist()):
            if w in seen:
                continue
            touched += 1
            if ok:
                seen.add(w)
                queue.append(w)
                if cap > 0 and len(queue) >= cap:
                    capped = True
                    break
        if capped:
            break
        head += 1
    arr = np.array(queue, dtype=np.int64)
    return arr[:head].copy(), arr[head:].copy(), touched, capped


def oracle_distance(d: int, seed: int, thr: int, full: bool, src: int, dst: int, max_dist: int):
    if src == dst:
        return [src]
    parent = {src: -1}
    dist = {src: 0}
    queue = deque([src])
    coords = np.arange(d, dtype=np.int64)
    while queue:
        u = queue.popleft()
        if 0 <= max_dist <= dist[u]:
            break
        nbrs = u ^ (np.int64(1) << coords)
        flags = _open(seed, (u & nbrs) * d + coords, thr, full)
        for w, ok in zip(nbrs.tolist(), flags.tolist()):
            if ok and w not in dist:
                dist[w] = dist[u] + 1
                parent[w] = u
                if w == dst:
                    path = [w]
                    while path[-1] != src:
                        path.append(parent[path[-1]])
                    return path[::-1]
                queue.append(w)
    return None


def _as_csr(indptr: np.ndarray, indices: np.ndarray) -> csr_matrix:
    m = len(indptr) - 1
    return csr_matrix((np.ones(len(indices), dtype=np.int8), indices, indptr), shape=(m, m))


def bfs_csr(indptr: np.ndarray, indices: np.ndarray, src: int) -> np.ndarray:
    dist = shortest_path(_as_csr(indptr, indices), method="D", unweighted=True, indices=[src])[0]
    out = np.full(dist.shape, -1, dtype=np.int32)
    finite = np.isfinite(dist)
    out[finite] = dist[finite].astype(np.int32)
    return out


def eccentricities(indptr: np.ndarray, indices: np.ndarray, sources: np.ndarray) -> np.ndarray:
    graph = _as_csr(indptr, indices)
    sources = np.asarray(sources, dtype=np.int32)
    out = np.empty(len(sources), dtype=np.int32)
    chunk = max(1, 2_000_000 // max(1, graph.shape[0]))
    for lo in range(0, len(sources), chunk):
        dist = shortest_path(graph, method="D", unweighted=True, indices=sources[lo:lo + chunk])
        dist[~np.isfinite(dist)] = 0
        out[lo:lo + chunk] = dist.max(axis=1)
    return out


def lazy_step(indptr: np.ndarray, indices: np.ndarray, inv2deg: np.ndarray, mu: np.ndarray) -> np.ndarray:
    adj = _as_csr(indptr, indices).astype(np.float64)
    return 0.5 * mu + adj @ (mu * inv2deg[:, None])
