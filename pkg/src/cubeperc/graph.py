"""Compact CSR view of one component (or any small undirected graph)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels


@dataclass(frozen=True, eq=False)
class ComponentGraph:
    """Vertices re-indexed 0..m-1; ``vertices[i]`` is the original id of i."""

    vertices: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_sample(cls, sample, vertices) -> "ComponentGraph":
        verts = np.unique(np.asarray(vertices, dtype=np.int64))
        table = sample.open_table(verts).astype(bool)
        pos = np.full(sample.n, -1, dtype=np.int64)
        pos[verts] = np.arange(len(verts))
        nbrs = verts[:, None] ^ (np.int64(1) << np.arange(sample.d, dtype=np.int64))[None, :]
        nb_pos = pos[nbrs]
        keep = table & (nb_pos >= 0)
        counts = keep.sum(axis=1)
        indptr = np.zeros(len(verts) + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = nb_pos[keep].astype(np.int32)
        return cls(verts, indptr, indices)

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[tuple[int, int]]) -> "ComponentGraph":
        e = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        r = np.concatenate([e[:, 0], e[:, 1]])
        c = np.concatenate([e[:, 1], e[:, 0]])
        mat = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(m, m)).tocsr()
        mat.sum_duplicates()
        mat.sort_indices()
        return cls(np.arange(m, dtype=np.int64), mat.indptr.astype(np.int64), mat.indices.astype(np.int32))

    @property
    def m(self) -> int:
        return len(self.vertices)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        return int(self.indptr[-1]) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edge_rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.m, dtype=np.int64), self.degrees)

    def is_connected(self) -> bool:
        return self.m > 0 and bool((self.bfs(0) >= 0).all())

    def bfs(self, src: int) -> np.ndarray:
        return kernels.bfs_csr(self.indptr, self.indices, int(src))

    def eccentricities(self, sources) -> np.ndarray:
        return kernels.eccentricities(self.indptr, self.indices, np.ascontiguousarray(sources, dtype=np.int32))

    def boundary(self, mask: np.ndarray) -> int:
        """Edges with exactly one endpoint in the boolean mask."""
        rows = self.edge_rows()
        return int(np.count_nonzero(mask[rows] != mask[self.indices])) // 2

    def internal_edges(self, mask: np.ndarray) -> int:
        rows = self.edge_rows()
        return int(np.count_nonzero(mask[rows] & mask[self.indices])) // 2

    def index_of(self, original) -> np.ndarray:
        return np.searchsorted(self.vertices, np.asarray(original, dtype=np.int64))


@dataclass(frozen=True)
class BarePathStats:
    longest: int
    cycles: int


def bare_paths(g: ComponentGraph) -> BarePathStats:
    """Longest run of degree-2 vertices, in edges among them; pure cycles counted apart."""
    deg = g.degrees
    two = np.flatnonzero(deg == 2)
    if len(two) == 0:
        return BarePathStats(0, 0)
    rows = g.edge_rows()
    both = (deg[rows] == 2) & (deg[g.indices] == 2)
    pos = np.full(g.m, -1, dtype=np.int64)
    pos[two] = np.arange(len(two))
    r = pos[rows[both]]
    c = pos[g.indices[both]]
    mat = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(len(two), len(two))).tocsr()
    ncomp, comp = connected_components(mat, directed=False)
    nverts = np.bincount(comp, minlength=ncomp)
    nedges = np.bincount(comp[r], minlength=ncomp) // 2
    is_cycle = nedges == nverts
    runs = nverts[~is_cycle]
    longest = int(runs.max() - 1) if len(runs) else 0
    return BarePathStats(longest, int(is_cycle.sum()))
