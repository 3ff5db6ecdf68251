"""Q^d_p as a stateless edge oracle, plus the two-round sprinkling coupling.

An edge {v, v ^ 2^i} is named by its lower endpoint (bit i clear) and i; its
index is ``lower * d + i``. The state of the edge is decided by comparing a
Philox4x64-10 output keyed by (seed, index) with ``floor(p * 2^64)``, so no
edge list is ever stored and every sample can be replayed exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .hypercube import check_dim, check_vertex

TWO64 = 1 << 64
SEED_MASK = TWO64 - 1


def threshold(p: float) -> int:
    """floor(p * 2^64); exact because ldexp does not round."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return int(math.ldexp(p, 64))


@dataclass(frozen=True)
class EdgeId:
    lower: int
    coord: int

    def index(self, d: int) -> int:
        return self.lower * d + self.coord

    @property
    def upper(self) -> int:
        return self.lower | (1 << self.coord)

    @classmethod
    def between(cls, u: int, v: int) -> "EdgeId":
        diff = u ^ v
        if diff.bit_count() != 1:
            raise ValueError(f"{u} and {v} are not adjacent")
        return cls(u & v, diff.bit_length() - 1)

    def check(self, d: int) -> None:
        if not 0 <= self.coord < d:
            raise ValueError(f"coordinate {self.coord} outside [0, {d})")
        check_vertex(self.lower, d)
        if self.lower >> self.coord & 1:
            raise ValueError(f"non-canonical edge: bit {self.coord} of {self.lower} is set")


@dataclass(frozen=True)
class PercolationParams:
    d: int
    c: float
    seed: int

    def __post_init__(self):
        check_dim(self.d)
        if self.c < 0 or self.c > self.d:
            raise ValueError(f"need 0 <= c <= d, got c={self.c}, d={self.d}")
        if not 0 <= self.seed < TWO64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def p(self) -> float:
        return self.c / self.d

    @property
    def n(self) -> int:
        return 1 << self.d


class PercolationSample:
    """Q^d_p for fixed (d, c, seed); a pure function of edge index."""

    def __init__(self, params: PercolationParams, *, p: float | None = None):
        self.params = params
        self.d = params.d
        self.seed = params.seed
        self.p = params.p if p is None else p
        self.threshold = threshold(self.p)
        self.full = self.threshold >= TWO64
        # kernels compare against a uint64; the full case is flagged separately
        self._thr = min(self.threshold, TWO64 - 1)

    @classmethod
    def make(cls, d: int, c: float, seed: int) -> "PercolationSample":
        return cls(PercolationParams(d, c, seed))

    @classmethod
    def with_p(cls, d: int, p: float, seed: int) -> "PercolationSample":
        return cls(PercolationParams(d, p * d, seed), p=p)

    def __repr__(self):
        return f"PercolationSample(d={self.d}, p={self.p!r}, seed={self.seed})"

    @property
    def n(self) -> int:
        return 1 << self.d

    def kernel_args(self) -> tuple[int, int, int, bool]:
        return self.d, self.seed, self._thr, self.full

    def edge_state(self, e: EdgeId) -> bool:
        e.check(self.d)
        if self.full:
            return True
        return kernels.philox_one(self.seed, e.index(self.d)) < self.threshold

    def is_open(self, u: int, v: int) -> bool:
        return self.edge_state(EdgeId.between(u, v))

    def open_neighbors(self, v: int) -> list[int]:
        check_vertex(v, self.d)
        row = self.open_table(np.array([v], dtype=np.int64))[0]
        return [v ^ (1 << i) for i in range(self.d) if row[i]]

    def open_table(self, verts) -> np.ndarray:
        """uint8 flags, shape (len(verts), d): is the coordinate-i edge at each vertex open."""
        verts = np.ascontiguousarray(verts, dtype=np.int64)
        return kernels.open_table(*self.kernel_args(), verts)

    def open_edge_count(self) -> int:
        lower, coord = canonical_edges(self.d)
        if self.full:
            return len(lower)
        draws = kernels.edge_draws(self.seed, (lower * self.d + coord).astype(np.uint64))
        return int((draws < np.uint64(self._thr)).sum())


def canonical_edges(d: int) -> tuple[np.ndarray, np.ndarray]:
    """(lower, coord) for all d * 2^(d-1) edges, ordered by index."""
    check_dim(d)
    v = np.arange(1 << d, dtype=np.int64)
    lower = np.repeat(v, d)
    coord = np.tile(np.arange(d, dtype=np.int64), 1 << d)
    keep = (lower >> coord) & 1 == 0
    return lower[keep], coord[keep]


class EdgeRound(enum.IntEnum):
    CLOSED = 0
    IN_G1 = 1
    IN_G2_ONLY = 2


@dataclass(frozen=True)
class SprinklingPair:
    """G1 = Q^d_{p1} inside G2, where G2 has the law of Q^d_p.

    One uniform per edge: below floor(p1 2^64) the edge is in G1, below
    floor(p 2^64) it is in G2.
    """

    d: int
    c: float
    delta: float
    seed: int

    def __post_init__(self):
        check_dim(self.d)
        if not 0 < self.delta < self.c:
            raise ValueError(f"need 0 < delta < c, got delta={self.delta}, c={self.c}")
        if self.c / self.d > 1:
            raise ValueError("c/d must be at most 1")

    @property
    def p(self) -> float:
        return self.c / self.d

    @property
    def p1(self) -> float:
        return (self.c - self.delta) / self.d

    @property
    def p2(self) -> float:
        return (self.p - self.p1) / (1 - self.p1)

    @cached_property
    def g1(self) -> PercolationSample:
        return PercolationSample(PercolationParams(self.d, self.c - self.delta, self.seed))

    @cached_property
    def g2(self) -> PercolationSample:
        return PercolationSample(PercolationParams(self.d, self.c, self.seed))

    def coupled_edge_state(self, e: EdgeId) -> EdgeRound:
        e.check(self.d)
        return EdgeRound(int(self.classify(np.array([e.index(self.d)], dtype=np.uint64))[0]))

    def classify(self, indices: np.ndarray) -> np.ndarray:
        r = kernels.edge_draws(self.seed, np.ascontiguousarray(indices, dtype=np.uint64))
        out = np.zeros(len(r), dtype=np.int8)
        g2 = r < np.uint64(self.g2._thr) if not self.g2.full else np.ones(len(r), dtype=bool)
        out[g2] = EdgeRound.IN_G2_ONLY
        out[r < np.uint64(self.g1._thr)] = EdgeRound.IN_G1
        return out

    def scan(self) -> np.ndarray:
        """State of every canonical edge, in index order."""
        lower, coord = canonical_edges(self.d)
        return self.classify((lower * self.d + coord).astype(np.uint64))


def sprinkle_params(c: float, delta: float, d: int) -> tuple[float, float]:
    """(p1, p2) with p1 = (c - delta)/d and (1 - p1)(1 - p2) = 1 - c/d."""
    pair = SprinklingPair(d, c, delta, 0)
    p1, p2 = pair.p1, pair.p2
    if not 0 <= p1 < 1:
        raise ValueError(f"p1={p1} must lie in [0, 1)")
    return p1, p2
