"""Geometry of Q^d with vertices packed into integers (coordinate i = bit i)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

MAX_DIM = 63


def check_dim(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension must be an integer in [1, {MAX_DIM}], got {d!r}")
    return int(d)


def check_vertex(v: int, d: int) -> int:
    if not 0 <= v < (1 << d):
        raise ValueError(f"vertex {v} outside Q^{d}")
    return int(v)


def neighbors(v: int, d: int) -> list[int]:
    check_dim(d)
    check_vertex(v, d)
    return [v ^ (1 << i) for i in range(d)]


def hamming(u: int, v: int) -> int:
    return (u ^ v).bit_count()


def support(v: int) -> set[int]:
    """Coordinates (0-based) where v is 1."""
    return {i for i in range(v.bit_length()) if v >> i & 1}


def all_ones(d: int) -> int:
    return (1 << d) - 1


@dataclass(frozen=True)
class SubcubeSpan:
    base: int
    free_mask: int

    def __post_init__(self):
        if self.base & self.free_mask:
            raise ValueError("base must be zero on the free coordinates")

    @property
    def dim(self) -> int:
        return self.free_mask.bit_count()

    def fixed_coords(self, d: int) -> int:
        """Mask of coordinates where every vertex of the span agrees."""
        return all_ones(d) & ~self.free_mask

    def __contains__(self, v: int) -> bool:
        return v & ~self.free_mask == self.base

    def vertices(self) -> list[int]:
        bits = [1 << i for i in range(self.free_mask.bit_length()) if self.free_mask >> i & 1]
        out = [self.base]
        for b in bits:
            out += [x | b for x in out]
        return sorted(out)


def subcube_span(u: int, v: int) -> SubcubeSpan:
    free = u ^ v
    return SubcubeSpan(base=u & ~free, free_mask=free)


def harper_bound(s: int, d: int) -> float:
    """Lower bound s*(d - log2 s) on the edge boundary of any s-set in Q^d."""
    check_dim(d)
    if not 1 <= s <= 1 << d:
        raise ValueError(f"set size {s} outside [1, 2^{d}]")
    return s * (d - math.log2(s))


def edge_boundary(vertices: Iterable[int], d: int, sample=None) -> int:
    """Edges with exactly one endpoint in ``vertices``.

    With ``sample`` (a PercolationSample) only open edges count.
    """
    verts = np.fromiter(set(vertices), dtype=np.int64)
    if verts.size == 0:
        return 0
    inside = np.zeros(1 << d, dtype=bool)
    inside[verts] = True
    coords = np.arange(d, dtype=np.int64)
    nbrs = verts[:, None] ^ (np.int64(1) << coords)[None, :]
    crossing = ~inside[nbrs]
    if sample is not None:
        crossing &= sample.open_table(verts).astype(bool)
    return int(crossing.sum())


def vertex_bits(v: int, d: int) -> str:
    """Coordinate string, coordinate 1 first (so 0b001 in Q^3 reads "100")."""
    return "".join("1" if v >> i & 1 else "0" for i in range(d))
