"""Component structure of Q^d_p: exploration, labeling and the small-component census."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .graph import BarePathStats, ComponentGraph, bare_paths
from .percolation import PercolationSample


class StopReason(enum.Enum):
    EXHAUSTED = "exhausted"
    SIZE_CAP_REACHED = "size_cap_reached"


@dataclass(frozen=True)
class ExplorationRecord:
    root: int
    settled: np.ndarray
    frontier: np.ndarray
    touched: int
    stop: StopReason

    @property
    def discovered(self) -> np.ndarray:
        return np.concatenate([self.settled, self.frontier])


def explore_bfs(sample: PercolationSample, start: int, size_cap: int | None = None) -> ExplorationRecord:
    """Breadth-first exploration of the start's component.

    Vertices wait in a FIFO queue; when a vertex is processed only edges to
    still-undiscovered vertices are queried, in coordinate order. With
    ``size_cap`` the run stops once settled + queued reaches the cap.
    """
    if size_cap is not None and size_cap < 1:
        raise ValueError("size_cap must be >= 1")
    if not 0 <= start < sample.n:
        raise ValueError(f"start {start} outside Q^{sample.d}")
    settled, frontier, touched, capped = kernels.explore(*sample.kernel_args(), start, size_cap or 0)
    stop = StopReason.SIZE_CAP_REACHED if capped else StopReason.EXHAUSTED
    return ExplorationRecord(start, settled, frontier, int(touched), stop)


@dataclass(frozen=True)
class ComponentLabeling:
    """label[v] is the smallest vertex of v's component."""

    d: int
    label: np.ndarray

    @cached_property
    def _counts(self) -> tuple[np.ndarray, np.ndarray]:
        return np.unique(self.label, return_counts=True)

    @property
    def labels(self) -> np.ndarray:
        return self._counts[0]

    @property
    def sizes(self) -> dict[int, int]:
        return dict(zip(self._counts[0].tolist(), self._counts[1].tolist()))

    def size_of(self, lab: int) -> int:
        return int(np.count_nonzero(self.label == lab))

    @cached_property
    def giant_label(self) -> int:
        labs, counts = self._counts
        # np.argmax returns the first maximum and labels are sorted ascending
        return int(labs[np.argmax(counts)])

    @property
    def giant_size(self) -> int:
        labs, counts = self._counts
        return int(counts.max())

    def members(self, lab: int) -> np.ndarray:
        return np.flatnonzero(self.label == lab)

    def giant_vertices(self) -> np.ndarray:
        return self.members(self.giant_label)

    @property
    def n_components(self) -> int:
        return len(self._counts[0])


def label_components(sample: PercolationSample) -> ComponentLabeling:
    return ComponentLabeling(sample.d, kernels.label_components(*sample.kernel_args()))


def size_threshold(d: int, alpha: float) -> int:
    """Smallest integer order >= d^alpha (ceiling convention)."""
    return math.ceil(d**alpha - 1e-9)


@dataclass
class ComponentCensus:
    d: int
    count_by_size: dict[int, int]
    labeling: ComponentLabeling = field(repr=False)

    def vertices_of_order(self, k: int) -> int:
        """|V_k|: vertices lying in components of order exactly k."""
        return k * self.count_by_size.get(k, 0)

    def family(self, alpha: float) -> list[int]:
        """Labels of components of order at least d^alpha."""
        t = size_threshold(self.d, alpha)
        labs, counts = self.labeling._counts
        return labs[counts >= t].tolist()

    def family_below(self, alpha: float) -> list[int]:
        """Labels of components of order less than d^alpha."""
        t = size_threshold(self.d, alpha)
        labs, counts = self.labeling._counts
        return labs[counts < t].tolist()

    def family_volume(self, alpha: float) -> int:
        t = size_threshold(self.d, alpha)
        counts = self.labeling._counts[1]
        return int(counts[counts >= t].sum())

    def membership(self, alpha: float) -> np.ndarray:
        """Boolean mask over Q^d of vertices inside V(M_alpha)."""
        big = np.zeros(int(self.labeling.label.max()) + 1, dtype=bool)
        big[self.family(alpha)] = True
        return big[self.labeling.label]


def census(labeling: ComponentLabeling, d: int | None = None) -> ComponentCensus:
    d = labeling.d if d is None else d
    sizes, multiplicity = np.unique(labeling._counts[1], return_counts=True)
    return ComponentCensus(d, dict(zip(sizes.tolist(), multiplicity.tolist())), labeling)


def bad_vertices(g1_labeling: ComponentLabeling, epsilon: float, d: int | None = None) -> int:
    """Vertices with fewer than epsilon*d cube neighbours in components of order >= d^2."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    d = g1_labeling.d if d is None else d
    in_big = census(g1_labeling, d).membership(2)
    v = np.arange(1 << d, dtype=np.int64)
    good_nbrs = np.zeros(1 << d, dtype=np.int32)
    for i in range(d):
        good_nbrs += in_big[v ^ (1 << i)]
    return int(np.count_nonzero(good_nbrs < epsilon * d))


def longest_bare_path(labeling: ComponentLabeling, sample: PercolationSample) -> BarePathStats:
    """Longest path of the giant whose vertices all have degree 2 (cycles reported apart)."""
    return bare_paths(ComponentGraph.from_sample(sample, labeling.giant_vertices()))
