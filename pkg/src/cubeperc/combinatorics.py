"""Exact small-scale validators: Harper's inequality, tree and forest counts,
weighted tree decomposition, family sparsification and switching concentration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .hypercube import check_dim, harper_bound


class BoundViolation(AssertionError):
    """A counted quantity fell outside the bound it is supposed to satisfy."""


# --- Harper -----------------------------------------------------------------


@dataclass(frozen=True)
class HarperReport:
    d: int
    subsets_checked: int
    violations: int
    min_slack: float
    attaining_set: tuple[int, ...]
    zero_slack_sets: int


def harper_check_exhaustive(d: int) -> HarperReport:
    """Compare every nonempty S in Q^d (d <= 4) against |S|(d - log2|S|)."""
    check_dim(d)
    if d > 4:
        raise ValueError("exhaustive Harper check is limited to d <= 4")
    n = 1 << d
    masks = np.arange(1, 1 << n, dtype=np.int64)
    boundary = np.zeros(len(masks), dtype=np.int64)
    for v in range(n):
        for i in range(d):
            w = v ^ (1 << i)
            if v < w:
                boundary += ((masks >> v) ^ (masks >> w)) & 1
    sizes = np.zeros(len(masks), dtype=np.int64)
    for v in range(n):
        sizes += (masks >> v) & 1
    bound = np.array([harper_bound(s, d) for s in range(1, n + 1)])[sizes - 1]
    slack = boundary - bound
    tol = 1e-9
    worst = int(np.argmin(slack))
    attaining = tuple(v for v in range(n) if masks[worst] >> v & 1)
    return HarperReport(
        d=d,
        subsets_checked=len(masks),
        violations=int(np.count_nonzero(slack < -tol)),
        min_slack=float(max(slack[worst], 0.0) if abs(slack[worst]) < tol else slack[worst]),
        attaining_set=attaining,
        zero_slack_sets=int(np.count_nonzero(np.abs(slack) < tol)),
    )


# --- trees and forests ------------------------------------------------------


def _count_forests(d: int, roots: Sequence[int], k: int) -> int:
    """k-edge forests of Q^d containing ``roots`` whose every tree meets ``roots``.

    Branches on the smallest admissible edge touching the current forest:
    either it is in the final forest or it is excluded for good.
    """
    parent: dict[int, int] = {r: r for r in roots}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    chosen: set[tuple[int, int]] = set()
    excluded: set[tuple[int, int]] = set()

    def next_edge():
        best = None
        for v in parent:
            for i in range(d):
                w = v ^ (1 << i)
                e = (min(v, w), max(v, w))
                if e in chosen or e in excluded:
                    continue
                if w in parent and find(v) == find(w):
                    continue
                if best is None or e < best:
                    best = e
        return best

    def rec(remaining: int) -> int:
        if remaining == 0:
            return 1
        e = next_edge()
        if e is None:
            return 0
        a, b = e
        # include e
        added = [x for x in (a, b) if x not in parent]
        for x in added:
            parent[x] = x
        ra, rb = find(a), find(b)
        parent[rb] = ra
        chosen.add(e)
        total = rec(remaining - 1)
        chosen.discard(e)
        parent[rb] = rb
        for x in added:
            del parent[x]
        # exclude e
        excluded.add(e)
        total += rec(remaining)
        excluded.discard(e)
        return total

    return rec(k)


def subtree_bounds(d: int, k: int) -> tuple[float, float]:
    """Lower and upper bounds on the number of k-vertex subtrees rooted at a vertex
    of a d-regular graph. The lower bound is only meaningful for k <= d; past that
    it is reported as 0."""
    lower = k ** (k - 2) * max(d - k, 0) ** (k - 1) / math.factorial(k - 1)
    upper = k ** (k - 2) * d ** (k - 1) / math.factorial(k - 1)
    return lower, upper


def count_rooted_subtrees(d: int, v: int, k: int) -> int:
    """Exact number of k-vertex subtrees of Q^d that contain v."""
    check_dim(d)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > 6 or d > 4:
        raise ValueError("exhaustive subtree count is limited to k <= 6, d <= 4")
    count = _count_forests(d, [v], k - 1)
    lo, hi = subtree_bounds(d, k)
    if not lo - 1e-9 <= count <= hi + 1e-9:
        raise BoundViolation(f"t(v,{k}) = {count} outside [{lo}, {hi}] in Q^{d}")
    return count


def forest_bound(ell: int, k: int, d: int) -> float:
    return (ell + k) ** k * d**k / math.factorial(k)


def count_forests(d: int, roots: Iterable[int], k: int) -> int:
    """Exact number of k-edge forests F with roots in V(F) and every tree touching roots."""
    check_dim(d)
    roots = sorted(set(roots))
    if not roots:
        raise ValueError("roots must be nonempty")
    if d > 3 or len(roots) > 2 or k > 4:
        raise ValueError("exhaustive forest count is limited to d <= 3, |U| <= 2, k <= 4")
    count = _count_forests(d, roots, k)
    bound = forest_bound(len(roots), k, d)
    if count > bound + 1e-9:
        raise BoundViolation(f"{count} forests exceed the bound {bound}")
    return count


# --- weighted tree decomposition --------------------------------------------


@dataclass
class WeightedTree:
    adjacency: dict[int, list[int]]
    weight: dict[int, float]

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], weight: dict[int, float]) -> "WeightedTree":
        adj: dict[int, list[int]] = {v: [] for v in weight}
        for a, b in edges:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        return cls(adj, dict(weight))

    @property
    def max_degree(self) -> int:
        return max((len(n) for n in self.adjacency.values()), default=0)

    def total(self, verts: Iterable[int] | None = None) -> float:
        verts = self.adjacency if verts is None else verts
        return sum(self.weight[v] for v in verts)

    def is_tree(self) -> bool:
        n_edges = sum(len(a) for a in self.adjacency.values()) // 2
        return n_edges == len(self.adjacency) - 1 and self.connected(self.adjacency)

    def connected(self, verts: Iterable[int]) -> bool:
        verts = set(verts)
        if not verts:
            return False
        start = next(iter(verts))
        seen, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if w in verts and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == verts


def decompose_weighted_tree(tree: WeightedTree, m0: float, max_degree: int | None = None) -> list[list[int]]:
    """Split a tree into vertex-disjoint subtrees each of weight in [m0, (Delta+1) m0].

    Post-order sweep: a vertex's residual is its weight plus the residuals of
    its undetached children; once that reaches m0 the vertex and its
    undetached descendants are cut off as a part. A light leftover at the root
    is glued to an adjacent part.
    """
    delta = tree.max_degree if max_degree is None else max_degree
    if tree.max_degree > delta:
        raise ValueError(f"tree has degree {tree.max_degree} > {delta}")
    if not tree.is_tree():
        raise ValueError("input is not a tree")
    if any(not 0 < w <= m0 for w in tree.weight.values()):
        raise ValueError("weights must lie in (0, m0]")
    if tree.total() < m0:
        raise ValueError("total weight is below m0")

    root = min(tree.adjacency)
    order, parent = [], {root: None}
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for w in tree.adjacency[u]:
            if w not in parent:
                parent[w] = u
                stack.append(w)

    pending: dict[int, list[int]] = {}
    residual: dict[int, float] = {}
    part_of: dict[int, int] = {}
    parts: list[list[int]] = []
    for u in reversed(order):
        group = [u]
        r = tree.weight[u]
        for w in tree.adjacency[u]:
            if parent.get(w) == u and w not in part_of:
                group += pending.pop(w)
                r += residual.pop(w)
        if r >= m0:
            for x in group:
                part_of[x] = len(parts)
            parts.append(group)
        else:
            pending[u] = group
            residual[u] = r
    if root in pending:
        leftover = pending.pop(root)
        target = next(part_of[w] for x in leftover for w in tree.adjacency[x] if w in part_of)
        parts[target] += leftover

    _check_decomposition(tree, parts, m0, (delta + 1) * m0)
    return parts


def _check_decomposition(tree: WeightedTree, parts: list[list[int]], lo: float, hi: float) -> None:
    flat = [v for p in parts for v in p]
    if len(flat) != len(set(flat)) or set(flat) != set(tree.adjacency):
        raise BoundViolation("parts do not partition the tree")
    for p in parts:
        w = tree.total(p)
        if not lo - 1e-9 <= w <= hi + 1e-9:
            raise BoundViolation(f"part weight {w} outside [{lo}, {hi}]")
        if not tree.connected(p):
            raise BoundViolation("part is not connected")


# --- sparsification ---------------------------------------------------------


class SparsificationFailed(RuntimeError):
    pass


@dataclass
class DisjointSetFamily:
    d: int
    sets: list[frozenset[int]]

    def __post_init__(self):
        self.sets = [frozenset(s) for s in self.sets]
        seen: set[int] = set()
        for s in self.sets:
            if seen & s:
                raise ValueError("member sets must be pairwise disjoint")
            seen |= s

    @property
    def volume(self) -> int:
        return sum(len(s) for s in self.sets)

    def _owner(self) -> np.ndarray:
        owner = np.full(1 << self.d, -1, dtype=np.int64)
        for i, s in enumerate(self.sets):
            owner[list(s)] = i
        return owner

    def _edge_classes(self) -> tuple[int, int]:
        owner = self._owner()
        v = np.arange(1 << self.d, dtype=np.int64)
        e_out = e_in = 0
        for i in range(self.d):
            lower = v[(v >> i) & 1 == 0]
            a, b = owner[lower], owner[lower | (1 << i)]
            e_out += int(np.count_nonzero((a >= 0) != (b >= 0)))
            e_in += int(np.count_nonzero((a >= 0) & (b >= 0) & (a != b)))
        return e_out, e_in

    @property
    def e_out(self) -> int:
        """Edges with exactly one endpoint in the union of the family."""
        return self._edge_classes()[0]

    @property
    def e_in(self) -> int:
        """Edges joining two different member sets."""
        return self._edge_classes()[1]

    def boundary_sum(self) -> int:
        """Sum over members of their own edge boundary in Q^d."""
        from .hypercube import edge_boundary

        return sum(edge_boundary(s, self.d) for s in self.sets)


def sparsify_family(
    family: DisjointSetFamily,
    epsilon: float,
    seed: int,
    *,
    retries: int = 100,
    min_volume: int = 1,
    keep_rate: float | None = None,
) -> DisjointSetFamily:
    """Random subfamily C' with v(C') >= eps v(C) and e_out(C') >= (1 - 2 eps) d v(C').

    Each member is kept independently with probability ``keep_rate``
    (default 1.5 eps, clipped to 1); the first draw meeting both inequalities
    is returned. Failure means the instance is outside the regime where the
    construction works and is raised, not hidden.
    """
    if not family.sets:
        raise ValueError("empty family")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    d = family.d
    if family.volume < min_volume:
        raise SparsificationFailed(f"volume {family.volume} below the configured floor {min_volume}")
    if max(len(s) for s in family.sets) > d**10:
        raise ValueError("member sets must have size at most d^10")
    rate = min(1.5 * epsilon if keep_rate is None else keep_rate, 1.0)
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        keep = rng.random(len(family.sets)) < rate
        sub = DisjointSetFamily(d, [s for s, k in zip(family.sets, keep) if k])
        vol = sub.volume
        if vol == 0 or vol < epsilon * family.volume:
            continue
        if sub.e_out >= (1 - 2 * epsilon) * d * vol:
            return sub
    raise SparsificationFailed(f"no valid subfamily in {retries} draws (d={d}, eps={epsilon})")


def sparsification_feasibility(
    family: DisjointSetFamily, epsilons, seed: int, *, retries: int = 100
) -> dict[float, bool]:
    """Whether sparsify_family succeeds at each epsilon; maps out where the construction stops working."""
    out = {}
    for eps in epsilons:
        try:
            sparsify_family(family, float(eps), seed, retries=retries)
            out[float(eps)] = True
        except SparsificationFailed:
            out[float(eps)] = False
    return out


# --- switchings -------------------------------------------------------------


def sample_sequences(d: int, k: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform rows of S_d(k): each symbol 0..d-1 exactly k times (Fisher-Yates per row)."""
    base = np.repeat(np.arange(d, dtype=np.int64), k)
    return rng.permuted(np.tile(base, (trials, 1)), axis=1)


@dataclass(frozen=True)
class DistinctInPrefix:
    """Number of distinct symbols among the first ``length`` positions."""

    d: int
    length: int
    lipschitz: float = 1.0

    def __call__(self, seqs: np.ndarray) -> np.ndarray:
        rows = np.repeat(np.arange(len(seqs)), self.length)
        hit = np.zeros((len(seqs), self.d), dtype=bool)
        hit[rows, seqs[:, : self.length].ravel()] = True
        return hit.sum(axis=1).astype(np.float64)


@dataclass(frozen=True)
class SingletonsInWindow:
    """Symbols occurring exactly once in positions [start, start + length)."""

    d: int
    start: int
    length: int
    lipschitz: float = 2.0

    def __call__(self, seqs: np.ndarray) -> np.ndarray:
        win = seqs[:, self.start : self.start + self.length]
        keys = (np.arange(len(seqs))[:, None] * self.d + win).ravel()
        counts = np.bincount(keys, minlength=len(seqs) * self.d).reshape(len(seqs), self.d)
        return (counts == 1).sum(axis=1).astype(np.float64)


@dataclass(frozen=True)
class Constant:
    value: float = 0.0
    lipschitz: float = 0.0

    def __call__(self, seqs: np.ndarray) -> np.ndarray:
        return np.full(len(seqs), self.value)


class LipschitzCertificateFailed(RuntimeError):
    pass


def certify_lipschitz(f: Callable, c_lip: float, d: int, k: int, rng: np.random.Generator, switches: int = 10**4) -> float:
    """Largest |f change| over random single switchings; raises if it exceeds c_lip."""
    seqs = sample_sequences(d, k, switches, rng)
    i = rng.integers(0, k * d, switches)
    j = rng.integers(0, k * d, switches)
    swapped = seqs.copy()
    rows = np.arange(switches)
    swapped[rows, i], swapped[rows, j] = seqs[rows, j], seqs[rows, i]
    jump = float(np.max(np.abs(f(swapped) - f(seqs))))
    if jump > c_lip + 1e-12:
        raise LipschitzCertificateFailed(f"observed jump {jump} exceeds claimed constant {c_lip}")
    return jump


@dataclass(frozen=True)
class SwitchingReport:
    mean: float
    std: float
    t: float
    tail: float
    stderr: float
    bound: float
    max_jump: float

    @property
    def passed(self) -> bool:
        return self.tail <= self.bound + 3 * self.stderr


def mc_switching_concentration(
    f: Callable, c_lip: float, k: int, d: int, t: float | None, trials: int, seed: int, *, t_sigmas: float = 2.0
) -> SwitchingReport:
    """Empirical P(|f - E f| >= t) over uniform S_d(k) against 2 exp(-t^2 / (2 c^2 k d)).

    ``f`` maps an (n, kd) integer array to n values. With ``t=None`` the
    deviation is set to ``t_sigmas`` sample standard deviations.
    """
    rng = np.random.default_rng(seed)
    jump = certify_lipschitz(f, c_lip, d, k, rng)
    vals = f(sample_sequences(d, k, trials, rng))
    mean, std = float(vals.mean()), float(vals.std())
    if t is None:
        t = t_sigmas * std
    tail = float(np.mean(np.abs(vals - mean) >= t)) if t > 0 else 1.0
    stderr = math.sqrt(tail * (1 - tail) / trials)
    bound = 2 * math.exp(-(t**2) / (2 * c_lip**2 * k * d)) if c_lip > 0 else 0.0
    return SwitchingReport(mean, std, t, tail, stderr, bound, jump)
