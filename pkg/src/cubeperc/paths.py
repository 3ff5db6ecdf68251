"""Distances and diameter in Q^d_p; tame antipodal paths and waypoint chains."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import binomtest

from . import kernels
from .components import ComponentLabeling
from .graph import ComponentGraph
from .hypercube import all_ones, check_dim, check_vertex, hamming
from .percolation import EdgeId, PercolationSample
from .seeds import derive_seed


class _Unreachable:
    def __repr__(self):
        return "UNREACHABLE"

    def __bool__(self):
        return False


UNREACHABLE = _Unreachable()


def shortest_path(sample: PercolationSample, u: int, v: int, cap: int | None = None) -> list[int] | None:
    """Vertices of a shortest open u-v path, or None past ``cap`` or across components."""
    check_vertex(u, sample.d)
    check_vertex(v, sample.d)
    return kernels.oracle_distance(*sample.kernel_args(), u, v, -1 if cap is None else cap)


def bfs_distance(sample: PercolationSample, u: int, v: int, cap: int | None = None):
    path = shortest_path(sample, u, v, cap)
    return UNREACHABLE if path is None else len(path) - 1


# --- diameter ---------------------------------------------------------------

EXACT_LIMIT = 40000


@dataclass(frozen=True)
class DiameterReport:
    exact: int | None
    lower_bound: int
    ecc_samples: tuple[int, ...]
    method: str  # "exact" or "double-sweep"

    @property
    def approximate(self) -> bool:
        return self.exact is None

    @property
    def value(self) -> int:
        return self.lower_bound if self.exact is None else self.exact


def graph_diameter(
    g: ComponentGraph, exact_limit: int = EXACT_LIMIT, rounds: int = 20, n_ecc: int = 64, seed: int = 0
) -> DiameterReport:
    """Iterated double sweep and sampled eccentricities always; all-pairs BFS when m <= exact_limit."""
    if g.m == 0:
        raise ValueError("empty graph")
    rng = np.random.default_rng(seed)
    lb = 0
    src = int(rng.integers(g.m))
    for _ in range(rounds):
        dist = g.bfs(src)
        lb = max(lb, int(dist.max()))
        src = int(rng.choice(np.flatnonzero(dist == dist.max())))
    ecc = g.eccentricities(rng.choice(g.m, min(n_ecc, g.m), replace=False))
    lb = max(lb, int(ecc.max()))
    exact = None
    if g.m <= exact_limit:
        exact = int(g.eccentricities(np.arange(g.m)).max())
    return DiameterReport(exact, lb, tuple(int(e) for e in ecc), "exact" if exact is not None else "double-sweep")


def diameter(
    labeling: ComponentLabeling, sample: PercolationSample, exact_limit: int = EXACT_LIMIT, seed: int = 0
) -> DiameterReport:
    return graph_diameter(ComponentGraph.from_sample(sample, labeling.giant_vertices()), exact_limit, seed=seed)


# --- paths and words --------------------------------------------------------


class PathFamilyError(ValueError):
    def __init__(self, msg: str, witness=None):
        super().__init__(msg)
        self.witness = witness


@dataclass(frozen=True)
class CubePath:
    vertices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        for i, (a, b) in enumerate(zip(self.vertices, self.vertices[1:])):
            if hamming(a, b) != 1:
                raise PathFamilyError(f"steps {i} and {i + 1} are not adjacent", (a, b))
        seen: dict[int, int] = {}
        for i, v in enumerate(self.vertices):
            if v in seen:
                raise PathFamilyError(f"vertex {v} repeats at positions {seen[v]} and {i}", (seen[v], i))
            seen[v] = i

    def __len__(self):
        return len(self.vertices) - 1

    @property
    def edges(self) -> list[EdgeId]:
        return [EdgeId.between(a, b) for a, b in zip(self.vertices, self.vertices[1:])]


@dataclass(frozen=True)
class PathWord:
    """Flipped coordinate per step, 1-based."""

    d: int
    word: tuple[int, ...]

    def __post_init__(self):
        if any(not 1 <= s <= self.d for s in self.word):
            raise ValueError(f"symbols must lie in 1..{self.d}")

    @property
    def multiplicity(self) -> Counter:
        return Counter(self.word)

    @property
    def k(self) -> int | None:
        """Common multiplicity if every symbol occurs equally often, else None."""
        mult = self.multiplicity
        counts = {mult.get(s, 0) for s in range(1, self.d + 1)}
        return counts.pop() if len(counts) == 1 else None


def phi_encode(path: CubePath, d: int) -> PathWord:
    return PathWord(d, tuple((a ^ b).bit_length() for a, b in zip(path.vertices, path.vertices[1:])))


@dataclass(frozen=True)
class DecodedWalk:
    vertices: tuple[int, ...]
    first_repeat: int | None  # index of the first revisited vertex

    @property
    def is_path(self) -> bool:
        return self.first_repeat is None

    def path(self) -> CubePath:
        return CubePath(self.vertices)


def phi_decode(word: PathWord | Sequence[int], start: int = 0) -> DecodedWalk:
    symbols = word.word if isinstance(word, PathWord) else tuple(word)
    verts = [start]
    seen = {start}
    repeat = None
    for i, s in enumerate(symbols, 1):
        nxt = verts[-1] ^ (1 << (s - 1))
        if repeat is None and nxt in seen:
            repeat = i
        seen.add(nxt)
        verts.append(nxt)
    return DecodedWalk(tuple(verts), repeat)


@dataclass(frozen=True)
class TameVerdict:
    tame: bool
    witness: tuple | None = None  # ("P1", i, j) or ("P2", start, length)

    def __bool__(self):
        return self.tame


def _p1_witness(vertices: Sequence[int], d: int) -> tuple | None:
    pos = {v: i for i, v in enumerate(vertices)}
    for i, v in enumerate(vertices):
        for j in range(d):
            w = pos.get(v ^ (1 << j))
            if w is not None and w > i + 1:
                return ("P1", i, w)
    return None


def _p2_witness(word: Sequence[int], d: int, k: int) -> tuple | None:
    for ell in range(1, d // k**3 + 1):
        for s in range(len(word) - ell + 1):
            window = Counter(word[s : s + ell])
            if 2 * sum(1 for c in window.values() if c == 1) < ell:
                return ("P2", s, ell)
    return None


def is_tame(path: CubePath, k: int, d: int) -> TameVerdict:
    check_dim(d)
    w = phi_encode(path, d)
    if w.k != k:
        raise PathFamilyError(f"path does not use every coordinate exactly {k} times", dict(w.multiplicity))
    witness = _p1_witness(path.vertices, d) or _p2_witness(w.word, d, k)
    return TameVerdict(witness is None, witness)


def sequence_count(d: int, k: int) -> int:
    """|S_d(k)| = (kd)! / (k!)^d, exact."""
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    return math.factorial(k * d) // math.factorial(k) ** d


def log_sequence_count(d: int, k: int) -> float:
    return float(gammaln(k * d + 1) - d * gammaln(k + 1))


@dataclass(frozen=True)
class TameCount:
    d: int
    k: int
    paths: int  # |P_d(k)|
    tame: int  # |P'_d(k)|

    @property
    def upper_bound(self) -> int:
        return sequence_count(self.d, self.k)

    @property
    def lower_bound(self) -> float:
        return self.k**-40 * self.upper_bound


ENUM_LIMIT = 5 * 10**6


def enumerate_tame(d: int, k: int) -> TameCount:
    """Depth-first count of 0 -> 1 paths using each coordinate k times, and of the tame ones."""
    check_dim(d)
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    if k * d > 14 or sequence_count(d, k) > ENUM_LIMIT:
        raise ValueError(f"enumeration of P_{d}({k}) is infeasible here")
    L = k * d
    left = [k] * d
    pos = {0: 0}
    word: list[int] = []
    paths = tame = 0

    def rec(v: int, p1_bad: int) -> None:
        nonlocal paths, tame
        t = len(word)
        if t == L:
            paths += 1
            if not p1_bad and _p2_witness(word, d, k) is None:
                tame += 1
            return
        for j in range(d):
            if not left[j]:
                continue
            x = v ^ (1 << j)
            if x in pos:
                continue
            bad = p1_bad
            if not bad:
                for i in range(d):
                    q = pos.get(x ^ (1 << i))
                    if q is not None and q < t:
                        bad = 1
                        break
            left[j] -= 1
            pos[x] = t + 1
            word.append(j + 1)
            rec(x, bad)
            word.pop()
            del pos[x]
            left[j] += 1

    rec(0, 0)
    result = TameCount(d, k, paths, tame)
    if not result.tame <= result.paths <= result.upper_bound:
        raise AssertionError(f"counting chain broken: {result}")
    return result


# --- waypoint chain ---------------------------------------------------------


def chain_waypoints(u: int, v: int, epsilon: float, d: int) -> list[int]:
    """u = x_0, ..., x_s = v with consecutive vertices differing in >= ceil((1 - eps/2) d) coordinates.

    Each step complements the current vertex and then flips back a chunk of
    at most r = d - ceil((1 - eps/2) d) coordinates. An even number of steps
    must flip exactly the coordinates where u and v differ; an odd number the
    ones where they agree. The shorter of the two options is used.
    """
    check_dim(d)
    check_vertex(u, d)
    check_vertex(v, d)
    if not 0 < epsilon < 1 or epsilon * d < 4:
        raise ValueError("need 0 < epsilon < 1 and epsilon * d >= 4")
    need = math.ceil((1 - epsilon / 2) * d - 1e-9)
    r = d - need
    diff = u ^ v
    h = diff.bit_count()
    s_even = max(2, math.ceil(h / r))
    s_even += s_even % 2
    s_odd = math.ceil((d - h) / r)
    s_odd += 1 - s_odd % 2
    if s_odd < s_even:
        s, target = s_odd, all_ones(d) & ~diff
    else:
        s, target = s_even, diff
    bits = [i for i in range(d) if target >> i & 1]
    chunks = [bits[t * r : (t + 1) * r] for t in range(s)]
    full = all_ones(d)
    out = [u]
    for ch in chunks:
        out.append(out[-1] ^ full ^ sum(1 << i for i in ch))
    if out[-1] != v:
        raise AssertionError("chain does not end at v")
    if any(hamming(a, b) < need for a, b in zip(out, out[1:])):
        raise AssertionError("consecutive waypoints too close")
    return out


# --- antipodal connection ---------------------------------------------------


@dataclass
class AntipodalResult:
    d: int
    c: float
    k1: float
    trials: int
    successes: int
    ci: tuple[float, float]
    seeds: list[int] = field(repr=False)
    paths: dict[int, list[int]] = field(repr=False, default_factory=dict)

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials


def antipodal_experiment(
    d: int, c: float, k1: float, trials: int, seed: int, *, keep_paths: bool = True
) -> AntipodalResult:
    """Fraction of independent Q^d_p samples in which 0 reaches 1 within distance k1 * d."""
    if k1 < 1:
        raise ValueError("K1 must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cap = math.floor(k1 * d)
    target = all_ones(d)
    seeds = [derive_seed(seed, i) for i in range(trials)]
    paths: dict[int, list[int]] = {}
    hits = 0
    for s in seeds:
        path = shortest_path(PercolationSample.make(d, c, s), 0, target, cap)
        if path is not None:
            hits += 1
            if keep_paths:
                paths[s] = path
    ci = binomtest(hits, trials).proportion_ci(method="wilson")
    return AntipodalResult(d, c, k1, trials, hits, (float(ci.low), float(ci.high)), seeds, paths)
