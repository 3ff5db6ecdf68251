"""Lazy simple random walk on a component, with mixing, conductance and expansion estimates."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .graph import ComponentGraph

log = logging.getLogger(__name__)

MONOTONE_TOL = 1e-12
DRIFT_LIMIT = 1e-9


class WalkError(RuntimeError):
    pass


@dataclass(frozen=True)
class WalkDistribution:
    probs: np.ndarray
    t: int = 0

    def __post_init__(self):
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError("not a probability vector")


def _check_graph(g: ComponentGraph) -> None:
    if g.m == 0:
        raise ValueError("empty graph")
    if g.m > 1 and np.any(g.degrees == 0):
        raise ValueError("graph has isolated vertices")


def stationary(g: ComponentGraph) -> WalkDistribution:
    _check_graph(g)
    if g.m == 1:
        return WalkDistribution(np.ones(1))
    deg = g.degrees.astype(np.float64)
    return WalkDistribution(deg / deg.sum())


def _inv2deg(g: ComponentGraph) -> np.ndarray:
    return 1.0 / (2.0 * np.maximum(g.degrees, 1).astype(np.float64))


def lazy_step(g: ComponentGraph, mu: WalkDistribution) -> WalkDistribution:
    """nu(v) = mu(v)/2 + sum over neighbours u of mu(u) / (2 deg u)."""
    if len(mu.probs) != g.m:
        raise ValueError("distribution size does not match the graph")
    out = kernels.lazy_step(g.indptr, g.indices, _inv2deg(g), mu.probs.reshape(-1, 1).astype(np.float64))
    return WalkDistribution(out[:, 0], mu.t + 1)


def tv_distance(mu, nu) -> float:
    a = mu.probs if isinstance(mu, WalkDistribution) else np.asarray(mu, dtype=np.float64)
    b = nu.probs if isinstance(nu, WalkDistribution) else np.asarray(nu, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"size mismatch: {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


@dataclass
class MixingEstimate:
    """t_mix over the sampled starts only, hence a lower bound on the true value."""

    t_mix: int | None
    starts: np.ndarray
    curves: np.ndarray  # curves[s, t] = TV(P^t(start_s, .), pi)
    drift: float
    threshold: float

    @property
    def mixed(self) -> bool:
        return self.t_mix is not None

    @property
    def not_mixed(self) -> bool:
        return self.t_mix is None


def sample_starts(g: ComponentGraph, k: int, seed: int, strategy: str = "peripheral") -> np.ndarray:
    """Start vertices for estimate_mixing.

    "uniform" draws k distinct vertices. "peripheral" chains BFS sweeps, each
    start being a random farthest vertex from the previous one; these are the
    slow starts, so the estimate sits closer to the max over all starts.
    """
    rng = np.random.default_rng(seed)
    k = min(k, g.m)
    if strategy == "uniform":
        return np.sort(rng.choice(g.m, k, replace=False))
    if strategy != "peripheral":
        raise ValueError(f"unknown start strategy {strategy!r}")
    starts: list[int] = []
    src = int(rng.integers(g.m))
    for _ in range(k):
        dist = g.bfs(src)
        src = int(rng.choice(np.flatnonzero(dist == dist.max())))
        starts.append(src)
    return np.unique(starts)


def estimate_mixing(g: ComponentGraph, starts, t_max: int, threshold: float = 0.25) -> MixingEstimate:
    """Evolve point masses at ``starts`` (compact indices) until every one is within ``threshold`` of pi."""
    _check_graph(g)
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    starts = np.atleast_1d(np.asarray(starts, dtype=np.int64))
    if len(starts) == 0 or starts.min() < 0 or starts.max() >= g.m:
        raise ValueError("start vertices must be compact indices of the graph")
    pi = stationary(g).probs
    mu = np.zeros((g.m, len(starts)))
    mu[starts, np.arange(len(starts))] = 1.0
    inv2deg = _inv2deg(g)
    curves = [0.5 * np.abs(mu - pi[:, None]).sum(axis=0)]
    drift = 0.0
    t_mix = 0 if curves[0].max() <= threshold else None
    t = 0
    while t_mix is None and t < t_max:
        mu = kernels.lazy_step(g.indptr, g.indices, inv2deg, mu)
        mass = mu.sum(axis=0)
        drift += float(np.abs(mass - 1.0).max())
        mu /= mass
        t += 1
        tv = 0.5 * np.abs(mu - pi[:, None]).sum(axis=0)
        if np.any(tv > curves[-1] + MONOTONE_TOL):
            raise WalkError(f"total variation increased at step {t}")
        curves.append(tv)
        if tv.max() <= threshold:
            t_mix = t
    if drift > DRIFT_LIMIT:
        log.warning("cumulative mass drift %.3g exceeds %.0e", drift, DRIFT_LIMIT)
    else:
        log.debug("cumulative mass drift %.3g over %d steps", drift, t)
    return MixingEstimate(t_mix, starts, np.array(curves).T, drift, threshold)


# --- conductance ------------------------------------------------------------


@dataclass(frozen=True)
class ConductanceReport:
    size: int
    internal: int  # e(S)
    cut: int  # e(S, V \ S)
    edges: int  # e(G)

    @property
    def volume(self) -> int:
        return 2 * self.internal + self.cut

    @property
    def pi_S(self) -> float:
        return self.volume / (2 * self.edges)

    @property
    def Q_S(self) -> float:
        return self.cut / (4 * self.edges)

    @property
    def phi_exact(self) -> Fraction:
        # Q / (pi(S) pi(S^c)) = cut * e(G) / (vol S * vol S^c)
        return Fraction(self.cut * self.edges, self.volume * (2 * self.edges - self.volume))

    @property
    def phi_S(self) -> float:
        return float(self.phi_exact)


def _mask(g: ComponentGraph, S) -> np.ndarray:
    S = np.asarray(S)
    if S.dtype == bool:
        if S.shape != (g.m,):
            raise ValueError("mask size does not match the graph")
        return S
    mask = np.zeros(g.m, dtype=bool)
    mask[S.astype(np.int64)] = True
    return mask


def conductance(g: ComponentGraph, S) -> ConductanceReport:
    """Phi(S) from integer edge counts; S is a boolean mask or compact indices."""
    mask = _mask(g, S)
    size = int(mask.sum())
    if size == 0 or size == g.m:
        raise ValueError("S must be a nonempty proper subset")
    return ConductanceReport(size, g.internal_edges(mask), g.boundary(mask), g.n_edges)


# --- connected-set sampling -------------------------------------------------


def bfs_prefix_order(g: ComponentGraph, start: int, rng: np.random.Generator) -> np.ndarray:
    """Vertices ordered by BFS distance from ``start``, ties broken at random.

    Each vertex past the first has a neighbour one layer closer, hence
    earlier, so every prefix induces a connected set.
    """
    dist = g.bfs(start)
    reach = np.flatnonzero(dist >= 0)
    key = rng.random(len(reach))
    return reach[np.lexsort((key, dist[reach]))]


def prefix_cuts(g: ComponentGraph, order: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """cut[L] and vol[L] of the first L vertices of ``order``, L = 0..len(order)."""
    pos = np.full(g.m, len(order), dtype=np.int64)
    pos[order] = np.arange(len(order))
    rows = g.edge_rows()
    pu, pw = pos[rows], pos[g.indices]
    fwd = pu < pw  # each edge once, oriented by position
    diff = np.zeros(len(order) + 2, dtype=np.int64)
    np.add.at(diff, pu[fwd] + 1, 1)
    np.add.at(diff, np.minimum(pw[fwd], len(order)) + 1, -1)
    cut = np.cumsum(diff)[: len(order) + 1]
    vol = np.zeros(len(order) + 1, dtype=np.int64)
    np.cumsum(g.degrees[order], out=vol[1:])
    return cut, vol


def _phi_from_counts(cut, vol, edges) -> np.ndarray:
    other = 2 * edges - vol
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where((vol > 0) & (other > 0), cut * float(edges) / (vol.astype(np.float64) * other), np.inf)


@dataclass
class PhiProfile:
    scales: dict[int, float]
    landed: dict[int, int]
    sweep: dict[int, float] = field(default_factory=dict)

    @property
    def inverse_square_sum(self) -> float:
        """Sum over scales of Phi(2^-j)^-2; unsampled scales count with Phi = 1."""
        return float(sum(phi**-2 for phi in self.scales.values()))


def n_scales(g: ComponentGraph) -> int:
    pi_min = g.degrees.min() / (2 * g.n_edges)
    return max(1, math.ceil(math.log2(1 / pi_min) - 1e-12))


def _record(best: dict[int, float], landed: dict[int, int] | None, pis, phis, J: int) -> None:
    for j in range(1, J + 1):
        hit = (pis >= 2.0 ** (-j - 1)) & (pis <= 2.0**-j)
        if hit.any():
            best[j] = min(best.get(j, 1.0), float(phis[hit].min()))
            if landed is not None:
                landed[j] += 1


def second_eigvec(g: ComponentGraph, iters: int | None = None, seed: int = 0) -> np.ndarray:
    """Power iteration for the slowest nontrivial mode of the lazy walk."""
    pi = stationary(g).probs
    deg = g.degrees.astype(np.float64)
    inv = _inv2deg(g)
    x = np.random.default_rng(seed).standard_normal(g.m)
    iters = iters or max(200, 4 * int(math.sqrt(g.m)))
    for _ in range(iters):
        x -= (pi * x).sum()
        # right action of the lazy kernel on functions: (Pf)(v) = f(v)/2 + mean_nbrs f / 2
        y = kernels.lazy_step(g.indptr, g.indices, inv, (x * deg).reshape(-1, 1))[:, 0] / deg
        x = y / max(np.linalg.norm(y), 1e-300)
    return x


def phi_profile(g: ComponentGraph, seed: int, sets_per_scale: int = 16, sweep_limit: int = 10**5) -> PhiProfile:
    """Sampled minimum of Phi over connected sets at each dyadic stationary-mass scale.

    Sampling can only miss bad sets, so each recorded Phi is at least the
    true Phi(rho) and the reported sum is at most the true sum.
    """
    _check_graph(g)
    J = n_scales(g)
    best: dict[int, float] = {}
    landed = {j: 0 for j in range(1, J + 1)}
    rng = np.random.default_rng(seed)
    E = g.n_edges
    for start in rng.integers(0, g.m, sets_per_scale):
        order = bfs_prefix_order(g, int(start), rng)
        cut, vol = prefix_cuts(g, order)
        _record(best, landed, vol / (2 * E), _phi_from_counts(cut, vol, E), J)
    scales = {j: best.get(j, 1.0) for j in range(1, J + 1)}
    sweep: dict[int, float] = {}
    if 2 < g.m <= sweep_limit:
        order = np.argsort(second_eigvec(g, seed=seed), kind="stable")
        cut, vol = prefix_cuts(g, order)
        phis = _phi_from_counts(cut, vol, E)
        pis = vol / (2 * E)
        small = np.minimum(pis, 1 - pis)  # Phi(S) = Phi(S^c)
        _record(sweep, None, small, phis, J)
    return PhiProfile(scales, landed, sweep)


# --- expansion --------------------------------------------------------------


@dataclass
class ExpansionReport:
    per_size: dict[int, float]
    large: dict[int, float]
    skipped: list[int]

    @property
    def global_min(self) -> float:
        vals = list(self.per_size.values()) + list(self.large.values())
        return min(vals) if vals else math.inf


def expansion_scan(
    g: ComponentGraph,
    d: int,
    sizes,
    sets_per_size: int,
    seed: int,
    *,
    large_delta: float | None = 0.1,
    large_points: int = 4,
) -> ExpansionReport:
    """Empirical min of d e(S, V\\S)/|S| over sampled sets of the given sizes.

    Small sets are connected BFS prefixes. The large-set pass draws sizes in
    [delta m, (1 - delta) m] and uses both complements of BFS prefixes and
    uniformly random subsets. Sizes above m/2 are skipped for the small pass.
    """
    _check_graph(g)
    rng = np.random.default_rng(seed)
    sizes = sorted({int(s) for s in sizes})
    ok = [s for s in sizes if 1 <= s <= g.m // 2]
    skipped = [s for s in sizes if s not in ok]
    per_size = {s: math.inf for s in ok}
    for _ in range(sets_per_size):
        order = bfs_prefix_order(g, int(rng.integers(g.m)), rng)
        cut, _ = prefix_cuts(g, order)
        for s in ok:
            per_size[s] = min(per_size[s], d * cut[s] / s)
    large: dict[int, float] = {}
    if large_delta is not None and g.m >= 4:
        lo, hi = math.ceil(large_delta * g.m), math.floor((1 - large_delta) * g.m)
        targets = sorted({int(x) for x in np.linspace(lo, hi, large_points)} - {0, g.m})
        for s in targets:
            vals = []
            for _ in range(sets_per_size):
                order = bfs_prefix_order(g, int(rng.integers(g.m)), rng)
                cut, _ = prefix_cuts(g, order)
                vals.append(d * cut[g.m - s] / s)  # S = complement of a BFS prefix
                mask = np.zeros(g.m, dtype=bool)
                mask[rng.choice(g.m, s, replace=False)] = True
                vals.append(d * g.boundary(mask) / s)
            large[s] = min(vals)
    return ExpansionReport(per_size, large, skipped)
