"""Galton-Watson survival and total progeny, exact and simulated."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

DEFAULT_TOL = 1e-12
MAX_ITER = 10**6


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Poisson:
    c: float

    @property
    def mean(self) -> float:
        return self.c

    def pgf(self, q: float) -> float:
        return math.exp(self.c * (q - 1.0))

    def draw_total(self, rng: np.random.Generator, parents):
        """Children of ``parents`` individuals in one generation (sum of iid draws)."""
        return rng.poisson(self.c * np.asarray(parents, dtype=np.float64))

    def tree_log_kernel(self, k) -> np.ndarray:
        # log P(tree) without the shape factor prod 1/xi!, which is shared across c
        k = np.asarray(k, dtype=np.float64)
        return -self.c * k + (k - 1) * math.log(self.c)


@dataclass(frozen=True)
class Binomial:
    n: int
    p: float

    @property
    def mean(self) -> float:
        return self.n * self.p

    def pgf(self, q: float) -> float:
        base = self.p * (q - 1.0)
        if base <= -1.0:
            return 0.0
        return math.exp(self.n * math.log1p(base))

    def draw_total(self, rng: np.random.Generator, parents):
        return rng.binomial(self.n * np.asarray(parents, dtype=np.int64), self.p)

    def tree_log_kernel(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.float64)
        return (k - 1) * math.log(self.p) + (self.n * k - k + 1) * math.log1p(-self.p)


Offspring = Poisson | Binomial


@dataclass(frozen=True)
class SurvivalSolution:
    offspring: Offspring
    extinction: float
    residual: float
    iterations: int

    @property
    def survival(self) -> float:
        return 1.0 - self.extinction


def _smallest_fixed_point(pgf: Callable[[float], float], tol: float, max_iter: int) -> tuple[float, int]:
    # q_{m+1} = f(q_m) from 0 increases to the smallest fixed point in [0, 1]
    q = 0.0
    for it in range(1, max_iter + 1):
        nxt = pgf(q)
        if abs(nxt - q) < tol:
            return nxt, it
        q = nxt
    raise ConvergenceError(f"no convergence to tol={tol} within {max_iter} iterations")


def _solve(offspring: Offspring, tol: float, max_iter: int) -> SurvivalSolution:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if offspring.mean <= 1.0:
        return SurvivalSolution(offspring, 1.0, abs(offspring.pgf(1.0) - 1.0), 0)
    q, it = _smallest_fixed_point(offspring.pgf, tol, max_iter)
    return SurvivalSolution(offspring, q, abs(offspring.pgf(q) - q), it)


def solve_poisson_survival(c: float, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> SurvivalSolution:
    if c <= 0:
        raise ValueError("c must be positive")
    return _solve(Poisson(c), tol, max_iter)


def solve_binomial_survival(n: int, p: float, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> SurvivalSolution:
    if n < 1 or not 0.0 <= p <= 1.0:
        raise ValueError("need n >= 1 and 0 <= p <= 1")
    return _solve(Binomial(n, p), tol, max_iter)


def survival(c: float) -> float:
    """y(c) at the default tolerance."""
    return solve_poisson_survival(c).survival


def log_borel_weight(c: float, k) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    return -c * k + (k - 1) * np.log(c * k) - gammaln(k + 1)


def borel_weight(c: float, k: int) -> float:
    """P(total progeny = k) for a Poisson(c) tree: e^{-ck} (ck)^{k-1} / k!."""
    if c <= 0 or k < 1:
        raise ValueError("need c > 0 and k >= 1")
    return float(np.exp(log_borel_weight(c, k)))


def tail_cutoff(t: int, n: int, c: float) -> int:
    """Order beyond which the Borel tail mass drops below t/(4n)."""
    if c <= 1:
        raise ValueError("cutoff needs c > 1")
    if not 1 <= t <= n:
        raise ValueError(f"need 1 <= t <= n, got t={t}, n={n}")
    a = math.e * c * math.exp(-c)
    return math.ceil(math.log(4 * n / (t * (1 - a))) / -math.log(a))


class _CapSurvived:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "CAP_SURVIVED"


CAP_SURVIVED = _CapSurvived()


def gw_sample(offspring: Offspring, size_cap: int, seed: int) -> int | _CapSurvived:
    """Total progeny of one tree, or CAP_SURVIVED once more than size_cap vertices appear."""
    if size_cap < 1:
        raise ValueError("size_cap must be >= 1")
    rng = np.random.default_rng(seed)
    settled, alive = 0, 1
    while alive:
        settled += alive
        alive = int(offspring.draw_total(rng, alive))
        if settled + alive > size_cap:
            return CAP_SURVIVED
    return settled


@dataclass
class ProgenyStatistics:
    offspring: Offspring
    trials: int
    size_cap: int
    histogram: np.ndarray  # histogram[k] = trees with total progeny exactly k (index 0 unused)
    survived_cap: int

    def frequency(self, k: int) -> float:
        return self.histogram[k] / self.trials

    @property
    def survival_frequency(self) -> float:
        return self.survived_cap / self.trials


def _simulate(offspring: Offspring, size_cap: int, trials: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    settled = np.zeros(trials, dtype=np.int64)
    alive = np.ones(trials, dtype=np.int64)
    active = np.arange(trials)
    hist = np.zeros(size_cap + 1, dtype=np.int64)
    survived = 0
    while len(active):
        settled[active] += alive[active]
        kids = offspring.draw_total(rng, alive[active]).astype(np.int64)
        over = settled[active] + kids > size_cap
        dead = (kids == 0) & ~over
        survived += int(over.sum())
        np.add.at(hist, settled[active[dead]], 1)
        alive[active] = kids
        active = active[~over & ~dead]
    return hist, survived


def gw_batch(offspring: Offspring, size_cap: int, trials: int, seed: int) -> ProgenyStatistics:
    """Many independent trees, generation by generation, from one seeded stream."""
    if size_cap < 1 or trials < 1:
        raise ValueError("size_cap and trials must be >= 1")
    hist, survived = _simulate(offspring, size_cap, trials, np.random.default_rng(seed))
    return ProgenyStatistics(offspring, trials, size_cap, hist, survived)


@dataclass(frozen=True)
class TailEstimate:
    ks: np.ndarray
    tail: np.ndarray
    stderr: np.ndarray


def progeny_tail(
    target: Offspring,
    ks,
    size_cap: int,
    trials: int,
    seed: int,
    proposal: Offspring | None = None,
) -> TailEstimate:
    """Monte Carlo estimate of P(k <= total progeny <= size_cap) for each k.

    Trees are drawn from ``proposal`` (default: the target itself) and
    reweighted by the exact tree likelihood ratio, which for Poisson or
    binomial offspring of a common family depends only on the tree's size.
    A near-critical proposal makes the exponentially rare large finite trees
    of a supercritical target common enough to measure.
    """
    proposal = target if proposal is None else proposal
    if type(proposal) is not type(target) or (isinstance(target, Binomial) and proposal.n != target.n):
        raise ValueError("proposal must share the target's offspring family")
    stats = gw_batch(proposal, size_cap, trials, seed)
    sizes = np.arange(size_cap + 1)
    logw = np.zeros(size_cap + 1)
    logw[1:] = target.tree_log_kernel(sizes[1:]) - proposal.tree_log_kernel(sizes[1:])
    w = np.exp(logw) * (stats.histogram > 0)
    contrib = stats.histogram * w
    ks = np.asarray(ks, dtype=np.int64)
    tail = np.array([contrib[k:].sum() / trials for k in ks])
    second = np.array([(stats.histogram[k:] * w[k:] ** 2).sum() / trials for k in ks])
    stderr = np.sqrt(np.maximum(second - tail**2, 0.0) / trials)
    return TailEstimate(ks, tail, stderr)


def fit_log_tail(est: TailEstimate) -> tuple[float, float, float]:
    """Least-squares line through (k, log tail): (slope, intercept, R^2)."""
    if np.any(est.tail <= 0):
        raise ValueError("tail estimate has empty bins; raise trials or use a tilted proposal")
    x = est.ks.astype(np.float64)
    y = np.log(est.tail)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1.0 - resid.var() / y.var()
    return float(slope), float(intercept), float(r2)
