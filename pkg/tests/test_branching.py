import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from cubeperc import branching as br


def test_survival_matches_root_finder():
    for c in (1.2, 1.5, 2.0, 3.0, 5.0):
        # y solves 1 - y = exp(-c y); brentq on (0, 1] is an independent route
        y = brentq(lambda t: 1 - t - math.exp(-c * t), 1e-9, 1.0)
        assert br.survival(c) == pytest.approx(y, abs=1e-10)
    assert br.survival(2.0) == pytest.approx(0.7968121300207021, abs=1e-12)


@pytest.mark.parametrize("c", [0.3, 0.9, 1.0])
def test_subcritical_extinct(c):
    sol = br.solve_poisson_survival(c)
    assert sol.extinction == 1.0 and sol.survival == 0.0


def test_solver_errors():
    with pytest.raises(ValueError):
        br.solve_poisson_survival(0)
    with pytest.raises(br.ConvergenceError):
        br.solve_poisson_survival(1.0001, max_iter=5)
    with pytest.raises(ValueError):
        br.solve_binomial_survival(10, 1.5)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(1.05, 8.0))
def test_fixed_point_residual(c):
    sol = br.solve_poisson_survival(c)
    assert sol.residual < 1e-10
    assert 0 < sol.survival < 1


def test_binomial_converges_to_poisson_at_rate_one_over_d():
    y = br.survival(2.0)
    rates = [d * abs(br.solve_binomial_survival(d, 2 / d).survival - y) for d in (10**3, 10**4, 10**5)]
    assert max(rates) / min(rates) < 1.2


def test_borel_values():
    assert br.borel_weight(2.0, 1) == pytest.approx(math.exp(-2))
    assert br.borel_weight(2.0, 3) == pytest.approx(6 * math.exp(-6))
    # finite-tree mass equals extinction probability
    ks = np.arange(1, 400)
    assert np.exp(br.log_borel_weight(2.0, ks)).sum() == pytest.approx(1 - br.survival(2.0), abs=1e-12)
    with pytest.raises(ValueError):
        br.borel_weight(2.0, 0)


def test_tail_cutoff():
    assert br.tail_cutoff(4096, 2**16, 2.0) == 18
    a = math.e * 2 * math.exp(-2)
    k = br.tail_cutoff(10, 2**12, 2.0)
    assert a**k / (1 - a) <= 10 / (4 * 2**12)
    with pytest.raises(ValueError):
        br.tail_cutoff(0, 10, 2.0)
    with pytest.raises(ValueError):
        br.tail_cutoff(1, 10, 0.9)


def test_gw_sample_and_batch_agree_with_theory():
    assert br.gw_sample(br.Poisson(0.01), 10, seed=1) == 1
    assert br.gw_sample(br.Poisson(50.0), 10, seed=1) is br.CAP_SURVIVED
    stats = br.gw_batch(br.Poisson(2.0), 2000, 40000, seed=3)
    assert abs(stats.survival_frequency - br.survival(2.0)) < 0.01
    for k in (1, 2, 3):
        b = br.borel_weight(2.0, k)
        assert abs(stats.frequency(k) - b) < 5 * math.sqrt(b / 40000)


def test_importance_sampled_tail_matches_exact():
    ks = np.array([5, 10, 20, 30])
    est = br.progeny_tail(br.Poisson(2.0), ks, 2000, 50000, seed=5, proposal=br.Poisson(1.0))
    w = np.exp(br.log_borel_weight(2.0, np.arange(1, 2001)))
    exact = np.array([w[k - 1:].sum() for k in ks])
    assert np.all(np.abs(est.tail - exact) <= 5 * est.stderr + 1e-15)
    with pytest.raises(ValueError):
        br.progeny_tail(br.Poisson(2.0), ks, 100, 10, seed=0, proposal=br.Binomial(10, 0.1))


def test_binomial_offspring_draws():
    stats = br.gw_batch(br.Binomial(100, 0.02), 2000, 20000, seed=8)
    y = br.solve_binomial_survival(100, 0.02).survival
    assert abs(stats.survival_frequency - y) < 0.015
