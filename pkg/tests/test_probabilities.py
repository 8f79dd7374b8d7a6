import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eginoe.errors import ConfigurationError, InvariantError
from eginoe.probabilities import (
    closed_form_p_zero,
    distribution,
    eigenvalue_remainder,
    log_generating,
    log_p_all_real,
    log_p_zero_truncated,
    p_all_real,
    prob_zero_forrester_nagao,
    remainder_bound,
)
from eginoe.spectrum import Spectrum, compute_spectrum

R2 = math.sqrt(2.0)
TAU_GRID = (0.0, 0.25, 0.5, 0.9)


def _spec(lams, tau=0.0):
    lam = np.sort(np.asarray(lams, dtype=float))[::-1]
    return Spectrum(len(lam), tau, lam)


# ---------------------------------------------------------------------------
# worked examples


def test_n2_tau0():
    p = distribution(compute_spectrum(1, 0.0)).as_floats()
    assert p == pytest.approx([1 - R2 / 2, R2 / 2], rel=1e-14)


def test_n4_tau0():
    p = distribution(compute_spectrum(2, 0.0)).as_floats()
    assert p[0] == pytest.approx((18 - 11 * R2) / 16, rel=1e-13)
    assert p[1] == pytest.approx((11 * R2 - 4) / 16, rel=1e-13)
    assert p[2] == pytest.approx(1 / 8, rel=1e-13)


def test_truncated_n2_k1():
    truncated, remainder = log_p_zero_truncated(compute_spectrum(1, 0.0), 1)
    assert truncated == pytest.approx(-R2 / 2, rel=1e-15)
    assert remainder == pytest.approx(-math.log(1 - R2 / 2) - R2 / 2, rel=1e-14)
    assert remainder == pytest.approx(0.5208404, abs=1e-7)


def test_log_generating_x2():
    v = log_generating(compute_spectrum(1, 0.0), 2.0)
    assert v == pytest.approx(math.log(1 + R2 / 2), rel=1e-15)
    assert v == pytest.approx(0.5347999967, abs=1e-10)


def test_log_generating_range():
    s = compute_spectrum(3, 0.0)
    with pytest.raises(ConfigurationError):
        log_generating(s, 2.5)
    with pytest.raises(ConfigurationError):
        log_generating(s, -0.1)


@pytest.mark.parametrize("n, tau, expected", [(1, 0.0, 1 - R2 / 2), (2, 0.0, (18 - 11 * R2) / 16), (2, 0.5, 0.0416470)])
def test_forrester_nagao_examples(n, tau, expected):
    assert prob_zero_forrester_nagao(n, tau) == pytest.approx(expected, rel=1e-6 if tau else 1e-13)


def test_forrester_nagao_domain():
    with pytest.raises(ConfigurationError):
        prob_zero_forrester_nagao(3, 0.0)


def test_lambda_out_of_range():
    with pytest.raises(InvariantError):
        distribution(_spec([1.2, 0.3]))


# ---------------------------------------------------------------------------
# closed forms and identities


@pytest.mark.parametrize("tau", TAU_GRID)
@pytest.mark.parametrize("n", [1, 2])
def test_closed_forms(n, tau):
    d = distribution(compute_spectrum(n, tau))
    exact = closed_form_p_zero(n, tau)
    assert d.as_floats()[0] == pytest.approx(exact, rel=1e-10)
    assert prob_zero_forrester_nagao(n, tau) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("n", range(1, 11))
@pytest.mark.parametrize("tau", TAU_GRID + (-0.5,))
def test_all_real(n, tau):
    d = distribution(compute_spectrum(n, tau))
    assert d.probs[-1].to_float() == pytest.approx(p_all_real(2 * n, tau), rel=1e-10)
    assert d.probs[-1].log_abs() == pytest.approx(log_p_all_real(2 * n, tau), rel=1e-10)


@pytest.mark.parametrize("n", [1, 7, 33, 100, 256])
@pytest.mark.parametrize("tau", TAU_GRID)
def test_sum_to_one(n, tau):
    d = distribution(compute_spectrum(n, tau))
    assert abs(d.total() - 1.0) <= 1e-10
    assert np.all(d.as_floats() >= 0.0)
    p0 = d.probs[0]
    assert d.log_p_zero == pytest.approx(p0.log_abs(), rel=1e-10, abs=1e-10)


def test_tiny_probabilities_survive():
    # p_{N,N} = prod(lambda) = 1e-1000, far below the double range
    d = distribution(_spec([1e-200] * 5))
    assert d.probs[-1].to_float() == 0.0
    assert d.probs[-1].log_abs() == pytest.approx(-1000 * math.log(10), rel=1e-14)
    assert d.probs[0].to_float() == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("tau", [0.0, 0.5])
def test_generating_factorisation(tau):
    s = compute_spectrum(12, tau)
    p = distribution(s).as_floats()
    rng = np.random.default_rng(3)
    for x in rng.uniform(0.0, 2.0, 20):
        direct = math.fsum(p[k] * x**k for k in range(len(p)))
        assert math.exp(log_generating(s, x)) == pytest.approx(direct, rel=1e-9)


def test_generating_special_points():
    s = compute_spectrum(30, 0.25)
    assert log_generating(s, 1.0) == 0.0
    assert log_generating(s, 0.0) == pytest.approx(distribution(s).log_p_zero, rel=1e-14)


@pytest.mark.parametrize("tau", [0.0, 0.9])
def test_monotone_truncation(tau):
    s = compute_spectrum(50, tau)
    log_p = distribution(s).log_p_zero
    prev_t, prev_r = math.inf, math.inf
    for K in (1, 2, 5, 10, 50, 200, 1000):
        t, r = log_p_zero_truncated(s, K)
        assert t < prev_t and r < prev_r
        assert t - r == pytest.approx(log_p, rel=1e-10)
        assert t >= log_p
        assert r <= remainder_bound(s, K)
        prev_t, prev_r = t, r


@given(st.lists(st.floats(1e-8, 1 - 1e-8), min_size=1, max_size=12))
def test_distribution_of_arbitrary_spectrum(lams):
    s = _spec(lams)
    d = distribution(s)
    p = d.as_floats()
    assert abs(math.fsum(p) - 1.0) <= 1e-12
    mean = math.fsum(k * pk for k, pk in enumerate(p))
    assert mean == pytest.approx(math.fsum(lams), rel=1e-10, abs=1e-14)
    assert p[0] == pytest.approx(math.prod(1 - v for v in lams), rel=1e-10)


@given(st.floats(1e-10, 1 - 1e-10), st.integers(1, 500))
def test_eigenvalue_remainder_sign_and_bound(lam, K):
    r = eigenvalue_remainder(lam, K)
    assert r >= 0.0
    assert r <= lam ** (K + 1) / (math.sqrt(2 * K + 1) * math.sqrt(1 - lam)) * (1 + 1e-12)
