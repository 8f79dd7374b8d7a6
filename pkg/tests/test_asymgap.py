import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eginoe.asymgap import (
    K_CAP,
    LdpEstimate,
    default_truncation,
    genfun_limit_check,
    ldp_estimate,
    ldp_table,
)
from eginoe.asymptotics import Regime, d_alpha, weak_tau
from eginoe.errors import ConfigurationError
from eginoe.spectrum import Spectrum, compute_spectrum

ZETA32 = 2.612375348685488


def test_n2_scaled_log_p():
    e = ldp_estimate(compute_spectrum(1, 0.0), "strong", 0.0, 50)
    assert e.scaled_log_p == pytest.approx(math.log(1 - math.sqrt(2) / 2) / math.sqrt(2), rel=1e-14)
    assert e.scaled_log_p == pytest.approx(-0.868290, abs=1e-6)
    assert e.sandwich_holds


def test_strong_limit_tau_half():
    e = ldp_estimate(compute_spectrum(4, 0.5), "strong", 0.5)
    assert e.limit == pytest.approx(-math.sqrt(3) * ZETA32 / math.sqrt(2 * math.pi), rel=1e-14)
    assert not e.limit_is_bound


def test_weak_upper_bound_direction():
    n, alpha = 500, 1.0
    e = ldp_estimate(compute_spectrum(n, weak_tau(n, alpha)), "weak", alpha)
    assert e.limit_is_bound
    assert e.limit == pytest.approx(-d_alpha(1.0), rel=1e-14)
    assert e.sandwich_holds
    # finite-N value sits at or below the bound up to a small finite-size slack
    assert e.scaled_log_p <= e.limit + 0.01


def test_parameter_mismatch():
    with pytest.raises(ConfigurationError):
        ldp_estimate(compute_spectrum(5, 0.5), "strong", 0.25)
    with pytest.raises(ConfigurationError):
        ldp_estimate(compute_spectrum(5, 0.5), "weak", 1.0)
    with pytest.raises(ConfigurationError):
        ldp_estimate(compute_spectrum(5, 0.5), "strong", 0.5, K=0)


def test_default_truncation():
    assert default_truncation(1) == 1
    assert default_truncation(100) == math.ceil(10 * 10 * math.log(100))
    assert default_truncation(10**12) == K_CAP


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        LdpEstimate(2, Regime.strong, 0.0, -math.inf, -1.0, 1, 0.0, 0.0, 0.0)


@pytest.mark.parametrize("tau", [0.0, 0.5, 0.9])
def test_sandwich_over_k(tau):
    s = compute_spectrum(60, tau)
    for K in (1, 3, 10, 100, 1000):
        e = ldp_estimate(s, "strong", tau, K)
        assert e.sandwich_holds
        assert e.scaled_remainder <= e.remainder_bound


@settings(max_examples=20)
@given(st.lists(st.floats(1e-6, 1 - 1e-6), min_size=1, max_size=20), st.integers(1, 300))
def test_sandwich_arbitrary_spectrum(lams, K):
    lam = np.sort(np.array(lams))[::-1]
    e = ldp_estimate(Spectrum(len(lam), 0.0, lam), "strong", 0.0, K)
    assert e.sandwich_holds


def test_monotone_in_tau():
    vals = [ldp_estimate(compute_spectrum(100, t), "strong", t).scaled_log_p for t in (0.0, 0.25, 0.5, 0.75)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_ldp_table_trend():
    rows = ldp_table("strong", 0.0, [50, 200])
    errs = [abs(r.scaled_log_p - r.limit) for r in rows]
    assert errs[1] < errs[0]


def test_genfun_x1_exact_zero():
    t = genfun_limit_check([10, 40], 0.0, [1.0])
    assert all(r.finite == 0.0 and r.limit == 0.0 for r in t.rows)
    assert t.shrinking[1.0]


def test_genfun_shrinking():
    t = genfun_limit_check([50, 200, 800], 0.0, [0.25, 0.5, 1.5, 1.95])
    assert all(t.shrinking.values())


def test_genfun_x_half_close():
    t = genfun_limit_check([2000], 0.0, [0.5])
    row = t.rows[0]
    assert abs(row.finite - row.limit) <= 0.10 * abs(row.limit)


def test_genfun_grid_order():
    with pytest.raises(ConfigurationError):
        genfun_limit_check([40, 10], 0.0, [0.5])
