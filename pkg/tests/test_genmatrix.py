import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eginoe.errors import ConfigurationError
from eginoe.genmatrix import (
    Route,
    _check_pairs,
    build,
    compare_routes,
    entry_hypergeometric,
    kernel,
    matrix_extended,
    matrix_hypergeometric,
    matrix_quadrature,
    quadrature_order,
)
from eginoe.specfun import quadrature
from eginoe.spectrum import compute_spectrum, trace_power

R2 = math.sqrt(2.0)


def entry_mpmath(j, k, tau, dps=60):
    """Entry from the un-transformed 2F1 line, evaluated in high precision."""
    with mp.workdps(dps):
        tau = mp.mpf(tau)
        pref = mp.sqrt((1 + tau) / (1 - tau)) * mp.gamma(j + k - mp.mpf(3) / 2)
        pref /= mp.sqrt(mp.gamma(2 * j - 1) * mp.gamma(2 * k - 1)) * mp.sqrt(2 * mp.pi)
        f = mp.hyp2f1(k - j + mp.mpf(1) / 2, j - k + mp.mpf(1) / 2, -j - k + mp.mpf(5) / 2, -tau / (1 - tau))
        return float(pref * f)


# ---------------------------------------------------------------------------
# entry_hypergeometric


def test_entry_examples():
    assert entry_hypergeometric(1, 1, 0.0) == pytest.approx(R2 / 2, rel=1e-15)
    assert entry_hypergeometric(1, 2, 0.0) == pytest.approx(0.25, rel=1e-15)
    for tau in (-0.5, 0.3, 0.9):
        assert entry_hypergeometric(1, 2, tau) == pytest.approx((1 - tau) * math.sqrt(1 + tau) / 4, rel=1e-14)


def test_entry_22_closed_form():
    # sqrt(2(1+tau)) (3 + 2 tau + 3 tau^2) / 16 at tau = 0.5
    assert entry_hypergeometric(2, 2, 0.5) == pytest.approx(math.sqrt(3) * 4.75 / 16, rel=1e-14)
    assert entry_hypergeometric(2, 2, 0.5) == pytest.approx(0.5142026, abs=1e-7)


@given(st.integers(1, 30), st.integers(1, 30), st.sampled_from([-0.9, -0.5, -0.1, 0.0, 0.25, 0.5, 0.9, 0.99]))
def test_entry_against_mpmath_hypergeometric(j, k, tau):
    ref = entry_mpmath(j, k, tau)
    assert entry_hypergeometric(j, k, tau) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_entry_symmetric_and_validated():
    assert entry_hypergeometric(3, 7, 0.4) == entry_hypergeometric(7, 3, 0.4)
    with pytest.raises(ConfigurationError):
        entry_hypergeometric(0, 1, 0.3)
    with pytest.raises(ConfigurationError):
        entry_hypergeometric(1, 1, 1.0)


def test_tau_zero_closed_form():
    n = 40
    m = build(n, 0.0).entries
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            ref = math.exp(math.lgamma(j + k - 1.5) - 0.5 * (math.lgamma(2 * j - 1) + math.lgamma(2 * k - 1))) / math.sqrt(2 * math.pi)
            assert m[j - 1, k - 1] == pytest.approx(ref, rel=1e-12)


# ---------------------------------------------------------------------------
# build


def test_build_examples():
    m = build(2, 0.0)
    assert np.allclose(m.entries, [[R2 / 2, 0.25], [0.25, 3 * R2 / 16]], rtol=1e-14, atol=0)
    assert m.route is Route.quadrature
    assert build(3, 1.0).entries.tolist() == np.eye(3).tolist()
    assert build(3, 1.0).route is Route.identity
    assert build(2, 0.5).entry(1, 1) == pytest.approx(math.sqrt(3) / 2, rel=1e-14)


def test_build_is_exactly_symmetric_and_read_only():
    m = build(50, 0.3)
    assert np.array_equal(m.entries, m.entries.T)
    with pytest.raises(ValueError):
        m.entries[0, 0] = 1.0
    assert m.packed_lower().shape == (50 * 51 // 2,)


@pytest.mark.parametrize("tau", [-0.5, 0.0, 0.25, 0.5, 0.9, 0.99])
def test_route_agreement_full_up_to_64(tau):
    for n in (1, 2, 7, 32, 64):
        q = matrix_quadrature(n, tau)
        h = matrix_hypergeometric(n, tau)
        large = np.abs(h) >= 1e-3
        assert np.all(np.abs(q - h)[large] <= 1e-9 * np.abs(h)[large])
        assert np.all(np.abs(q - h)[~large] <= np.maximum(1e-12, 1e-9 * np.abs(h)[~large]))


def test_subset_check_pairs_cover_required_rows():
    pairs = _check_pairs(200, 0.5)
    rows = {int(j) for j, k in pairs} | {int(k) for j, k in pairs}
    assert {1, 2, 100, 199, 200} <= rows
    assert all(1 <= j <= 200 and 1 <= k <= 200 for j, k in pairs)


def test_compare_routes_reports_worst_entry():
    n, tau = 10, 0.5
    q = matrix_quadrature(n, tau)
    q[6, 3] *= 1.0 + 1e-6
    pairs = np.array([(j, k) for j in range(1, n + 1) for k in range(1, j + 1)], dtype=np.int64)
    cmp = compare_routes(q, tau, pairs)
    assert cmp.worst == (7, 4)
    assert cmp.scaled > 1.0


def test_build_validation():
    for n, tau in ((0, 0.0), (5001, 0.0), (3, -1.0), (3, 1.5)):
        with pytest.raises(ConfigurationError):
            build(n, tau)
    with pytest.raises(ConfigurationError):
        build(2, 0.0, profile="bogus")


def test_quadrature_order():
    assert quadrature_order(1) == 10
    assert quadrature_order(100) == 208
    assert quadrature_order(5000) == 10_000
    assert all(quadrature_order(n) >= 2 * n - 1 for n in (1, 10, 4996, 5000))


def test_extended_matrix_matches_double():
    for tau in (-0.5, 0.0, 0.5):
        hi, lo = matrix_extended(12, tau)
        assert np.allclose(hi, matrix_hypergeometric(12, tau), rtol=1e-13, atol=0)
        assert np.all(np.abs(lo) <= np.abs(hi) * 2.0**-52)


# ---------------------------------------------------------------------------
# kernel


def test_kernel_single_term():
    assert kernel(1, 0.5, 0.0, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)


@given(st.integers(1, 8), st.floats(0.05, 0.95), st.floats(-4, 4), st.floats(-4, 4))
def test_kernel_symmetries(n, tau, x, y):
    k = kernel(n, tau, x, y)
    assert kernel(n, tau, y, x) == pytest.approx(k, rel=1e-14, abs=1e-300)
    assert kernel(n, tau, -x, -y) == pytest.approx(k, rel=1e-14, abs=1e-300)


def test_kernel_against_hermite_definition():
    n, tau, x, y = 4, 0.6, 0.7, -1.3
    c = math.sqrt(2 * tau)
    s = sum(
        (tau / 2) ** (2 * j) / math.factorial(2 * j) * float(mp.hermite(2 * j, x / c) * mp.hermite(2 * j, y / c))
        for j in range(n)
    )
    ref = math.exp(-(x * x + y * y) / (2 * (1 + tau))) / math.sqrt(2 * math.pi) * s
    assert kernel(n, tau, x, y) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("tau", [0.25, 0.5, 0.8])
def test_kernel_integrals_match_traces(n, tau):
    # integrand carries exp(-x^2/(1+tau)) per variable; scale x = sqrt(1+tau) t
    r = quadrature("gauss_hermite", 40)
    a = math.sqrt(1 + tau)
    x = a * r.nodes
    w = a * r.weights * np.exp(r.nodes**2)
    tr1 = math.fsum(w * kernel(n, tau, x, x))
    kk = kernel(n, tau, x[:, None], x[None, :])
    tr2 = math.fsum((w[:, None] * w[None, :] * kk**2).ravel())
    s = compute_spectrum(n, tau)
    assert tr1 == pytest.approx(trace_power(s, 1), rel=1e-7)
    assert tr2 == pytest.approx(trace_power(s, 2), rel=1e-7)


def test_kernel_example_trace_two():
    r = quadrature("gauss_hermite", 30)
    a = math.sqrt(1.5)
    x = a * r.nodes
    w = a * r.weights * np.exp(r.nodes**2)
    kk = kernel(2, 0.5, x[:, None], x[None, :])
    tr2 = math.fsum((w[:, None] * w[None, :] * kk**2).ravel())
    assert abs(tr2 - trace_power(compute_spectrum(2, 0.5), 2)) <= 1e-8
