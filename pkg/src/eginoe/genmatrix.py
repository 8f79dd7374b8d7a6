"""The generating matrix M_n(tau) and the associated correlation kernel.

Entries (1-based j, k) are Gaussian integrals of products of even-degree
normalised Hermite polynomials,

    M(j, k) = (2 pi)^{-1/2} int exp(-x^2 / (1 + tau)) C_{2j-2}(x) C_{2k-2}(x)
              / sqrt((2j-2)! (2k-2)!) dx.

Two routes are implemented: Gauss-Hermite quadrature on the weighted
normalised polynomials (primary) and a terminating hypergeometric sum
(cross-check). A build only succeeds when both agree.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numba import njit

from . import _dd as dd
from .errors import ConfigurationError, ConsistencyError
from .specfun import MAX_QUADRATURE_ORDER, normalized_hermite_table, quadrature

MAX_N = 5000
FULL_CHECK_MAX_N = 64
EXTENDED_MAX_N = 32
# condition number above which the double-double sum is redone in decimal
COND_LIMIT = 1e18
# for tau < 0 the subset check for large n skips pairs with min(j, k) above this
NEGATIVE_TAU_CHECK_MAX_J = 256

# (relative, absolute-floor, small-entry threshold) per tolerance profile
TOLERANCES = {
    "default": (1e-9, 1e-12, 1e-3),
    "strict": (1e-11, 1e-14, 1e-3),
}


class Route(str, Enum):
    quadrature = "quadrature"
    hypergeometric = "hypergeometric"
    identity = "identity"


@dataclass(frozen=True)
class GeneratingMatrix:
    """Symmetric n x n generating matrix with construction metadata.

    ``entries`` is a read-only array mirrored from its lower triangle, so
    ``entries[j, k] == entries[k, j]`` holds bit for bit.
    """

    n: int
    tau: float
    entries: np.ndarray
    route: Route
    comparison: "RouteComparison | None" = field(default=None, compare=False)

    @property
    def N(self) -> int:
        return 2 * self.n

    def entry(self, j: int, k: int) -> float:
        """Entry with 1-based indices."""
        return float(self.entries[j - 1, k - 1])

    def packed_lower(self) -> np.ndarray:
        return self.entries[np.tril_indices(self.n)]


def _validate(n, tau):
    if int(n) != n or n < 1:
        raise ConfigurationError(f"n must be a positive integer, got {n!r}")
    if n > MAX_N:
        raise ConfigurationError(f"n={n} exceeds configured maximum {MAX_N}")
    if not (-1.0 < tau <= 1.0):
        raise ConfigurationError(f"tau must lie in (-1, 1], got {tau!r}")


# ---------------------------------------------------------------------------
# Hypergeometric route


@njit(cache=True)
def _log_prefactor(j, k, tau):
    return (
        0.5 * math.log1p(tau)
        + (k - j) * math.log1p(-tau)
        + math.lgamma(j + k - 1.5)
        - 0.5 * (math.lgamma(2.0 * j - 1.0) + math.lgamma(2.0 * k - 1.0))
        - 0.5 * math.log(2.0 * math.pi)
    )


@njit(cache=True)
def _entry_hypergeometric(j, k, tau):
    # returns (entry, condition number of the terminating sum)
    if j > k:
        j, k = k, j
    a = k - j + 0.5
    mc = j + k - 2.5  # -c, with c = 5/2 - j - k
    top = 2 * j - 2
    log_pref = _log_prefactor(j, k, tau)
    if tau == 0.0 or top == 0:
        return math.exp(log_pref), 1.0
    # terms t_{s+1} = t_s (a+s)(top-s) tau / ((mc-s)(s+1)); numerator and
    # denominator integers/half-integers are exact in double, the running
    # term and the sum are carried in double-double with power-of-two rescaling
    thi, tlo = 1.0, 0.0
    shi, slo = 1.0, 0.0
    absum = 1.0
    e2 = 0
    for s in range(top):
        num = (a + s) * (top - s)
        den = (mc - s) * (s + 1.0)
        thi, tlo = dd.mul_d(thi, tlo, num)
        thi, tlo = dd.mul_d(thi, tlo, tau)
        thi, tlo = dd.div_d(thi, tlo, den)
        shi, slo = dd.add(shi, slo, thi, tlo)
        absum += abs(thi)
        if abs(thi) > 1e120 or absum > 1e120:
            thi *= 2.0**-400
            tlo *= 2.0**-400
            shi *= 2.0**-400
            slo *= 2.0**-400
            absum *= 2.0**-400
            e2 += 400
    total = shi + slo
    if total == 0.0:
        return 0.0, math.inf
    cond = absum / abs(total)
    return math.copysign(math.exp(log_pref + e2 * 0.6931471805599453 + math.log(abs(total))), total), cond


def _hypergeometric_sum_decimal(j: int, k: int, tau: float, digits: int) -> Decimal:
    if j > k:
        j, k = k, j
    top = 2 * j - 2
    a2 = 2 * (k - j) + 1
    mc2 = 2 * (j + k) - 5
    with localcontext() as ctx:
        ctx.prec = digits
        t = Decimal(tau)  # exact binary value
        term = Decimal(1)
        total = Decimal(1)
        for s in range(top):
            term = term * ((a2 + 2 * s) * (top - s)) * t / ((mc2 - 2 * s) * (s + 1))
            total += term
        return +total


def _entry_hypergeometric_decimal(j: int, k: int, tau: float, cond_hint: float) -> float:
    # high-precision fallback for ill-conditioned alternating sums (tau < 0)
    digits = 40 + int(math.log10(max(cond_hint, 1.0)))
    prev = _hypergeometric_sum_decimal(j, k, tau, digits)
    while True:
        digits *= 2
        cur = _hypergeometric_sum_decimal(j, k, tau, digits)
        if cur == 0 or abs((cur - prev) / cur) < Decimal(10) ** -20:
            break
        prev = cur
    if cur == 0:
        return 0.0
    lp = _log_prefactor(min(j, k), max(j, k), float(tau))
    return math.copysign(math.exp(lp + float(abs(cur).ln())), float(cur.copy_sign(Decimal(1))))


def entry_hypergeometric(j: int, k: int, tau: float) -> float:
    """Entry M(j, k) from the terminating hypergeometric representation.

    After a Pfaff transformation the series has argument ``tau`` and the
    nonpositive integer upper parameter ``2 - 2 min(j, k)``, so it is a finite
    sum of ``2 min(j, k) - 1`` terms. For ``tau >= 0`` every term is positive;
    for ``tau < 0`` the terms alternate, so the sum is carried in double-double
    arithmetic, and in decimal arithmetic with enough digits whenever its
    condition number exceeds ``COND_LIMIT``.

    Examples
    --------
    >>> round(entry_hypergeometric(1, 1, 0.0), 8)
    0.70710678
    >>> entry_hypergeometric(1, 2, 0.0)
    0.25
    """
    if int(j) != j or int(k) != k or j < 1 or k < 1:
        raise ConfigurationError("indices must be integers >= 1")
    if not (-1.0 < tau < 1.0):
        raise ConfigurationError("entry_hypergeometric requires tau in (-1, 1)")
    value, cond = _entry_hypergeometric(int(j), int(k), float(tau))
    if cond > COND_LIMIT:
        value = _entry_hypergeometric_decimal(int(j), int(k), float(tau), cond)
    return float(value)


@njit(cache=True)
def _hypergeometric_block_dd(pairs, tau, out, cond):
    for i in range(pairs.shape[0]):
        out[i], cond[i] = _entry_hypergeometric(pairs[i, 0], pairs[i, 1], tau)


def _hypergeometric_block(pairs, tau, out):
    cond = np.empty(pairs.shape[0])
    _hypergeometric_block_dd(pairs, tau, out, cond)
    for i in np.nonzero(cond > COND_LIMIT)[0]:
        out[i] = _entry_hypergeometric_decimal(int(pairs[i, 0]), int(pairs[i, 1]), tau, cond[i])


def _check_pairs(n: int, tau: float = 0.0) -> np.ndarray:
    """1-based (j, k) pairs, j >= k, compared against the hypergeometric route."""
    if n <= FULL_CHECK_MAX_N:
        jj, kk = np.tril_indices(n)
        return np.stack([jj + 1, kk + 1], axis=1).astype(np.int64)
    rows = sorted({1, 2, n // 2, n - 1, n})
    pairs = set()
    for r in rows:
        for c in range(1, n + 1):
            pairs.add((max(r, c), min(r, c)))
    for d in range(1, n + 1):
        pairs.add((d, d))
        if d > 1:
            pairs.add((d, d - 1))
    if tau < 0.0:
        pairs = {p for p in pairs if p[1] <= NEGATIVE_TAU_CHECK_MAX_J}
    return np.array(sorted(pairs), dtype=np.int64)


def _entry_exact_parts(j: int, k: int, tau: Fraction) -> tuple[Fraction, Fraction]:
    # M(j, k) = sqrt(P2) * S with both P2 and S exact rationals in tau
    if j > k:
        j, k = k, j
    m = j + k - 2
    # Gamma(m + 1/2) / sqrt(pi) = (2m)! / (4^m m!)
    r = Fraction(math.factorial(2 * m), 4**m * math.factorial(m))
    g = math.factorial(2 * j - 2) * math.factorial(2 * k - 2)
    p2 = (1 + tau) * (1 - tau) ** (2 * (k - j)) * r * r / (2 * g)
    a = Fraction(2 * (k - j) + 1, 2)
    c = Fraction(5 - 2 * (j + k), 2)
    top = 2 * j - 2
    term = Fraction(1)
    total = Fraction(1)
    for i in range(top):
        term = term * (a + i) * (i - top) / ((c + i) * (i + 1)) * tau
        total += term
    return p2, total


def matrix_extended(n: int, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Entries as double-double (hi, lo) arrays from exact rational arithmetic.

    The hypergeometric representation is a square root of a rational number
    times a rational number once ``tau`` is read as the exact binary fraction
    it stores, so the only roundings are the final double-double conversions
    and one double-double square root. Cost grows quickly with ``n``; intended
    for small matrices whose smallest eigenvalues need relative accuracy
    beyond double precision.
    """
    _validate(n, tau)
    if n > EXTENDED_MAX_N:
        raise ConfigurationError(f"extended-precision matrix limited to n <= {EXTENDED_MAX_N}")
    hi = np.zeros((n, n))
    lo = np.zeros((n, n))
    if tau == 1.0:
        np.fill_diagonal(hi, 1.0)
        return hi, lo
    t = Fraction(float(tau))
    for j in range(1, n + 1):
        for k in range(1, j + 1):
            p2, total = _entry_exact_parts(j, k, t)
            ph, pl = dd.from_fraction(p2)
            ph, pl = dd.sqrt(ph, pl)
            sh, sl = dd.from_fraction(total)
            vh, vl = dd.mul(ph, pl, sh, sl)
            hi[j - 1, k - 1] = hi[k - 1, j - 1] = vh
            lo[j - 1, k - 1] = lo[k - 1, j - 1] = vl
    return hi, lo


# ---------------------------------------------------------------------------
# Quadrature route


def quadrature_order(n: int) -> int:
    """Gauss-Hermite order used for ``build``; at least the exactness bound 2n - 1."""
    return min(2 * n + 8, MAX_QUADRATURE_ORDER)


def _weighted_table(n: int, tau: float) -> np.ndarray:
    # D[q, i] = sqrt(w_q) * C_{2i}(x_q) / sqrt((2i)!), x_q = sqrt(1 + tau) t_q.
    # Written as (sqrt(w_q) e^{t_q^2 / 2}) times the Gaussian-weighted value
    # exp(-x_q^2 / (2 (1 + tau))) C_k(x_q) / sqrt(k!), the bounded quantity.
    rule = quadrature("gauss_hermite", quadrature_order(n))
    x = math.sqrt(1.0 + tau) * rule.nodes
    log_pref = 0.5 * rule.log_weights
    table = normalized_hermite_table(x, tau, 2 * n - 2, log_prefactor=log_pref, step=2)
    return table.T


def matrix_quadrature(n: int, tau: float) -> np.ndarray:
    """Quadrature-route entries as a full symmetric array (no cross-check)."""
    _validate(n, tau)
    d = _weighted_table(n, tau)
    m = (math.sqrt(1.0 + tau) / math.sqrt(2.0 * math.pi)) * (d.T @ d)
    lower = np.tril(m)
    return lower + np.tril(lower, -1).T


def matrix_hypergeometric(n: int, tau: float) -> np.ndarray:
    """Hypergeometric-route entries as a full symmetric array (O(n^3) work)."""
    _validate(n, tau)
    if tau == 1.0:
        return np.eye(n)
    jj, kk = np.tril_indices(n)
    pairs = np.stack([jj + 1, kk + 1], axis=1).astype(np.int64)
    vals = np.empty(pairs.shape[0])
    _hypergeometric_block(pairs, float(tau), vals)
    m = np.zeros((n, n))
    m[jj, kk] = vals
    m[kk, jj] = vals
    return m


@dataclass(frozen=True)
class RouteComparison:
    """Outcome of comparing an entry array with the hypergeometric route.

    ``scaled`` is the worst discrepancy divided by its tolerance (relative for
    entries of magnitude >= ``small``, else the looser of relative and
    absolute), so ``scaled <= 1`` means agreement.
    """

    scaled: float
    worst: tuple
    max_relative_large: float
    max_absolute_small: float
    checked: int


def compare_routes(entries: np.ndarray, tau: float, pairs: np.ndarray, profile: str = "default") -> RouteComparison:
    """Compare ``entries`` at the 1-based ``pairs`` with the hypergeometric route."""
    rel, absfloor, small = TOLERANCES[profile]
    ref = np.empty(pairs.shape[0])
    _hypergeometric_block(pairs, float(tau), ref)
    got = entries[pairs[:, 0] - 1, pairs[:, 1] - 1]
    diff = np.abs(got - ref)
    relerr = diff / np.maximum(np.abs(ref), np.finfo(float).tiny)
    large = np.abs(ref) >= small
    scaled = np.where(large, relerr / rel, np.minimum(relerr / rel, diff / absfloor))
    i = int(np.argmax(scaled))
    return RouteComparison(
        float(scaled[i]),
        (int(pairs[i, 0]), int(pairs[i, 1])),
        float(relerr[large].max()) if large.any() else 0.0,
        float(diff[~large].max()) if (~large).any() else 0.0,
        int(pairs.shape[0]),
    )


def build(n: int, tau: float, profile: str = "default") -> GeneratingMatrix:
    """Build M_n(tau) by quadrature and reconcile with the hypergeometric route.

    Every entry is cross-checked for n <= 64; above that the check covers
    the diagonal, the first subdiagonal and rows 1, 2, n/2, n-1, n, which keeps
    the cost O(n^2). For tau < 0 that subset is further limited to pairs with
    min(j, k) <= 256, because the alternating sums there need high-precision
    arithmetic whose cost grows with the number of terms.

    Raises
    ------
    ConsistencyError
        If the routes disagree beyond tolerance; carries the worst (j, k).

    Examples
    --------
    >>> build(3, 1.0).entries.tolist()
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    """
    _validate(n, tau)
    tau = float(tau)
    if profile not in TOLERANCES:
        raise ConfigurationError(f"unknown tolerance profile {profile!r}")
    if tau == 1.0:
        eye = np.eye(n)
        eye.setflags(write=False)
        return GeneratingMatrix(n, tau, eye, Route.identity)
    entries = matrix_quadrature(n, tau)
    pairs = _check_pairs(n, tau)
    cmp = compare_routes(entries, tau, pairs, profile)
    if not cmp.scaled <= 1.0:
        raise ConsistencyError(
            f"quadrature and hypergeometric routes disagree at (j, k) = {cmp.worst} "
            f"({cmp.scaled:.3e} x tolerance) for n={n}, tau={tau}",
            worst=cmp.worst,
            discrepancy=cmp.scaled,
        )
    entries.setflags(write=False)
    return GeneratingMatrix(n, tau, entries, Route.quadrature, cmp)


# ---------------------------------------------------------------------------
# Kernel


def kernel(n: int, tau: float, x, y):
    """Correlation kernel K_n(x, y) built from the first n even-degree terms.

    ``K_n(x, y) = (2 pi)^{-1/2} sum_{j<n} D_{2j}(x) D_{2j}(y)`` with
    ``D_k(x) = exp(-x^2 / (2 (1 + tau))) C_k(x) / sqrt(k!)``. Accepts scalars
    or broadcastable arrays.

    Examples
    --------
    >>> round(kernel(1, 0.5, 0.0, 0.0), 7)
    0.3989423
    """
    if int(n) != n or n < 1:
        raise ConfigurationError("n must be a positive integer")
    if not (-1.0 < tau <= 1.0):
        raise ConfigurationError("tau must lie in (-1, 1]")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    xf, yf = x.ravel(), y.ravel()
    s = 1.0 / (2.0 * (1.0 + tau))
    tx = normalized_hermite_table(xf, tau, 2 * n - 2, -s * xf * xf, step=2)
    ty = normalized_hermite_table(yf, tau, 2 * n - 2, -s * yf * yf, step=2)
    out = np.einsum("iq,iq->q", tx, ty) / math.sqrt(2.0 * math.pi)
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out
