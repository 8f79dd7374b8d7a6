"""Eigenvalues of the generating matrix and trace powers.

Two eigenvalue paths exist. The default one reduces the double-precision
matrix to tridiagonal form and applies implicit-shift QL. For small ``n``
the smallest eigenvalues fall far below machine epsilon relative to the
largest, so :func:`compute_spectrum` switches to a double-double Jacobi solve
of an exactly assembled matrix; eigenvalues are rounded to double only at
the end, which keeps each one accurate relative to its own size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np

from . import _dd
from ._linalg import symmetric_eigenvalues
from .errors import ConfigurationError, NumericalError
from .genmatrix import GeneratingMatrix, build, matrix_extended

AUTO_EXTENDED_MAX_N = 16
ORACLE_MAX_N = 12
ORACLE_MAX_M = 3
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of M_n(tau), sorted descending.

    ``precision`` records the arithmetic used by the eigensolver:
    ``"double"`` or ``"double_double"``.
    """

    n: int
    tau: float
    lambdas: np.ndarray
    precision: str = "double"

    @property
    def N(self) -> int:
        return 2 * self.n

    def ascending(self) -> np.ndarray:
        return self.lambdas[::-1]


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.sort(np.asarray(values, dtype=np.float64))[::-1].copy()
    out.setflags(write=False)
    return out


# Absolute eigenvalue error of the double path, in units of eps * n * lambda_max
EIG_ERROR_FACTOR = 4.0


def _inverse_iteration_residual(a: np.ndarray, lam: float, scale: float) -> float:
    n = a.shape[0]
    shift = lam + 1e-13 * scale
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    shifted = a - shift * np.eye(n)
    for _ in range(3):
        try:
            v = np.linalg.solve(shifted, v)
        except np.linalg.LinAlgError:
            shifted = a - (shift + 1e-12 * scale) * np.eye(n)
            v = np.linalg.solve(shifted, v)
        v /= np.linalg.norm(v)
    return float(np.linalg.norm(a @ v - lam * v))


def eigendecompose(m: GeneratingMatrix, check_residual: bool = True) -> Spectrum:
    """Eigenvalues of a built generating matrix (double precision path).

    Householder tridiagonalisation followed by implicit-shift QL. The largest
    and smallest eigenpairs are verified by inverse iteration:
    ``||M v - lambda v|| <= 1e-10 ||M||``.

    Examples
    --------
    >>> from eginoe.genmatrix import build
    >>> eigendecompose(build(2, 1.0)).lambdas.tolist()
    [1.0, 1.0]
    """
    a = np.asarray(m.entries, dtype=np.float64)
    lambdas = symmetric_eigenvalues(a)
    if check_residual and m.n > 1:
        scale = float(np.max(np.abs(lambdas)))
        for lam in (lambdas[-1], lambdas[0]):
            res = _inverse_iteration_residual(a, float(lam), scale)
            if res > RESIDUAL_TOL * scale:
                raise NumericalError(f"eigenpair residual {res:.3e} exceeds {RESIDUAL_TOL:g} * ||M|| for n={m.n}, tau={m.tau}")
    return Spectrum(m.n, m.tau, _freeze(lambdas), "double")


def eigendecompose_extended(n: int, tau: float, max_sweeps: int = 60) -> Spectrum:
    """Eigenvalues from a double-double Jacobi solve of the exactly assembled matrix."""
    hi, lo = matrix_extended(n, tau)
    dh, dl, sweeps = _dd.jacobi_eigenvalues(hi, lo, max_sweeps)
    if sweeps < 0:
        raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps (n={n}, tau={tau})")
    return Spectrum(n, float(tau), _freeze(dh + dl), "double_double")


@lru_cache(maxsize=128)
def _compute_spectrum(n: int, tau: float, precision: str, profile: str) -> Spectrum:
    m = build(n, tau, profile)
    if precision == "double_double" and tau != 1.0:
        s = eigendecompose_extended(n, tau)
        # the double matrix is reconciled; its spectrum must agree in absolute terms
        ref = symmetric_eigenvalues(np.asarray(m.entries))[::-1]
        gap = float(np.max(np.abs(np.sort(ref)[::-1] - s.lambdas)))
        if gap > 1e-12 * max(1.0, float(s.lambdas[0])):
            raise NumericalError(f"extended and double spectra differ by {gap:.3e}")
        return s
    return eigendecompose(m)


def compute_spectrum(n: int, tau: float, precision: str = "auto", profile: str = "default") -> Spectrum:
    """Build M_n(tau) and return its spectrum (memoised).

    ``precision="auto"`` selects the double-double path for
    ``n <= AUTO_EXTENDED_MAX_N`` and the double path otherwise.
    """
    if precision not in ("auto", "double", "double_double"):
        raise ConfigurationError(f"unknown precision {precision!r}")
    if precision == "auto":
        precision = "double_double" if n <= AUTO_EXTENDED_MAX_N else "double"
    return _compute_spectrum(int(n), float(tau), precision, profile)


# ---------------------------------------------------------------------------
# Trace powers


def trace_power(s: Spectrum, m: int) -> float:
    """``sum_i lambda_i**m`` accumulated from the smallest term upward.

    Examples
    --------
    >>> import numpy as np
    >>> trace_power(Spectrum(2, 1.0, np.array([1.0, 1.0])), 5)
    2.0
    """
    if int(m) != m or m < 1:
        raise ConfigurationError("trace power requires an integer m >= 1")
    lam = np.asarray(s.ascending(), dtype=np.float64)
    return math.fsum(np.sort(lam**m))


def trace_powers(s: Spectrum, m_max: int) -> np.ndarray:
    """Trace powers for m = 1..m_max (index 0 holds m = 1)."""
    lam = np.asarray(s.ascending(), dtype=np.float64)
    out = np.empty(m_max)
    p = np.ones_like(lam)
    for m in range(1, m_max + 1):
        p = p * lam
        out[m - 1] = math.fsum(p)
    return out


def _pair_sums(n: int, tau: Fraction) -> list[list[Fraction]]:
    # B[jp][jc] = sum_l ((1 - tau) / (2 (1 + tau)))^{2l} (2 jc)! /
    #             (l! (l + jc - jp)! (2 jp - 2 l)!)
    r = ((1 - tau) / (2 * (1 + tau))) ** 2
    fact = [math.factorial(i) for i in range(4 * n + 2)]
    b = [[Fraction(0)] * n for _ in range(n)]
    for jp in range(n):
        for jc in range(n):
            total = Fraction(0)
            for l in range(jp + 1):
                if l + jc - jp < 0:
                    continue
                total += r**l * Fraction(fact[2 * jc], fact[l] * fact[l + jc - jp] * fact[2 * jp - 2 * l])
            b[jp][jc] = total
    return b


def trace_power_oracle(n: int, tau: float, m: int) -> float:
    """Tr(M_n(tau)^m) from the explicit finite multi-sum over index cycles.

    Sums over (j_1, ..., j_m) in {0..n-1}^m with j_0 = j_m of
    ``((1+tau)/2)^{m/2 + 2 sum j} prod_k B(j_{k-1}, j_k)``; every summand is
    nonnegative and the rational part is accumulated exactly. Restricted to
    ``m <= 3`` and ``n <= 12``.
    """
    if int(m) != m or m < 1 or int(n) != n or n < 1:
        raise ConfigurationError("n and m must be positive integers")
    if m > ORACLE_MAX_M or n > ORACLE_MAX_N:
        raise ConfigurationError(f"oracle budget is m <= {ORACLE_MAX_M}, n <= {ORACLE_MAX_N}")
    if not (-1.0 < tau <= 1.0):
        raise ConfigurationError("tau must lie in (-1, 1]")
    t = Fraction(float(tau))
    b = _pair_sums(n, t)
    h2 = ((1 + t) / 2) ** 2
    w = [h2**j for j in range(n)]
    total = Fraction(0)
    idx = [0] * m
    for flat in range(n**m):
        v = flat
        for i in range(m):
            idx[i] = v % n
            v //= n
        term = Fraction(1)
        for i in range(m):
            prev = idx[i - 1]
            cur = idx[i]
            term *= w[cur] * b[prev][cur]
            if term == 0:
                break
        total += term
    return float(total) * ((1.0 + float(tau)) / 2.0) ** (m / 2.0)


def trace_power_upper_bound(n: int, tau: float, m: int) -> float:
    """Explicit upper bound on Tr(M_n(tau)^m), valid for m >= (1+tau)/(1-tau)."""
    r = math.sqrt((1.0 + tau) / (1.0 - tau))
    return (
        0.25
        + r * math.sqrt(n / (math.pi * m)) * (1.0 + 2.0 / n)
        + 0.125 / (r * r) * math.sqrt(m / (math.pi * n)) * (1.0 + 1.0 / n)
    )


# ---------------------------------------------------------------------------
# Exact positive-definiteness certificate


def _terminating_sum(j: int, k: int, p: int, q: int) -> gmpy2.mpq:
    # 2F1(k-j+1/2, -(2j-2); 5/2-j-k; t) at t = p/q, by Horner in integers
    top = 2 * j - 2
    a_num, b_den = gmpy2.mpz(1), gmpy2.mpz(1)
    for i in range(top - 1, -1, -1):
        nu = (2 * (k - j) + 1 + 2 * i) * (i - top) * p
        de = (5 - 2 * (j + k) + 2 * i) * (i + 1) * q
        a_num, b_den = de * b_den + nu * a_num, de * b_den
    return gmpy2.mpq(a_num, b_den)


def rational_core(n: int, tau: float) -> list[list[gmpy2.mpq]]:
    """Exact rational matrix R with ``M = sqrt((1+tau)/2) D R D``.

    ``D = diag(1 / sqrt((2j-2)!))`` and tau is read as its exact binary
    fraction, so M is positive definite exactly when R is.
    """
    p, q = Fraction(float(tau)).as_integer_ratio()
    t = gmpy2.mpq(p, q)
    r = [[None] * n for _ in range(n)]
    for j in range(1, n + 1):
        for k in range(j, n + 1):
            m = j + k - 2
            g = gmpy2.mpq(gmpy2.fac(2 * m), 4**m * gmpy2.fac(m))
            r[j - 1][k - 1] = r[k - 1][j - 1] = (1 - t) ** (k - j) * g * _terminating_sum(j, k, p, q)
    return r


@dataclass(frozen=True)
class PositivityCertificate:
    """Evidence that every eigenvalue of M_n(tau) is positive.

    ``method`` is ``"eigenvalue"`` when the computed smallest eigenvalue
    exceeds the solver's absolute error bound ``error_bound``, and
    ``"exact_ldl"`` when positivity rests on an exact rational LDL^T of the
    core matrix (Sylvester's criterion). In the latter case
    ``pivots_closed_form`` records whether every pivot equals
    ``((1+tau)/2)^{2k-2} (2k-2)!``, the value implied by
    ``det M_k = ((1+tau)/2)^{k(2k-1)/2}``.
    """

    n: int
    tau: float
    method: str
    positive: bool
    lambda_min: float
    error_bound: float
    pivots_closed_form: bool | None = None


def exact_pivots(n: int, tau: float) -> list[gmpy2.mpq]:
    """LDL^T pivots of :func:`rational_core`, computed in exact arithmetic."""
    a = rational_core(n, tau)
    pivots = []
    for k in range(n):
        d = a[k][k]
        pivots.append(d)
        if d <= 0:
            break
        ak = a[k]
        for i in range(k + 1, n):
            f = a[i][k] / d
            if f:
                ai = a[i]
                for j in range(k + 1, i + 1):
                    ai[j] -= f * ak[j]
        for i in range(k + 1, n):
            for j in range(k + 1, i):
                a[j][i] = a[i][j]
    return pivots


def certify_positive(s: Spectrum) -> PositivityCertificate:
    """Certify ``lambda_n > 0`` for the matrix behind ``s``.

    The double path resolves eigenvalues only to about ``n eps lambda_1``
    in absolute terms; below that the exact pivot route is used.
    """
    lam_min = float(s.lambdas[-1])
    bound = 0.0 if s.precision == "double_double" else EIG_ERROR_FACTOR * s.n * np.finfo(float).eps * float(s.lambdas[0])
    if s.tau == 1.0 or lam_min > bound:
        return PositivityCertificate(s.n, s.tau, "eigenvalue", lam_min > bound, lam_min, bound)
    pivots = exact_pivots(s.n, s.tau)
    ok = len(pivots) == s.n and all(d > 0 for d in pivots)
    t = gmpy2.mpq(*Fraction(float(s.tau)).as_integer_ratio())
    h = (1 + t) / 2
    closed = ok and all(d == h ** (2 * k) * gmpy2.fac(2 * k) for k, d in enumerate(pivots))
    return PositivityCertificate(s.n, s.tau, "exact_ldl", ok, lam_min, bound, closed)
