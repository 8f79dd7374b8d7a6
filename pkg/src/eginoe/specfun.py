"""Special functions, overflow-safe Hermite recurrences and Gaussian quadrature.

The Hermite family used throughout the package is the monic polynomial
sequence with variance parameter ``tau``,

    C_0 = 1,  C_1 = x,  C_{k+1}(x) = x C_k(x) - tau k C_{k-1}(x),

which reduces to ``x**k`` at ``tau = 0`` and stays regular for ``tau < 0``.
Its degree-normalised companion ``C_k / sqrt(k!)`` obeys a recurrence whose
values remain of moderate size, and is evaluated with a separate base-2
exponent so that very high degrees do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from numba import njit
from scipy import integrate as _integrate
from scipy import special as _sp

from ._linalg import symmetric_tridiagonal_eigenvalues
from .errors import ConfigurationError, NumericalError

MAX_DEGREE = 10_000
MAX_QUADRATURE_ORDER = 10_000
LN2 = math.log(2.0)



# ---------------------------------------------------------------------------
# Scaled values


@dataclass(frozen=True)
class ScaledValue:
    """Real number stored as ``mantissa * 2**exponent``.

    The mantissa lies in [1, 2) or (-2, -1]; zero is (0.0, 0).
    """

    mantissa: float
    exponent: int

    def __post_init__(self):
        m = self.mantissa
        if m == 0.0:
            if self.exponent != 0:
                raise ValueError("zero must carry exponent 0")
        elif not (1.0 <= abs(m) < 2.0):
            raise ValueError(f"mantissa {m!r} not normalised")

    @classmethod
    def from_float(cls, x: float) -> "ScaledValue":
        if not math.isfinite(x):
            raise ValueError("ScaledValue requires a finite value")
        if x == 0.0:
            return cls(0.0, 0)
        m, e = math.frexp(x)
        return cls(2.0 * m, e - 1)

    @classmethod
    def from_parts(cls, value: float, exponent: int) -> "ScaledValue":
        """Normalise ``value * 2**exponent`` for any finite ``value``."""
        if value == 0.0:
            return cls(0.0, 0)
        m, e = math.frexp(value)
        return cls(2.0 * m, int(exponent) + e - 1)

    @classmethod
    def from_log(cls, log_abs: float, sign: float = 1.0) -> "ScaledValue":
        """Build from natural log of the magnitude."""
        if log_abs == -math.inf:
            return cls(0.0, 0)
        t = log_abs / LN2
        e = math.floor(t)
        m = 2.0 ** (t - e)
        if m >= 2.0:
            m, e = 1.0, e + 1
        return cls(math.copysign(m, sign), int(e))

    def to_float(self) -> float:
        return math.ldexp(self.mantissa, self.exponent)

    def log_abs(self) -> float:
        if self.mantissa == 0.0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.exponent * LN2

    def __mul__(self, other: "ScaledValue") -> "ScaledValue":
        return ScaledValue.from_parts(self.mantissa * other.mantissa, self.exponent + other.exponent)

    def __float__(self) -> float:
        return self.to_float()


# ---------------------------------------------------------------------------
# Elementary special functions


def _check_degree(k: int) -> None:
    if k < 0 or int(k) != k:
        raise ConfigurationError(f"degree must be a nonnegative integer, got {k!r}")
    if k > MAX_DEGREE:
        raise ConfigurationError(f"degree {k} exceeds configured maximum {MAX_DEGREE}")


def _check_tau(tau: float) -> None:
    if not (-1.0 < tau <= 1.0):
        raise ConfigurationError(f"tau must lie in (-1, 1], got {tau!r}")


def erfc(x):
    """Complementary error function (scalar or array)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(x)):
        raise ConfigurationError("erfc argument is NaN")
    out = _sp.erfc(x)
    return float(out) if out.ndim == 0 else out


def log_gamma(x):
    """log Gamma(x) for x > 0 (scalar or array)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)):
        raise ConfigurationError("log_gamma requires x > 0")
    out = _sp.gammaln(x)
    return float(out) if out.ndim == 0 else out


def bessel_i_scaled(nu: int, x):
    """Exponentially scaled modified Bessel function ``exp(-x) I_nu(x)``, nu in {0, 1}."""
    if nu not in (0, 1):
        raise ConfigurationError("bessel_i_scaled supports nu in {0, 1}")
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x >= 0)):
        raise ConfigurationError("bessel_i_scaled requires x >= 0")
    out = _sp.ive(nu, x)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Hermite recurrences


def scaled_hermite(k: int, tau: float, x: float) -> float:
    """Monic Hermite polynomial ``C_k(x)`` with variance parameter ``tau``.

    Examples
    --------
    >>> scaled_hermite(2, 0.0, 3.0)
    9.0
    >>> scaled_hermite(2, 1.0, 0.0)
    -1.0
    """
    _check_degree(k)
    _check_tau(tau)
    if k == 0:
        return 1.0
    prev, cur = 1.0, float(x)
    for j in range(1, k):
        prev, cur = cur, x * cur - tau * j * prev
    if not math.isfinite(cur):
        raise NumericalError(f"C_{k}({x}) overflows double range; use normalized_hermite_weighted")
    return cur


@njit(cache=True)
def _normalized_hermite_table(x, tau, kmax, log_prefactor, step, out):
    # out[i, q] = exp(log_prefactor[q]) * C_{i*step}(x_q) / sqrt((i*step)!)
    nq = x.shape[0]
    ln2 = 0.6931471805599453
    for q in range(nq):
        xq = x[q]
        prev = 0.0
        cur = 1.0
        e = 0
        lp = log_prefactor[q]
        for k in range(kmax + 1):
            if k % step == 0:
                i = k // step
                if cur == 0.0:
                    out[i, q] = 0.0
                else:
                    t = (lp + e * ln2 + math.log(abs(cur))) / ln2
                    if t < -1100.0:
                        out[i, q] = 0.0
                    else:
                        ie = math.floor(t)
                        out[i, q] = math.copysign(math.ldexp(2.0 ** (t - ie), ie), cur)
            if k == kmax:
                break
            nxt = (xq * cur - tau * math.sqrt(k) * prev) / math.sqrt(k + 1.0)
            prev = cur
            cur = nxt
            a = max(abs(cur), abs(prev))
            if a > 1.157920892373162e77:
                cur *= 8.636168555094445e-78
                prev *= 8.636168555094445e-78
                e += 256
            elif a < 8.636168555094445e-78 and a > 0.0:
                cur *= 1.157920892373162e77
                prev *= 1.157920892373162e77
                e -= 256


def normalized_hermite_table(x, tau: float, kmax: int, log_prefactor=None, step: int = 1) -> np.ndarray:
    """Table of ``exp(log_prefactor) * C_k(x) / sqrt(k!)`` for k = 0, step, ..., kmax.

    Rows index degree, columns index the points ``x``. Values too small for
    double precision flush to zero; intermediate magnitudes are exponent
    tracked, so no overflow occurs for the supported degrees.
    """
    _check_degree(kmax)
    _check_tau(tau)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if log_prefactor is None:
        log_prefactor = np.zeros_like(x)
    log_prefactor = np.ascontiguousarray(log_prefactor, dtype=np.float64)
    out = np.empty((kmax // step + 1, x.shape[0]))
    _normalized_hermite_table(x, float(tau), int(kmax), log_prefactor, int(step), out)
    return out


@njit(cache=True)
def _normalized_hermite_scaled(k, tau, x):
    prev = 0.0
    cur = 1.0
    e = 0
    for j in range(k):
        nxt = (x * cur - tau * math.sqrt(j) * prev) / math.sqrt(j + 1.0)
        prev = cur
        cur = nxt
        a = max(abs(cur), abs(prev))
        if a > 1.157920892373162e77:
            cur *= 8.636168555094445e-78
            prev *= 8.636168555094445e-78
            e += 256
        elif a < 8.636168555094445e-78 and a > 0.0:
            cur *= 1.157920892373162e77
            prev *= 1.157920892373162e77
            e -= 256
    return cur, e


def normalized_hermite_weighted(k: int, tau: float, x: float) -> ScaledValue:
    """``exp(-x**2 / (2 (1 + tau))) * C_k(x) / sqrt(k!)`` as a :class:`ScaledValue`.

    Examples
    --------
    >>> round(normalized_hermite_weighted(2, 0.0, 1.0).to_float(), 6)
    0.428882
    """
    _check_degree(k)
    _check_tau(tau)
    cur, e = _normalized_hermite_scaled(int(k), float(tau), float(x))
    if cur == 0.0:
        return ScaledValue(0.0, 0)
    m, e2 = math.frexp(cur)
    # fold the Gaussian weight into the exponent, keeping the mantissa exact
    lw = -x * x / (2.0 * (1.0 + tau)) / LN2
    iw = math.floor(lw)
    mant = 2.0 * m * 2.0 ** (lw - iw)
    return ScaledValue.from_parts(mant, e + e2 - 1 + iw)


# ---------------------------------------------------------------------------
# Zeta and polylogarithm


@lru_cache(maxsize=1)
def zeta_three_halves() -> float:
    """Riemann zeta at 3/2.

    Direct summation over k <= 10**6 plus an Euler-Maclaurin tail; the
    neglected remainder is below 1e-30.
    """
    m = 1_000_000
    k = np.arange(1, m + 1, dtype=np.float64)
    head = math.fsum((k ** -1.5)[::-1])
    f = m**-1.5
    fp = -1.5 * m**-2.5
    fppp = -1.5 * 2.5 * 3.5 * m**-4.5
    tail = 2.0 / math.sqrt(m) - f / 2.0 - fp / 12.0 + fppp / 720.0
    return head + tail


def _polylog_positive(s: float, z: float) -> float:
    # 0 <= z <= 1
    if z == 0.0:
        return 0.0
    u = -math.log(z)
    if u > 0.25:
        # geometric decay; plain series
        total = []
        term_z = 1.0
        for k in range(1, 2000):
            term_z *= z
            t = term_z * k**-s
            total.append(t)
            if t < 1e-18 * total[0]:
                break
        return math.fsum(total)
    m = 1000
    k = np.arange(1, m + 1, dtype=np.float64)
    head = math.fsum((np.exp(-u * k) * k**-s)[::-1])
    fm = math.exp(-u * m) * m**-s
    g = -(u + s / m)
    g1 = s / m**2
    g2 = -2.0 * s / m**3
    fp = g * fm
    fppp = (g2 + 3.0 * g * g1 + g**3) * fm
    if s == 1.5:
        if u == 0.0:
            integral = 2.0 / math.sqrt(m)
        else:
            integral = 2.0 * math.exp(-u * m) / math.sqrt(m) - 2.0 * math.sqrt(math.pi * u) * math.erfc(math.sqrt(u * m))
    else:
        integral = math.sqrt(math.pi / u) * math.erfc(math.sqrt(u * m))
    return head + integral - fm / 2.0 - fp / 12.0 + fppp / 720.0


def polylog(s: float, z: float) -> float:
    """Polylogarithm ``Li_s(z)`` for s in {1/2, 3/2} and z in [-1, 1].

    Examples
    --------
    >>> round(polylog(1.5, -1.0), 6)
    -0.765147
    """
    if s not in (0.5, 1.5):
        raise ConfigurationError("polylog supports s in {1/2, 3/2}")
    if not (-1.0 <= z <= 1.0):
        raise ConfigurationError("polylog requires z in [-1, 1]")
    if s == 0.5 and z == 1.0:
        raise ConfigurationError("Li_{1/2}(1) diverges")
    if s == 1.5 and z == 1.0:
        return zeta_three_halves()
    if z >= 0.0:
        return _polylog_positive(s, z)
    return _polylog_negative(s, -z)


def _polylog_negative(s: float, x: float) -> float:
    # Li_s(-x) = -(x / Gamma(s)) int_0^inf t^{s-1} / (e^t + x) dt; with t = u^2
    # the integrand 2 u^{2s-1} / (e^{u^2} + x) is smooth for s in {1/2, 3/2}
    def f(u):
        return 2.0 * u ** (2.0 * s - 1.0) / (math.exp(u * u) + x) if u < 27.0 else 0.0

    value = _integrate.quad(f, 0.0, math.inf, epsabs=1e-17, epsrel=1e-13, limit=200)[0]
    return -x * value / math.gamma(s)


# ---------------------------------------------------------------------------
# Quadrature


class QuadratureKind(str, Enum):
    gauss_hermite = "gauss_hermite"
    gauss_legendre = "gauss_legendre"


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule with nodes ascending.

    ``log_weights`` is authoritative; ``weights`` is its exponential and
    underflows to zero for the outermost Hermite nodes once Q exceeds about
    350.
    """

    kind: QuadratureKind
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray
    order: int

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@njit(cache=True)
def _hermite_orthonormal_pair(t, q):
    # returns (p_q(t), p_{q-1}(t)) scaled by 2**-e, and e
    pi_quarter = 0.7511255444649425  # pi**-0.25
    prev = 0.0
    cur = pi_quarter
    e = 0
    for k in range(q):
        nxt = (math.sqrt(2.0) * t * cur - math.sqrt(k) * prev) / math.sqrt(k + 1.0)
        prev = cur
        cur = nxt
        a = max(abs(cur), abs(prev))
        if a > 1.157920892373162e77:
            cur *= 8.636168555094445e-78
            prev *= 8.636168555094445e-78
            e += 256
        elif a < 8.636168555094445e-78 and a > 0.0:
            cur *= 1.157920892373162e77
            prev *= 1.157920892373162e77
            e -= 256
    return cur, prev, e


@njit(cache=True)
def _polish_hermite(nodes, q, logw):
    for i in range(nodes.shape[0]):
        t = nodes[i]
        for _ in range(3):
            pq, pm, e = _hermite_orthonormal_pair(t, q)
            if pm == 0.0:
                break
            dt = pq / (math.sqrt(2.0 * q) * pm)
            t -= dt
            if abs(dt) <= 1e-17 * max(1.0, abs(t)):
                break
        nodes[i] = t
        pq, pm, e = _hermite_orthonormal_pair(t, q)
        logw[i] = -math.log(q) - 2.0 * (math.log(abs(pm)) + e * 0.6931471805599453)


@njit(cache=True)
def _legendre_pair(x, q):
    p0 = 1.0
    p1 = x
    if q == 0:
        return 1.0, 0.0
    for k in range(1, q):
        p0, p1 = p1, ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0)
    return p1, p0


@njit(cache=True)
def _polish_legendre(nodes, q, logw):
    for i in range(nodes.shape[0]):
        x = nodes[i]
        for _ in range(3):
            pq, pm = _legendre_pair(x, q)
            dp = q * (x * pq - pm) / (x * x - 1.0)
            dx = pq / dp
            x -= dx
            if abs(dx) <= 1e-17:
                break
        nodes[i] = x
        pq, pm = _legendre_pair(x, q)
        dp = q * (x * pq - pm) / (x * x - 1.0)
        logw[i] = math.log(2.0) - math.log(1.0 - x * x) - 2.0 * math.log(abs(dp))


def _symmetrize(nodes, logw):
    q = nodes.shape[0]
    half = q // 2
    nodes[:half] = -nodes[::-1][:half]
    logw[:half] = logw[::-1][:half]
    if q % 2 == 1:
        nodes[half] = 0.0


@lru_cache(maxsize=64)
def _quadrature_cached(kind: QuadratureKind, q: int) -> QuadratureRule:
    k = np.arange(1, q, dtype=np.float64)
    if kind is QuadratureKind.gauss_hermite:
        off = np.sqrt(k / 2.0)
    else:
        off = k / np.sqrt(4.0 * k * k - 1.0)
    nodes = np.sort(symmetric_tridiagonal_eigenvalues(np.zeros(q), off))
    logw = np.empty(q)
    if kind is QuadratureKind.gauss_hermite:
        _polish_hermite(nodes, q, logw)
    else:
        _polish_legendre(nodes, q, logw)
    _symmetrize(nodes, logw)
    if np.any(np.diff(nodes) <= 0):
        raise NumericalError(f"{kind.value} nodes not strictly increasing at Q={q}")
    for arr in (nodes, logw):
        arr.setflags(write=False)
    w = np.exp(logw)
    w.setflags(write=False)
    return QuadratureRule(kind, nodes, w, logw, q)


def quadrature(kind, q: int) -> QuadratureRule:
    """Gauss-Hermite (weight exp(-t^2)) or Gauss-Legendre rule with ``q`` nodes.

    Nodes come from the eigenvalues of the Jacobi matrix and are refined by
    Newton steps on the three-term recurrence; weights follow from the
    Christoffel-Darboux formula.
    """
    kind = QuadratureKind(kind)
    if int(q) != q or not (1 <= q <= MAX_QUADRATURE_ORDER):
        raise ConfigurationError(f"quadrature order must be in [1, {MAX_QUADRATURE_ORDER}], got {q!r}")
    return _quadrature_cached(kind, int(q))
