"""Limit constants and large-N predictions, with finite-N convergence tables.

Two regimes are distinguished. In the strong regime ``tau`` is fixed and
counts scale like sqrt(N); in the weak regime ``tau = 1 - alpha**2 / N`` and
counts scale like N. The interpolating constants are

    c(alpha) = exp(-alpha^2/2) (I_0(alpha^2/2) + I_1(alpha^2/2)),
    d(alpha) = sum_{m>=1} c(sqrt(m) alpha) / (2m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import ConfigurationError
from .probabilities import distribution, log_generating
from .specfun import bessel_i_scaled, polylog, quadrature, zeta_three_halves
from .spectrum import Spectrum, compute_spectrum, trace_powers


class Regime(str, Enum):
    strong = "strong"
    weak = "weak"


def weak_tau(n: int, alpha: float) -> float:
    """Non-Hermiticity parameter ``1 - alpha^2 / N`` for matrix size N = 2n."""
    return 1.0 - alpha * alpha / (2.0 * n)


# ---------------------------------------------------------------------------
# c(alpha)


def _c_bessel(alpha: float) -> float:
    x = 0.5 * alpha * alpha
    return bessel_i_scaled(0, x) + bessel_i_scaled(1, x)


def _c_erf_integral(alpha: float, order: int = 400) -> float:
    # (2 / (alpha sqrt(pi))) int_0^1 erf(alpha sqrt(1 - s^2)) ds, with
    # s = sin(theta) removing the square-root endpoint behaviour
    if alpha == 0.0:
        return 1.0
    rule = quadrature("gauss_legendre", order)
    theta = (rule.nodes + 1.0) * (math.pi / 4.0)
    w = rule.weights * (math.pi / 4.0)
    cos = np.cos(theta)
    vals = np.array([math.erf(alpha * c) for c in cos]) * cos
    return 2.0 / (alpha * math.sqrt(math.pi)) * math.fsum(w * vals)


def _c_series(alpha: float) -> float:
    # sum_k binom(2k, k) / (4^k (k+1)!) (-alpha^2)^k
    a2 = alpha * alpha
    terms = []
    coef = 1.0  # binom(2k,k) / 4^k / (k+1)!
    power = 1.0
    for k in range(0, 200):
        t = coef * power
        terms.append(t)
        if k > 2 and abs(t) < 1e-18:
            break
        # binom(2k+2,k+1)/binom(2k,k) = (2k+1)(2k+2)/(k+1)^2 ; /4 ; /(k+2)
        coef *= (2 * k + 1) * (2 * k + 2) / ((k + 1) ** 2 * 4.0 * (k + 2))
        power *= -a2
    return math.fsum(terms)


def c_alpha(alpha: float, method: str = "bessel") -> float:
    """Interpolating constant c(alpha).

    Methods: ``bessel`` (default, exponentially scaled Bessel functions),
    ``erf_integral`` (Gauss-Legendre quadrature of the erf representation),
    ``series`` (alternating power series, alpha <= 2 only).

    Examples
    --------
    >>> c_alpha(0.0)
    1.0
    >>> round(c_alpha(1.0), 6)
    0.801456
    """
    if not alpha >= 0.0:
        raise ConfigurationError("c_alpha requires alpha >= 0")
    if method == "bessel":
        return float(_c_bessel(alpha))
    if method == "erf_integral":
        return _c_erf_integral(alpha)
    if method == "series":
        if alpha > 2.0:
            raise ConfigurationError("series method is restricted to alpha <= 2")
        return _c_series(alpha)
    raise ConfigurationError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# d(alpha)


def _hurwitz_tail(s: float, m: int) -> float:
    # sum_{k > m} k^{-s} by Euler-Maclaurin
    f = m**-s
    fp = -s * m ** (-s - 1.0)
    fppp = -s * (s + 1.0) * (s + 2.0) * m ** (-s - 3.0)
    return m ** (1.0 - s) / (s - 1.0) - f / 2.0 - fp / 12.0 + fppp / 720.0


def _d_series(alpha: float, terms: int = 100_000) -> float:
    m = np.arange(1, terms + 1, dtype=np.float64)
    x = 0.5 * m * alpha * alpha
    c = bessel_i_scaled(0, x) + bessel_i_scaled(1, x)
    head = math.fsum((c / (2.0 * m))[::-1])
    # large-argument expansion of c(sqrt(m) alpha) summed over m > terms:
    # c ~ (pi m alpha^2)^{-1/2} [2 - 1/(4x) - 3/(64x^2) - 15/(512x^3)]
    a2 = alpha * alpha
    tail = (
        2.0 * _hurwitz_tail(1.5, terms)
        - _hurwitz_tail(2.5, terms) / (2.0 * a2)
        - 3.0 * _hurwitz_tail(3.5, terms) / (16.0 * a2 * a2)
        - 15.0 * _hurwitz_tail(4.5, terms) / (64.0 * a2**3)
    ) / (2.0 * math.sqrt(math.pi) * alpha)
    return head + tail


def _d_integral(alpha: float, order: int = 2000) -> float:
    # -(2/pi) int_0^1 log(1 - exp(-alpha^2 s^2)) sqrt(1 - s^2) ds, split as
    # log(alpha^2 s^2) (integrated in closed form) plus the smooth
    # log(-expm1(-u)/u), u = alpha^2 s^2, integrated with s = sin(theta)
    analytic = (math.pi / 2.0) * (math.log(alpha) - math.log(2.0)) - math.pi / 4.0
    rule = quadrature("gauss_legendre", order)
    theta = (rule.nodes + 1.0) * (math.pi / 4.0)
    w = rule.weights * (math.pi / 4.0)
    s = np.sin(theta)
    u = alpha * alpha * s * s
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(u > 0.0, np.log(-np.expm1(-u) / np.where(u > 0.0, u, 1.0)), 0.0)
    smooth = math.fsum(w * g * np.cos(theta) ** 2)
    return -(2.0 / math.pi) * (analytic + smooth)


def d_alpha(alpha: float, method: str = "series") -> float:
    """Weak-regime large-deviation constant d(alpha).

    ``series`` sums c(sqrt(m) alpha)/(2m) for m <= 10^5 and adds an
    asymptotic tail; ``integral`` evaluates the equivalent log-integral.

    Examples
    --------
    >>> abs(d_alpha(1.0) - d_alpha(1.0, "integral")) < 1e-8
    True
    """
    if not alpha > 0.0:
        raise ConfigurationError("d_alpha requires alpha > 0")
    if method == "series":
        return _d_series(alpha)
    if method == "integral":
        return _d_integral(alpha)
    raise ConfigurationError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# CLT variance and predictions


def _ratio(tau: float) -> float:
    return math.sqrt((1.0 + tau) / (1.0 - tau))


def _check_param(regime: Regime, param: float) -> None:
    if regime is Regime.strong and not (-1.0 < param < 1.0):
        raise ConfigurationError("strong regime requires tau in (-1, 1)")
    if regime is Regime.weak and not param > 0.0:
        raise ConfigurationError("weak regime requires alpha > 0")


def clt_sigma2(regime, param: float) -> float:
    """Limiting variance of the standardised real-eigenvalue count.

    Examples
    --------
    >>> round(clt_sigma2("strong", 0.7), 7)
    0.5857864
    """
    regime = Regime(regime)
    _check_param(regime, param)
    if regime is Regime.strong:
        return 2.0 - math.sqrt(2.0)
    return 2.0 - 2.0 * c_alpha(math.sqrt(2.0) * param) / c_alpha(param)


@dataclass(frozen=True)
class AsymptoticPrediction:
    """A limit constant tagged with its regime.

    ``argument`` holds m for ``trace_limit`` and x for ``genfun_limit``.
    ``regime_exponent`` is 1 (strong) or 2 (weak). ``bound`` marks values
    that are one-sided bounds rather than limits.
    """

    regime: Regime
    param: float
    quantity: str
    value: float
    argument: float | None = None
    regime_exponent: int = 1
    bound: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite prediction for {self.quantity}")


def mean_count_coefficient(tau: float) -> float:
    """Coefficient of sqrt(N) in the strong-regime expected number of real eigenvalues."""
    return _ratio(tau) * math.sqrt(2.0 / math.pi)


def trace_limit(regime, param: float, m: int) -> float:
    """Limit of Tr(M^m)/sqrt(N) (strong) or Tr(M^m)/N (weak)."""
    regime = Regime(regime)
    _check_param(regime, param)
    if regime is Regime.strong:
        return math.sqrt((1.0 + param) / (1.0 - param) / (2.0 * math.pi * m))
    return 0.5 * c_alpha(math.sqrt(m) * param)


def ldp_rate(regime, param: float) -> float:
    """Limit of N^{-1/2} log p_{N,0} (strong) or upper bound on N^{-1} log p_{N,0} (weak)."""
    regime = Regime(regime)
    _check_param(regime, param)
    if regime is Regime.strong:
        return -_ratio(param) * zeta_three_halves() / math.sqrt(2.0 * math.pi)
    return -d_alpha(param)


def genfun_limit(tau: float, x: float) -> float:
    """Strong-regime limit of N^{-1/2} log sum_k p_{N,2k} x^k for x in [0, 2]."""
    if not (0.0 <= x <= 2.0):
        raise ConfigurationError("x must lie in [0, 2]")
    _check_param(Regime.strong, tau)
    return -_ratio(tau) * polylog(1.5, 1.0 - x) / math.sqrt(2.0 * math.pi)


def predictions(regime, param: float, m_values=(1, 2, 3), x_values=()) -> list[AsymptoticPrediction]:
    """All limit constants for one regime and parameter.

    Examples
    --------
    >>> p = predictions("strong", 0.0)
    >>> [round(q.value, 7) for q in p if q.quantity == "trace_limit"][0]
    0.3989423
    """
    regime = Regime(regime)
    _check_param(regime, param)
    out = []
    a = 1 if regime is Regime.strong else 2
    for m in m_values:
        out.append(AsymptoticPrediction(regime, param, "trace_limit", trace_limit(regime, param, m), m, a))
    if regime is Regime.strong:
        r = _ratio(param)
        out.append(AsymptoticPrediction(regime, param, "mean_count", mean_count_coefficient(param), None, a))
        out.append(AsymptoticPrediction(regime, param, "var_count", (2.0 - math.sqrt(2.0)) * r * math.sqrt(2.0 / math.pi), None, a))
        out.append(AsymptoticPrediction(regime, param, "clt_sigma2", clt_sigma2(regime, param), None, a))
        out.append(AsymptoticPrediction(regime, param, "ldp_rate", ldp_rate(regime, param), None, a))
        for x in x_values:
            out.append(AsymptoticPrediction(regime, param, "genfun_limit", genfun_limit(param, x), x, a))
    else:
        c1 = c_alpha(param)
        c2 = c_alpha(math.sqrt(2.0) * param)
        out.append(AsymptoticPrediction(regime, param, "mean_count", c1, None, a))
        out.append(AsymptoticPrediction(regime, param, "var_count", 2.0 * (c1 - c2), None, a))
        out.append(AsymptoticPrediction(regime, param, "clt_sigma2", clt_sigma2(regime, param), None, a))
        out.append(AsymptoticPrediction(regime, param, "ldp_rate", ldp_rate(regime, param), None, a, bound=True))
    return out


# ---------------------------------------------------------------------------
# Finite-N cumulants


def _cumulant_from_traces(traces, l: int) -> float:
    # 2^l sum_m ((-1)^{m+1}/m) sum_{nu_1+..+nu_m = l, nu_i >= 1} l!/prod nu_i! Tr(M^m)
    coeffs = []
    for m in range(1, l + 1):
        s = 0
        for nu in product(range(1, l + 1), repeat=m):
            if sum(nu) == l:
                s += math.factorial(l) // math.prod(math.factorial(v) for v in nu)
        coeffs.append(Fraction((-1) ** (m + 1) * s, m))
    terms = [float(c) * traces[m] for m, c in enumerate(coeffs)]
    return 2**l * math.fsum(terms)


def cumulants(s: Spectrum, l: int) -> float:
    """l-th cumulant (l <= 3) of the number of real eigenvalues.

    ``E = 2 Tr M``, ``Var = 4 (Tr M - Tr M^2)``,
    ``kappa_3 = 8 (Tr M - 3 Tr M^2 + 2 Tr M^3)``.
    """
    if l not in (1, 2, 3):
        raise ConfigurationError("cumulants are provided for l in {1, 2, 3}")
    t = trace_powers(s, 3)
    if l == 1:
        return 2.0 * t[0]
    if l == 2:
        return 4.0 * (t[0] - t[1])
    return 8.0 * math.fsum([t[0], -3.0 * t[1], 2.0 * t[2]])


def cumulant_general(s: Spectrum, l: int) -> float:
    """Cumulant from the composition-sum formula (any l; used for cross-checks)."""
    if int(l) != l or l < 1:
        raise ConfigurationError("l must be a positive integer")
    return _cumulant_from_traces(trace_powers(s, l), l)


# ---------------------------------------------------------------------------
# Combinatorial identity


COMBINATORIAL_MAX_M = 4
COMBINATORIAL_MAX_K = 6


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def combinatorial_identity_sum(m: int, k: int) -> Fraction:
    """Exact left-hand side of the coefficient identity for (x y)^k.

    Sums ``2^s m^{s-k} k! / (prod l_i! prod (l_i + M_i)! s!)`` over
    ``s + 2l = k``, compositions ``(l_i)`` of ``l`` and shifts ``M_i`` with
    ``sum M_i = 0`` (equivalently compositions ``r_i = l_i + M_i`` of ``l``).
    """
    if int(m) != m or int(k) != k or m < 1 or k < 0:
        raise ConfigurationError("m >= 1 and k >= 0 must be integers")
    if m > COMBINATORIAL_MAX_M or k > COMBINATORIAL_MAX_K:
        raise ConfigurationError(f"enumeration budget is m <= {COMBINATORIAL_MAX_M}, k <= {COMBINATORIAL_MAX_K}")
    total = Fraction(0)
    fk = math.factorial(k)
    for l in range(k // 2 + 1):
        s = k - 2 * l
        comps = list(_compositions(l, m))
        for ls in comps:
            pl = math.prod(math.factorial(v) for v in ls)
            for rs in comps:
                pr = math.prod(math.factorial(v) for v in rs)
                total += Fraction(2**s * fk, pl * pr * math.factorial(s)) / Fraction(m) ** (k - s)
    return total


def combinatorial_identity_check(m: int, k: int) -> bool:
    """True when the enumerated sum equals binomial(2k, k) exactly."""
    return combinatorial_identity_sum(m, k) == math.comb(2 * k, k)


# ---------------------------------------------------------------------------
# Convergence tables


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    tau: float
    finite: float
    limit: float
    abs_error: float
    rel_error: float


@dataclass(frozen=True)
class ConvergenceReport:
    quantity: str
    regime: Regime
    param: float
    argument: float | None
    rows: list = field(default_factory=list)

    @property
    def errors(self) -> list[float]:
        return [r.abs_error for r in self.rows]

    @property
    def monotone(self) -> bool:
        """True when the absolute error strictly decreases along the n grid."""
        e = self.errors
        return all(b < a for a, b in zip(e, e[1:]))


QUANTITIES = ("trace", "mean", "variance", "ldp", "genfun")


def finite_value(quantity: str, regime, param: float, n: int, argument=None, spectrum: Spectrum | None = None) -> tuple[float, float]:
    """Finite-N counterpart of a prediction, scaled by sqrt(N) (strong) or N (weak).

    Returns ``(value, tau)``.
    """
    regime = Regime(regime)
    tau = param if regime is Regime.strong else weak_tau(n, param)
    s = spectrum if spectrum is not None else compute_spectrum(n, tau)
    N = 2 * n
    scale = math.sqrt(N) if regime is Regime.strong else float(N)
    if quantity == "trace":
        m = int(argument)
        v = trace_powers(s, m)[m - 1]
    elif quantity == "mean":
        v = cumulants(s, 1)
    elif quantity == "variance":
        v = cumulants(s, 2)
    elif quantity == "ldp":
        v = distribution(s).log_p_zero
    elif quantity == "genfun":
        v = log_generating(s, float(argument))
    else:
        raise ConfigurationError(f"unknown quantity {quantity!r}")
    return v / scale, tau


def limit_value(quantity: str, regime, param: float, argument=None) -> float:
    regime = Regime(regime)
    if quantity == "trace":
        # trace limits are stated per 2n = N in both regimes
        return trace_limit(regime, param, int(argument))
    preds = {p.quantity: p for p in predictions(regime, param, m_values=())}
    if quantity == "mean":
        return preds["mean_count"].value
    if quantity == "variance":
        return preds["var_count"].value
    if quantity == "ldp":
        return preds["ldp_rate"].value
    if quantity == "genfun":
        if regime is not Regime.strong:
            raise ConfigurationError("generating-function limit is a strong-regime statement")
        return genfun_limit(param, float(argument))
    raise ConfigurationError(f"unknown quantity {quantity!r}")


def convergence_report(quantity: str, regime, param: float, n_grid, argument=None) -> ConvergenceReport:
    """Finite-N values against their limit along an ascending n grid.

    Examples
    --------
    >>> r = convergence_report("trace", "strong", 0.0, [5, 20], argument=1)
    >>> r.monotone
    True
    """
    regime = Regime(regime)
    _check_param(regime, param)
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigurationError("n_grid must be strictly ascending")
    lim = limit_value(quantity, regime, param, argument)
    rows = []
    for n in n_grid:
        v, tau = finite_value(quantity, regime, param, n, argument)
        err = abs(v - lim)
        rows.append(ConvergenceRow(n, tau, v, lim, err, err / abs(lim) if lim != 0 else (0.0 if err == 0 else math.inf)))
    return ConvergenceReport(quantity, regime, param, argument, rows)
