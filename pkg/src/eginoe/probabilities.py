"""Exact finite-N distribution of the number of real eigenvalues.

With eigenvalues lambda_i of the generating matrix,

    sum_k p_{2n,2k} z^k = prod_i ((1 - lambda_i) + lambda_i z),

so the probabilities are the coefficients of a product of nonnegative linear
factors. They are extracted by repeated convolution on mantissa/exponent
pairs, which never cancels and keeps probabilities far below the double
range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError, InvariantError
from .specfun import ScaledValue
from .spectrum import Spectrum

LAMBDA_SLACK = 1e-12
SUM_TOL = 1e-10


@dataclass(frozen=True)
class RealCountDistribution:
    """p_{N,2k} for k = 0..n, with tiny values kept as :class:`ScaledValue`."""

    N: int
    tau: float
    probs: tuple
    log_p_zero: float

    @property
    def n(self) -> int:
        return self.N // 2

    @property
    def counts(self) -> list[int]:
        """Numbers of real eigenvalues matching ``probs``: 0, 2, ..., N."""
        return list(range(0, self.N + 1, 2))

    def as_floats(self) -> np.ndarray:
        return np.array([p.to_float() for p in self.probs])

    def log_probs(self) -> np.ndarray:
        return np.array([p.log_abs() for p in self.probs])

    def total(self) -> float:
        return math.fsum(self.as_floats())


def _checked_lambdas(s: Spectrum) -> np.ndarray:
    lam = np.asarray(s.lambdas, dtype=np.float64)
    bad = (lam < -LAMBDA_SLACK) | (lam > 1.0 + LAMBDA_SLACK) | ~np.isfinite(lam)
    if bad.any():
        i = int(np.argmax(bad))
        raise InvariantError(f"eigenvalue {lam[i]!r} outside [0, 1] (n={s.n}, tau={s.tau})")
    return np.clip(lam, 0.0, 1.0)


@njit(cache=True)
def _convolve_scaled(lam, mant, expo):
    # mant/expo hold value = mant * 2**expo with mant in [0.5, 1) or 0
    n = lam.shape[0]
    mant[0] = 0.5
    expo[0] = 1
    for k in range(1, n + 1):
        mant[k] = 0.0
        expo[k] = 0
    for i in range(n):
        a = 1.0 - lam[i]
        b = lam[i]
        # process top-down so that index k-1 still holds the previous value
        for k in range(i + 1, -1, -1):
            # new[k] = a * old[k] + b * old[k-1]
            m1 = mant[k] * a
            e1 = expo[k]
            if k > 0:
                m2 = mant[k - 1] * b
                e2 = expo[k - 1]
            else:
                m2 = 0.0
                e2 = 0
            if m1 == 0.0:
                m, e = m2, e2
            elif m2 == 0.0:
                m, e = m1, e1
            elif e1 >= e2:
                d = e2 - e1
                m = m1 + (math.ldexp(m2, d) if d > -1100 else 0.0)
                e = e1
            else:
                d = e1 - e2
                m = m2 + (math.ldexp(m1, d) if d > -1100 else 0.0)
                e = e2
            if m == 0.0:
                mant[k] = 0.0
                expo[k] = 0
            else:
                fm, fe = math.frexp(m)
                mant[k] = fm
                expo[k] = e + fe


def distribution(s: Spectrum) -> RealCountDistribution:
    """Probabilities of 0, 2, ..., N real eigenvalues from the spectrum.

    Examples
    --------
    >>> import numpy as np
    >>> d = distribution(Spectrum(1, 0.0, np.array([2**-0.5])))
    >>> [round(p, 7) for p in d.as_floats()]
    [0.2928932, 0.7071068]
    """
    lam = _checked_lambdas(s)
    n = lam.shape[0]
    mant = np.empty(n + 1)
    expo = np.empty(n + 1, dtype=np.int64)
    _convolve_scaled(lam, mant, expo)
    probs = tuple(ScaledValue.from_parts(float(m), int(e)) for m, e in zip(mant, expo))
    with np.errstate(divide="ignore"):
        log_p_zero = math.fsum(np.log1p(-lam)) if np.all(lam < 1.0) else -math.inf
    dist = RealCountDistribution(2 * n, s.tau, probs, log_p_zero)
    total = dist.total()
    if abs(total - 1.0) > SUM_TOL:
        raise InvariantError(f"probabilities sum to {total!r}")
    return dist


# ---------------------------------------------------------------------------
# log p_{N,0} through trace powers


@njit(cache=True)
def _partial_log_series(lam, k):
    # per-eigenvalue (sum_{m<=K} lam^m / m, sum_{m>K} lam^m / m)
    n = lam.shape[0]
    head = np.empty(n)
    tail = np.empty(n)
    for i in range(n):
        x = lam[i]
        if x == 0.0:
            head[i] = 0.0
            tail[i] = 0.0
            continue
        # head, with early exit once the remaining geometric tail is negligible
        s = 0.0
        c = 0.0
        p = 1.0
        for m in range(1, k + 1):
            p *= x
            t = p / m
            y = s + t
            c += (s - y) + t
            s = y
            if x < 1.0 and t * x / (1.0 - x) < 1e-20 * s:
                break
        head[i] = s + c
        if x >= 1.0:
            tail[i] = math.inf
            continue
        full = -math.log1p(-x)
        first = x ** (k + 1) / (k + 1)
        if first / (1.0 - x) > 1e-3 * full:
            tail[i] = full - head[i]
        else:
            # direct tail series; converges geometrically
            s = 0.0
            c = 0.0
            p = x ** (k + 1)
            m = k + 1
            while True:
                t = p / m
                y = s + t
                c += (s - y) + t
                s = y
                if t * x / (1.0 - x) < 1e-20 * s or t == 0.0:
                    break
                p *= x
                m += 1
            tail[i] = s + c
    return head, tail


def log_p_zero_truncated(s: Spectrum, K: int) -> tuple[float, float]:
    """Truncated trace-power series for log p_{N,0} and its exact remainder.

    Returns ``(truncated, remainder)`` with
    ``truncated = -sum_{m<=K} Tr(M^m) / m`` and
    ``remainder = sum_i sum_{m>K} lambda_i^m / m`` so that
    ``truncated - remainder == log p_{N,0}``. The remainder is evaluated per
    eigenvalue either as ``-log(1 - lambda) - partial sum`` or, when that
    would cancel badly, by summing the tail series directly.
    """
    if int(K) != K or K < 1:
        raise ConfigurationError("K must be a positive integer")
    lam = _checked_lambdas(s)
    head, tail = _partial_log_series(lam, int(K))
    return -math.fsum(head), math.fsum(tail)


def remainder_bound(s: Spectrum, K: int) -> float:
    """Upper bound ``(2K+1)^{-1/2} sum_i lambda_i^{K+1} (1 - lambda_i)^{-1/2}`` on the remainder."""
    lam = _checked_lambdas(s)
    with np.errstate(divide="ignore"):
        terms = np.where(lam < 1.0, lam ** (K + 1) / np.sqrt(1.0 - lam), np.inf)
    return math.fsum(terms) / math.sqrt(2.0 * K + 1.0)


def eigenvalue_remainder(lam: float, K: int) -> float:
    """``-log(1 - lambda) - sum_{m<=K} lambda^m / m`` for a single eigenvalue."""
    head, tail = _partial_log_series(np.array([float(lam)]), int(K))
    return float(tail[0])


def log_generating(s: Spectrum, x: float) -> float:
    """``log sum_k p_{N,2k} x^k = sum_i log(1 + (x - 1) lambda_i)`` for x in [0, 2]."""
    if not (0.0 <= x <= 2.0):
        raise ConfigurationError("log_generating requires x in [0, 2]")
    lam = _checked_lambdas(s)
    arg = (x - 1.0) * lam
    if np.any(arg <= -1.0):
        return -math.inf
    return math.fsum(np.log1p(arg))


# ---------------------------------------------------------------------------
# Independent route for p_{2,0}, p_{4,0}


def _fn_betas(tau: float) -> dict:
    s = math.sqrt(1.0 + tau)
    r2 = math.sqrt(2.0)
    sp = math.sqrt(math.pi)
    return {
        (1, 2): 2.0 * sp * (r2 - s) / s,
        (3, 4): sp * (12 * r2 - 16 * r2 * s**2 + 12 * r2 * s**4 - 7 * s**5) / (2 * s**5),
        (3, 2): -sp * (2 * r2 - 2 * r2 * s**2 + s**3) / s**3,
        (1, 4): -sp * (2 * r2 - 6 * r2 * s**2 + 5 * s**3) / s**3,
    }


def prob_zero_forrester_nagao(n: int, tau: float) -> float:
    """p_{2n,0} for n in {1, 2} from an independent determinantal formula.

    ``p_{2n,0} = ((1+tau)/2)^{n(2n-1)/2} / (2^n prod_{l<=2n} Gamma(l/2))
    det[beta_{2j-1,2m}]`` with closed-form beta entries (``s = sqrt(1+tau)``).

    Examples
    --------
    >>> round(prob_zero_forrester_nagao(1, 0.0), 10) == round(1 - 2**0.5 / 2, 10)
    True
    """
    if n not in (1, 2):
        raise ConfigurationError("closed-form beta values are available for n in {1, 2} only")
    if not (-1.0 < tau < 1.0):
        raise ConfigurationError("tau must lie in (-1, 1)")
    b = _fn_betas(tau)
    if n == 1:
        det = b[(1, 2)]
    else:
        det = b[(1, 2)] * b[(3, 4)] - b[(1, 4)] * b[(3, 2)]
    gam = math.prod(math.gamma(l / 2.0) for l in range(1, 2 * n + 1))
    pref = ((1.0 + tau) / 2.0) ** (n * (2 * n - 1) / 2.0) / (2**n * gam)
    return pref * det


def closed_form_p_zero(n: int, tau: float) -> float:
    """Closed forms of p_{2,0} and p_{4,0} as functions of tau."""
    r = math.sqrt(2.0 * (1.0 + tau))
    if n == 1:
        return 1.0 - r / 2.0
    if n == 2:
        return (9 + 3 * tau + 3 * tau**2 + tau**3) / 8.0 - r * (11 + 2 * tau + 3 * tau**2) / 16.0
    raise ConfigurationError("closed forms exist for n in {1, 2} only")


def p_all_real(N: int, tau: float) -> float:
    """Probability that all N eigenvalues are real: ((1+tau)/2)^{N(N-1)/4}."""
    return ((1.0 + tau) / 2.0) ** (N * (N - 1) / 4.0)


def log_p_all_real(N: int, tau: float) -> float:
    """Natural log of :func:`p_all_real`, free of underflow."""
    return N * (N - 1) / 4.0 * math.log((1.0 + tau) / 2.0)
