"""Finite-N checks of the large-deviation and generating-function limits.

log p_{N,0} is sandwiched between the truncated trace-power series and the
same series minus an eigenvalue-wise remainder bound; the estimates below
report all three together with the limiting constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .asymptotics import Regime, genfun_limit, ldp_rate, weak_tau
from .errors import ConfigurationError
from .probabilities import distribution, log_generating, log_p_zero_truncated, remainder_bound
from .spectrum import Spectrum, compute_spectrum

K_CAP = 100_000


def default_truncation(N: int) -> int:
    """``ceil(10 sqrt(N) log N)``, at least 1 and capped at 10^5."""
    if N < 2:
        return 1
    return int(min(K_CAP, max(1, math.ceil(10.0 * math.sqrt(N) * math.log(N)))))


@dataclass(frozen=True)
class LdpEstimate:
    """Scaled log p_{N,0} with its truncation sandwich and the limit.

    Values are divided by sqrt(N) (strong) or N (weak). In the weak regime
    ``limit`` is the upper bound -d(alpha), flagged by ``limit_is_bound``.
    """

    N: int
    regime: Regime
    param: float
    scaled_log_p: float
    limit: float
    K_used: int
    scaled_truncated: float
    scaled_remainder: float
    remainder_bound: float
    limit_is_bound: bool = False

    def __post_init__(self):
        if not math.isfinite(self.scaled_log_p):
            raise ValueError("scaled_log_p must be finite")

    @property
    def sandwich_holds(self) -> bool:
        """``truncated >= log p >= truncated - bound`` (scaled)."""
        slack = 1e-12 * max(1.0, abs(self.scaled_truncated))
        lo = self.scaled_truncated - self.remainder_bound
        return self.scaled_truncated + slack >= self.scaled_log_p >= lo - slack


def ldp_estimate(s: Spectrum, regime, param: float, K: int | None = None) -> LdpEstimate:
    """Large-deviation estimate for one spectrum.

    Examples
    --------
    >>> import numpy as np
    >>> e = ldp_estimate(Spectrum(1, 0.0, np.array([2**-0.5])), "strong", 0.0, 50)
    >>> round(e.scaled_log_p, 6)
    -0.86829
    """
    regime = Regime(regime)
    if regime is Regime.strong:
        if abs(s.tau - param) > 0.0:
            raise ConfigurationError("spectrum tau differs from the strong-regime parameter")
    else:
        if not param > 0.0:
            raise ConfigurationError("weak regime requires alpha > 0")
        if abs(s.tau - weak_tau(s.n, param)) > 1e-15:
            raise ConfigurationError("spectrum tau differs from 1 - alpha^2 / N")
    N = s.N
    K = default_truncation(N) if K is None else int(K)
    if K < 1:
        raise ConfigurationError("K must be >= 1")
    scale = math.sqrt(N) if regime is Regime.strong else float(N)
    log_p = distribution(s).log_p_zero
    truncated, remainder = log_p_zero_truncated(s, K)
    bound = remainder_bound(s, K)
    return LdpEstimate(
        N=N,
        regime=regime,
        param=float(param),
        scaled_log_p=log_p / scale,
        limit=ldp_rate(regime, param),
        K_used=K,
        scaled_truncated=truncated / scale,
        scaled_remainder=remainder / scale,
        remainder_bound=bound / scale,
        limit_is_bound=regime is Regime.weak,
    )


def ldp_table(regime, param: float, n_grid, K: int | None = None) -> list[LdpEstimate]:
    """:func:`ldp_estimate` along a grid of n (N = 2n)."""
    regime = Regime(regime)
    out = []
    for n in n_grid:
        tau = param if regime is Regime.strong else weak_tau(int(n), param)
        out.append(ldp_estimate(compute_spectrum(int(n), tau), regime, param, K))
    return out


@dataclass(frozen=True)
class GenfunRow:
    n: int
    x: float
    finite: float
    limit: float
    error: float


@dataclass(frozen=True)
class GenfunTable:
    tau: float
    rows: list = field(default_factory=list)

    def errors_for(self, x: float) -> list[float]:
        return [r.error for r in self.rows if r.x == x]

    @property
    def shrinking(self) -> dict:
        """Per x: True when the error does not grow along the n grid and ends smaller (or is identically 0)."""
        out = {}
        for x in sorted({r.x for r in self.rows}):
            e = self.errors_for(x)
            if all(v == 0.0 for v in e):
                out[x] = True
            else:
                out[x] = all(b < a for a, b in zip(e, e[1:]))
        return out


def genfun_limit_check(n_grid, tau: float, x_grid) -> GenfunTable:
    """(1/sqrt(N)) log sum_k p_{N,2k} x^k against its strong-regime limit."""
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigurationError("n_grid must be strictly ascending")
    rows = []
    for n in n_grid:
        s = compute_spectrum(n, tau)
        for x in x_grid:
            x = float(x)
            lim = genfun_limit(tau, x)
            v = log_generating(s, x) / math.sqrt(2 * n)
            rows.append(GenfunRow(n, x, v, lim, abs(v - lim)))
    return GenfunTable(float(tau), rows)
