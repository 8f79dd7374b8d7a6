"""Numerical checks of the analytic identities the package relies on.

Each check returns an :class:`IdentityResult`; :func:`run_all` collects the
full report used by the ``identities`` command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .asymptotics import c_alpha, combinatorial_identity_check, d_alpha
from .errors import ConfigurationError
from .genmatrix import build
from .probabilities import _fn_betas, closed_form_p_zero, prob_zero_forrester_nagao
from .specfun import quadrature

# Cramer's bound |H_j(x)| <= CRAMER 2^{j/2} sqrt(j!) exp(x^2/2)
CRAMER = 1.086435


@dataclass(frozen=True)
class IdentityResult:
    name: str
    params: dict
    lhs: float
    rhs: float
    error: float
    tolerance: float
    relative: bool = True

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "error": self.error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _result(name, params, lhs, rhs, tol, relative=True) -> IdentityResult:
    err = abs(lhs - rhs)
    if relative and rhs != 0.0:
        err /= abs(rhs)
    return IdentityResult(name, params, float(lhs), float(rhs), float(err), tol, relative)


# ---------------------------------------------------------------------------
# Mehler even-index sum


def mehler_even_terms(tau: float, x: float, y: float) -> int:
    """Number of terms J making the Cramer tail bound fall below 1e-14 of the limit."""
    target = mehler_even_limit(tau, x, y)
    bound0 = CRAMER**2 * math.exp(0.5 * (x * x + y * y)) / (1.0 - tau)
    # tail after index J is at most bound0 * tau^{J+1}
    j = math.log(1e-14 * target / bound0) / math.log(tau) - 1.0
    return max(2, int(math.ceil(j)))


def mehler_even_sum(tau: float, x: float, y: float, J: int) -> float:
    """``sum_{j <= J, j even} (tau/2)^j / j! H_j(x) H_j(y)`` with physicists' Hermite H.

    Uses ``u_j = (tau/2)^{j/2} H_j / sqrt(j!)``, which obeys
    ``u_{j+1} = x sqrt(2 tau / (j+1)) u_j - tau sqrt(j / (j+1)) u_{j-1}``.
    """
    if not (0.0 < tau < 1.0):
        raise ConfigurationError("Mehler sum requires tau in (0, 1)")
    ux0, ux1 = 1.0, x * math.sqrt(2.0 * tau)
    uy0, uy1 = 1.0, y * math.sqrt(2.0 * tau)
    terms = [1.0]
    for j in range(1, J):
        f = math.sqrt(2.0 * tau / (j + 1))
        g = tau * math.sqrt(j / (j + 1))
        ux0, ux1 = ux1, x * f * ux1 - g * ux0
        uy0, uy1 = uy1, y * f * uy1 - g * uy0
        if (j + 1) % 2 == 0:
            terms.append(ux1 * uy1)
    return math.fsum(terms)


def mehler_even_limit(tau: float, x: float, y: float) -> float:
    """``(1 - tau^2)^{-1/2} exp(-tau^2 (x^2+y^2) / (1-tau^2)) cosh(2 tau x y / (1-tau^2))``."""
    d = 1.0 - tau * tau
    return math.exp(-tau * tau * (x * x + y * y) / d) * math.cosh(2.0 * tau * x * y / d) / math.sqrt(d)


def check_mehler(tau: float, x: float, y: float, tol: float = 1e-9) -> IdentityResult:
    J = mehler_even_terms(tau, x, y)
    return _result("mehler_even", {"tau": tau, "x": x, "y": y, "J": J}, mehler_even_sum(tau, x, y, J), mehler_even_limit(tau, x, y), tol)


# ---------------------------------------------------------------------------
# Gaussian-cosh product integral


def gaussian_cosh_integral(k: int, x0: float, xk: float, order: int = 160) -> float:
    """``int_{R_+^{k-1}} exp(-sum x_j^2) prod_{j=1}^k cosh(x_{j-1} x_j)`` by Gauss-Hermite.

    The integrand is even in each interior variable, so the half-line
    integral is ``2^{-(k-1)}`` times the tensor Gauss-Hermite sum over R^{k-1}.
    """
    if k not in (2, 3):
        raise ConfigurationError("k must be 2 or 3")
    rule = quadrature("gauss_hermite", order)
    t, w = rule.nodes, rule.weights
    if k == 2:
        return 0.5 * math.fsum(w * np.cosh(x0 * t) * np.cosh(t * xk))
    t1 = t[:, None]
    t2 = t[None, :]
    vals = (w[:, None] * w[None, :]) * np.cosh(x0 * t1) * np.cosh(t1 * t2) * np.cosh(t2 * xk)
    return 0.25 * math.fsum(vals.ravel())


def gaussian_cosh_closed_form(k: int, x0: float, xk: float) -> float:
    return k**-0.5 * (math.pi / 2.0) ** ((k - 1) / 2.0) * math.exp((k - 1) * (x0 * x0 + xk * xk) / (2.0 * k)) * math.cosh(x0 * xk / k)


def check_gaussian_cosh(k: int, x0: float, xk: float, tol: float = 1e-8) -> IdentityResult:
    return _result("gaussian_cosh", {"k": k, "x0": x0, "xk": xk}, gaussian_cosh_integral(k, x0, xk), gaussian_cosh_closed_form(k, x0, xk), tol)


# ---------------------------------------------------------------------------
# beta integrals of the determinantal route for p_{2n,0}


def beta_quadrature(a: int, b: int, tau: float) -> float:
    """``-4 Im int_R dx int_0^inf dy e^{y^2-x^2} erfc(c y) (x+iy)^{a-1} (x-iy)^{b-1}``, c = sqrt(2/(1-tau)).

    The polynomial is expanded binomially; x-moments are Gamma values and the
    y-moments ``int_0^inf y^d erfcx(c y) exp((1-c^2) y^2) dy`` use adaptive
    quadrature.
    """
    if not (-1.0 < tau < 1.0):
        raise ConfigurationError("tau must lie in (-1, 1)")
    c = math.sqrt(2.0 / (1.0 - tau))
    p, q = a - 1, b - 1
    ymom = {}

    def y_moment(d):
        if d not in ymom:
            f = lambda y: y**d * special.erfcx(c * y) * math.exp((1.0 - c * c) * y * y)
            ymom[d] = integrate.quad(f, 0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        return ymom[d]

    total = 0.0
    for r in range(p + 1):
        for s in range(q + 1):
            ex = p - r + q - s
            if ex % 2:
                continue
            # (i y)^r (-i y)^s = i^{r} (-i)^{s} y^{r+s}
            phase = (1j) ** r * (-1j) ** s
            if phase.imag == 0.0:
                continue
            coef = math.comb(p, r) * math.comb(q, s) * phase.imag
            total += coef * math.gamma((ex + 1) / 2.0) * y_moment(r + s)
    return -4.0 * total


def check_beta(a: int, b: int, tau: float, tol: float = 1e-9) -> IdentityResult:
    return _result("beta_closed_form", {"a": a, "b": b, "tau": tau}, beta_quadrature(a, b, tau), _fn_betas(tau)[(a, b)], tol)


def check_forrester_nagao(n: int, tau: float, tol: float = 1e-10) -> list[IdentityResult]:
    """Determinantal p_{2n,0} against the closed form and against det(I - M)."""
    fn = prob_zero_forrester_nagao(n, tau)
    m = np.asarray(build(n, tau).entries)
    det = float(np.linalg.det(np.eye(n) - m))
    params = {"n": n, "tau": tau}
    return [
        _result("fn_vs_closed_form", params, fn, closed_form_p_zero(n, tau), tol),
        _result("fn_vs_det", params, fn, det, tol),
    ]


# ---------------------------------------------------------------------------
# Constant representations


def check_c_alpha(alpha: float, method: str, tol: float = 1e-10) -> IdentityResult:
    return _result(f"c_alpha_{method}", {"alpha": alpha}, c_alpha(alpha, method), c_alpha(alpha, "bessel"), tol)


def check_d_alpha(alpha: float, tol: float = 1e-8) -> IdentityResult:
    return _result("d_alpha_integral", {"alpha": alpha}, d_alpha(alpha, "integral"), d_alpha(alpha, "series"), tol)


def check_combinatorial(m: int, k: int) -> IdentityResult:
    ok = combinatorial_identity_check(m, k)
    return IdentityResult("combinatorial", {"m": m, "k": k}, float(ok), 1.0, 0.0 if ok else 1.0, 0.0, False)


# ---------------------------------------------------------------------------


def run_all() -> list[IdentityResult]:
    """Every identity check on its default grid."""
    out = []
    for tau in (0.1, 0.5, 0.9):
        for x, y in ((0.0, 0.0), (0.3, -1.2), (1.0, 1.0), (2.0, 1.5)):
            out.append(check_mehler(tau, x, y))
    for k in (2, 3):
        for x0, xk in ((0.0, 0.0), (0.5, 1.0), (1.5, -0.7), (2.0, 2.0)):
            out.append(check_gaussian_cosh(k, x0, xk))
    for alpha in np.linspace(0.0, 2.0, 9):
        out.append(check_c_alpha(float(alpha), "series"))
    for alpha in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0):
        out.append(check_c_alpha(alpha, "erf_integral"))
    for alpha in (0.5, 1.0, 2.0, 4.0):
        out.append(check_d_alpha(alpha))
    for m in range(1, 5):
        for k in range(0, 7):
            out.append(check_combinatorial(m, k))
    for tau in (0.0, 0.25, 0.5, 0.9):
        for n in (1, 2):
            out.extend(check_forrester_nagao(n, tau))
    for tau in (0.0, 0.5):
        for a, b in ((1, 2), (1, 4), (3, 2), (3, 4)):
            out.append(check_beta(a, b, tau))
    return out
