"""Double-double arithmetic kernels (about 32 significant digits).

Values are (hi, lo) pairs with |lo| <= ulp(hi)/2. Built on the error-free
transformations TwoSum and Dekker's TwoProd.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, inline="always")
def fast_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, inline="always")
def two_prod(a, b):
    p = a * b
    c = 134217729.0 * a
    ah = c - (c - a)
    al = a - ah
    c = 134217729.0 * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, inline="always")
def add(ahi, alo, bhi, blo):
    s, e = two_sum(ahi, bhi)
    t, f = two_sum(alo, blo)
    e += t
    s, e = fast_two_sum(s, e)
    e += f
    return fast_two_sum(s, e)


@njit(cache=True, inline="always")
def sub(ahi, alo, bhi, blo):
    return add(ahi, alo, -bhi, -blo)


@njit(cache=True, inline="always")
def mul_d(hi, lo, b):
    p, e = two_prod(hi, b)
    e += lo * b
    return fast_two_sum(p, e)


@njit(cache=True, inline="always")
def mul(ahi, alo, bhi, blo):
    p, e = two_prod(ahi, bhi)
    e += ahi * blo + alo * bhi
    return fast_two_sum(p, e)


@njit(cache=True, inline="always")
def div_d(hi, lo, b):
    q = hi / b
    p, e = two_prod(q, b)
    r = ((hi - p) - e + lo) / b
    return fast_two_sum(q, r)


@njit(cache=True, inline="always")
def div(ahi, alo, bhi, blo):
    q1 = ahi / bhi
    phi, plo = mul_d(bhi, blo, q1)
    rhi, rlo = sub(ahi, alo, phi, plo)
    q2 = rhi / bhi
    phi, plo = mul_d(bhi, blo, q2)
    rhi, rlo = sub(rhi, rlo, phi, plo)
    q3 = rhi / bhi
    s, e = fast_two_sum(q1, q2)
    return add(s, e, q3, 0.0)


@njit(cache=True, inline="always")
def sqrt(hi, lo):
    if hi <= 0.0:
        return 0.0, 0.0
    s = math.sqrt(hi)
    p, e = two_prod(s, s)
    r = ((hi - p) - e + lo) / (2.0 * s)
    return fast_two_sum(s, r)


def from_fraction(x: Fraction) -> tuple[float, float]:
    """Round an exact rational to the nearest double-double."""
    hi = float(x)
    lo = float(x - Fraction(hi))
    return hi, lo


PI_DD = from_fraction(
    Fraction("3.14159265358979323846264338327950288419716939937510582097494459")
)


@njit(cache=True)
def jacobi_eigenvalues(ahi, alo, max_sweeps):
    """Eigenvalues of a symmetric double-double matrix by cyclic Jacobi.

    Rotations are skipped once |a_pq| <= 1e-33 sqrt(|a_pp a_qq|), the
    stopping rule under which Jacobi computes eigenvalues to high relative
    accuracy. Returns (hi, lo, sweeps) with sweeps = -1 on non-convergence.
    """
    n = ahi.shape[0]
    dhi = np.empty(n)
    dlo = np.empty(n)
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq_h = ahi[p, q]
                apq_l = alo[p, q]
                if apq_h == 0.0:
                    continue
                scale = math.sqrt(abs(ahi[p, p] * ahi[q, q]))
                if abs(apq_h) <= 1e-33 * scale:
                    ahi[p, q] = 0.0
                    alo[p, q] = 0.0
                    ahi[q, p] = 0.0
                    alo[q, p] = 0.0
                    continue
                rotated = True
                # theta = (a_qq - a_pp) / (2 a_pq)
                dh, dl = sub(ahi[q, q], alo[q, q], ahi[p, p], alo[p, p])
                th, tl = div(dh, dl, 2.0 * apq_h, 2.0 * apq_l)
                # t = sign(theta) / (|theta| + sqrt(theta^2 + 1))
                sg = 1.0 if th >= 0.0 else -1.0
                th, tl = abs(th), tl * sg
                sh, sl = mul(th, tl, th, tl)
                sh, sl = add(sh, sl, 1.0, 0.0)
                sh, sl = sqrt(sh, sl)
                sh, sl = add(sh, sl, th, tl)
                t_h, t_l = div(1.0, 0.0, sh, sl)
                t_h, t_l = t_h * sg, t_l * sg
                # c = 1/sqrt(t^2+1), s = t c, tau = s / (1 + c)
                ch, cl = mul(t_h, t_l, t_h, t_l)
                ch, cl = add(ch, cl, 1.0, 0.0)
                ch, cl = sqrt(ch, cl)
                ch, cl = div(1.0, 0.0, ch, cl)
                s_h, s_l = mul(t_h, t_l, ch, cl)
                uh, ul = add(ch, cl, 1.0, 0.0)
                rh, rl = div(s_h, s_l, uh, ul)
                # diagonal update
                xh, xl = mul(t_h, t_l, apq_h, apq_l)
                ahi[p, p], alo[p, p] = sub(ahi[p, p], alo[p, p], xh, xl)
                ahi[q, q], alo[q, q] = add(ahi[q, q], alo[q, q], xh, xl)
                ahi[p, q] = 0.0
                alo[p, q] = 0.0
                ahi[q, p] = 0.0
                alo[q, p] = 0.0
                for r in range(n):
                    if r == p or r == q:
                        continue
                    gh, gl = ahi[r, p], alo[r, p]
                    hh, hl = ahi[r, q], alo[r, q]
                    # a_rp = g - s (h + g tau)
                    yh, yl = mul(gh, gl, rh, rl)
                    yh, yl = add(hh, hl, yh, yl)
                    yh, yl = mul(s_h, s_l, yh, yl)
                    nph, npl = sub(gh, gl, yh, yl)
                    # a_rq = h + s (g - h tau)
                    zh, zl = mul(hh, hl, rh, rl)
                    zh, zl = sub(gh, gl, zh, zl)
                    zh, zl = mul(s_h, s_l, zh, zl)
                    nqh, nql = add(hh, hl, zh, zl)
                    ahi[r, p] = nph
                    alo[r, p] = npl
                    ahi[p, r] = nph
                    alo[p, r] = npl
                    ahi[r, q] = nqh
                    alo[r, q] = nql
                    ahi[q, r] = nqh
                    alo[q, r] = nql
        if not rotated:
            for i in range(n):
                dhi[i] = ahi[i, i]
                dlo[i] = alo[i, i]
            return dhi, dlo, sweep
    return dhi, dlo, -1
