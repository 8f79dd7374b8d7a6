"""Compiled dense eigenvalue kernels.

Symmetric path: Householder tridiagonalisation followed by implicit-shift QL.
Nonsymmetric path: Householder reduction to upper Hessenberg form followed by
Francis double-shift QR iteration (eigenvalues only).

All kernels work in place on float64 arrays and report failures through an
integer status so that the Python wrappers can raise typed errors.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import NumericalError

EPS = np.finfo(np.float64).eps


@njit(cache=True)
def _tridiagonalize(a, d, e):
    # a: full symmetric matrix (overwritten). On exit d holds the diagonal and
    # e[0:n-1] the subdiagonal of the similar tridiagonal matrix, e[n-1] = 0.
    n = a.shape[0]
    v = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        m = n - k - 1
        alpha = a[k + 1, k]
        xnorm2 = 0.0
        for i in range(k + 2, n):
            xnorm2 += a[i, k] * a[i, k]
        d[k] = a[k, k]
        if xnorm2 == 0.0:
            e[k] = alpha
            continue
        beta = -math.copysign(math.sqrt(alpha * alpha + xnorm2), alpha)
        tau = (beta - alpha) / beta
        scale = 1.0 / (alpha - beta)
        v[0] = 1.0
        for i in range(1, m):
            v[i] = a[k + 1 + i, k] * scale
        e[k] = beta
        # p = tau * A22 v
        for i in range(m):
            s = 0.0
            row = k + 1 + i
            for j in range(m):
                s += a[row, k + 1 + j] * v[j]
            p[i] = tau * s
        pv = 0.0
        for i in range(m):
            pv += p[i] * v[i]
        half = 0.5 * tau * pv
        for i in range(m):
            p[i] -= half * v[i]
        # A22 -= v w^T + w v^T with w stored in p
        for i in range(m):
            row = k + 1 + i
            vi = v[i]
            wi = p[i]
            for j in range(m):
                a[row, k + 1 + j] -= vi * p[j] + wi * v[j]
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 1, n - 2]
    d[n - 1] = a[n - 1, n - 1]
    e[n - 1] = 0.0


@njit(cache=True)
def _tql_implicit(d, e, z, want_z, max_iter):
    # Eigenvalues of the symmetric tridiagonal matrix (d, e) by QL with
    # implicit Wilkinson shifts. e[i] couples i and i+1. If want_z, z is a row
    # vector rotated along so that it ends as the first row of the
    # eigenvector matrix (Golub-Welsch weights). Returns 0 on success.
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                return 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_z:
                    f = z[i + 1]
                    z[i + 1] = s * z[i] + c * f
                    z[i] = c * z[i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def symmetric_tridiagonal_eigenvalues(diag, offdiag, first_components=False, max_iter=60):
    """Eigenvalues (unsorted) of a symmetric tridiagonal matrix.

    With ``first_components`` the first component of every normalised
    eigenvector is returned as well.
    """
    d = np.array(diag, dtype=np.float64)
    n = d.shape[0]
    e = np.zeros(n)
    e[: n - 1] = offdiag
    z = np.zeros(n)
    z[0] = 1.0
    status = _tql_implicit(d, e, z, first_components, max_iter)
    if status != 0:
        raise NumericalError(f"QL iteration did not converge within {max_iter} sweeps per eigenvalue")
    if first_components:
        return d, z
    return d


def tridiagonalize(matrix):
    """Householder reduction of a symmetric matrix; returns (diag, offdiag)."""
    a = np.array(matrix, dtype=np.float64, order="C")
    n = a.shape[0]
    d = np.empty(n)
    e = np.empty(n)
    _tridiagonalize(a, d, e)
    return d, e[: n - 1].copy()


def symmetric_eigenvalues(matrix, max_iter=60):
    """All eigenvalues of a dense symmetric matrix, ascending."""
    d, e = tridiagonalize(matrix)
    w = symmetric_tridiagonal_eigenvalues(d, e, max_iter=max_iter)
    return np.sort(w)


# ---------------------------------------------------------------------------
# Nonsymmetric: Hessenberg + Francis double shift


@njit(cache=True)
def _hessenberg(a):
    n = a.shape[0]
    v = np.empty(n)
    w = np.empty(n)
    for k in range(n - 2):
        m = n - k - 1
        alpha = a[k + 1, k]
        xnorm2 = 0.0
        for i in range(k + 2, n):
            xnorm2 += a[i, k] * a[i, k]
        if xnorm2 == 0.0:
            continue
        beta = -math.copysign(math.sqrt(alpha * alpha + xnorm2), alpha)
        tau = (beta - alpha) / beta
        scale = 1.0 / (alpha - beta)
        v[0] = 1.0
        for i in range(1, m):
            v[i] = a[k + 1 + i, k] * scale
        a[k + 1, k] = beta
        for i in range(k + 2, n):
            a[i, k] = 0.0
        # left: rows k+1.., columns k+1..
        for j in range(k + 1, n):
            w[j] = 0.0
        for i in range(m):
            vi = v[i]
            row = k + 1 + i
            for j in range(k + 1, n):
                w[j] += vi * a[row, j]
        for i in range(m):
            f = tau * v[i]
            row = k + 1 + i
            for j in range(k + 1, n):
                a[row, j] -= f * w[j]
        # right: all rows, columns k+1..
        for r in range(n):
            s = 0.0
            for j in range(m):
                s += a[r, k + 1 + j] * v[j]
            s *= tau
            for j in range(m):
                a[r, k + 1 + j] -= s * v[j]


@njit(cache=True)
def _francis_qr(a, wr, wi, max_sweeps, disc_tol):
    # Eigenvalues of an upper Hessenberg matrix (overwritten) by the Francis
    # double-shift QR algorithm. Converged 2x2 blocks with discriminant
    # >= -disc_tol * scale are split into two real eigenvalues. Returns the
    # number of sweeps used, or -1 if max_sweeps was exceeded.
    n = a.shape[0]
    eps = 2.220446049250313e-16
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(a[i, j])
    nn = n - 1
    t = 0.0
    sweeps = 0
    x = 0.0
    y = 0.0
    w = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= eps * s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                scale = p * p + abs(w)
                z = math.sqrt(abs(q))
                x += t
                if q >= -disc_tol * scale:
                    if q < 0.0:
                        z = 0.0
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = z
                    wi[nn] = -z
                nn -= 2
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return -1
            if its > 0 and its % 10 == 0:
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            p = 0.0
            q = 0.0
            r = 0.0
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= eps * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s != 0.0:
                    if k == m:
                        if l != m:
                            a[k, k - 1] = -a[k, k - 1]
                    else:
                        a[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    for j in range(k, nn + 1):
                        p = a[k, j] + q * a[k + 1, j]
                        if k != nn - 1:
                            p += r * a[k + 2, j]
                            a[k + 2, j] -= p * z
                        a[k + 1, j] -= p * y
                        a[k, j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * a[i, k] + y * a[i, k + 1]
                        if k != nn - 1:
                            p += z * a[i, k + 2]
                            a[i, k + 2] -= p * r
                        a[i, k + 1] -= p * q
                        a[i, k] -= p
    return sweeps


@njit(cache=True)
def _count_real_batch(batch, disc_tol, out):
    # batch: (B, N, N) float64, overwritten
    nb = batch.shape[0]
    n = batch.shape[1]
    wr = np.empty(n)
    wi = np.empty(n)
    for b in range(nb):
        a = batch[b]
        _hessenberg(a)
        status = _francis_qr(a, wr, wi, 30 * n, disc_tol)
        if status < 0:
            out[b] = -1
            continue
        c = 0
        for i in range(n):
            if wi[i] == 0.0:
                c += 1
        out[b] = c


def hessenberg_eigenvalues(matrix, disc_tol=1e-11):
    """Eigenvalues of a real square matrix as (real parts, imaginary parts).

    Real eigenvalues carry an imaginary part of exactly zero; this comes from
    the block structure of the converged quasi-triangular form, not from a
    threshold on computed imaginary parts.
    """
    a = np.array(matrix, dtype=np.float64, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    wr = np.empty(n)
    wi = np.empty(n)
    if n == 0:
        return wr, wi
    _hessenberg(a)
    status = _francis_qr(a, wr, wi, 30 * n, disc_tol)
    if status < 0:
        raise NumericalError(f"Francis QR did not converge within {30 * n} sweeps")
    return wr, wi


def count_real_batch(batch, disc_tol=1e-11):
    """Real-eigenvalue counts for a stack of square matrices (overwritten)."""
    batch = np.ascontiguousarray(batch, dtype=np.float64)
    out = np.empty(batch.shape[0], dtype=np.int64)
    _count_real_batch(batch, disc_tol, out)
    return out
