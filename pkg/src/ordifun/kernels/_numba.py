"""numba-compiled implementations of the kernels."""

import numpy as np
from numba import njit

from ordifun.kernels import _coeffs

_GOLDEN = np.uint64(_coeffs.GOLDEN)
_MIX1 = np.uint64(_coeffs.MIX1)
_MIX2 = np.uint64(_coeffs.MIX2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_ONE = np.uint64(1)

_A = np.array(_coeffs.A)
_B = np.array(_coeffs.B)
_C = np.array(_coeffs.C)
_D = np.array(_coeffs.D)
_E = np.array(_coeffs.E)
_F = np.array(_coeffs.F)


@njit(cache=True)
def _find_span(knots, order, x):
    n_basis = knots.size - order
    if x >= knots[n_basis]:
        return n_basis - 1
    lo = order - 1
    hi = n_basis
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if x < knots[mid]:
            hi = mid
        else:
            lo = mid
    return lo


@njit(cache=True)
def _design(knots, order, t, deriv):
    # Piegl & Tiller A2.3 (basis functions and derivatives) per point.
    p = order - 1
    n_basis = knots.size - order
    out = np.zeros((t.size, n_basis))
    if deriv > p:
        return out
    ndu = np.empty((order, order))
    a = np.empty((2, order))
    left = np.empty(order)
    right = np.empty(order)
    ders = np.empty((deriv + 1, order))
    for ip in range(t.size):
        x = t[ip]
        span = _find_span(knots, order, x)
        ndu[0, 0] = 1.0
        for j in range(1, order):
            left[j] = x - knots[span + 1 - j]
            right[j] = knots[span + j] - x
            saved = 0.0
            for r in range(j):
                ndu[j, r] = right[r + 1] + left[j - r]
                temp = ndu[r, j - 1] / ndu[j, r]
                ndu[r, j] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            ndu[j, j] = saved
        for j in range(order):
            ders[0, j] = ndu[j, p]
        for r in range(order):
            s1 = 0
            s2 = 1
            a[0, 0] = 1.0
            for k in range(1, deriv + 1):
                d = 0.0
                rk = r - k
                pk = p - k
                if r >= k:
                    a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                    d = a[s2, 0] * ndu[rk, pk]
                j1 = 1 if rk >= -1 else -rk
                j2 = k - 1 if r - 1 <= pk else p - r
                for j in range(j1, j2 + 1):
                    a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                    d += a[s2, j] * ndu[rk + j, pk]
                if r <= pk:
                    a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                    d += a[s2, k] * ndu[r, pk]
                ders[k, r] = d
                s1, s2 = s2, s1
        fac = 1.0
        for k in range(1, deriv + 1):
            fac *= p - k + 1
        for j in range(order):
            out[ip, span - p + j] = ders[deriv, j] * fac
    return out


def bspline_design(knots, order, t, deriv):
    knots = np.ascontiguousarray(knots, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64).ravel()
    return _design(knots, int(order), t, int(deriv))


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def _bits(key, counters):
    out = np.empty(counters.size, dtype=np.uint64)
    for i in range(counters.size):
        out[i] = _mix(key + (counters[i] + _ONE) * _GOLDEN)
    return out


def splitmix_bits(key, counters):
    counters = np.ascontiguousarray(counters, dtype=np.uint64).ravel()
    return _bits(np.uint64(key), counters)


@njit(cache=True)
def _horner(coeffs, r):
    acc = coeffs[coeffs.size - 1]
    for i in range(coeffs.size - 2, -1, -1):
        acc = acc * r + coeffs[i]
    return acc


@njit(cache=True)
def _ppnd16(p):
    out = np.empty(p.size)
    for i in range(p.size):
        q = p[i] - 0.5
        if abs(q) <= 0.425:
            r = 0.180625 - q * q
            out[i] = q * _horner(_A, r) / _horner(_B, r)
            continue
        r = p[i] if q < 0.0 else 1.0 - p[i]
        r = np.sqrt(-np.log(r))
        if r <= 5.0:
            r -= 1.6
            val = _horner(_C, r) / _horner(_D, r)
        else:
            r -= 5.0
            val = _horner(_E, r) / _horner(_F, r)
        out[i] = -val if q < 0.0 else val
    return out


def inverse_normal(p):
    p = np.asarray(p, dtype=np.float64)
    return _ppnd16(np.ascontiguousarray(p).ravel()).reshape(p.shape)


@njit(cache=True)
def _nearest(points, centers):
    out = np.empty(points.shape[0], dtype=np.int64)
    for i in range(points.shape[0]):
        best = np.inf
        arg = 0
        for g in range(centers.shape[0]):
            d = 0.0
            for k in range(points.shape[1]):
                diff = points[i, k] - centers[g, k]
                d += diff * diff
            if d < best:
                best = d
                arg = g
        out[i] = arg
    return out


def nearest_rows(points, centers):
    points = np.ascontiguousarray(points, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    return _nearest(points, centers)
