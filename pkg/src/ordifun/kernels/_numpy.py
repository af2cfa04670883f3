"""Vectorized numpy implementations of the kernels."""

import numpy as np

from ordifun.kernels import _coeffs

_GOLDEN = np.uint64(_coeffs.GOLDEN)
_MIX1 = np.uint64(_coeffs.MIX1)
_MIX2 = np.uint64(_coeffs.MIX2)


def _find_spans(knots, order, t):
    n_basis = knots.size - order
    spans = np.searchsorted(knots, t, side="right") - 1
    # closed-right convention on the last interval
    return np.clip(spans, order - 1, n_basis - 1)


def bspline_design(knots, order, t, deriv):
    knots = np.asarray(knots, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    n_basis = knots.size - order
    out = np.zeros((t.size, n_basis))
    if deriv >= order:
        return out
    spans = _find_spans(knots, order, t)
    low = order - deriv
    # order-1 indicators over all knot intervals, then raise the order
    vals = np.zeros((t.size, knots.size - 1))
    vals[np.arange(t.size), spans] = 1.0
    for r in range(2, low + 1):
        nxt = np.zeros((t.size, knots.size - r))
        for i in range(knots.size - r):
            d1 = knots[i + r - 1] - knots[i]
            d2 = knots[i + r] - knots[i + 1]
            if d1 > 0.0:
                nxt[:, i] += (t - knots[i]) / d1 * vals[:, i]
            if d2 > 0.0:
                nxt[:, i] += (knots[i + r] - t) / d2 * vals[:, i + 1]
        vals = nxt
    for r in range(low + 1, order + 1):
        nxt = np.zeros((t.size, knots.size - r))
        for i in range(knots.size - r):
            d1 = knots[i + r - 1] - knots[i]
            d2 = knots[i + r] - knots[i + 1]
            if d1 > 0.0:
                nxt[:, i] += (r - 1) / d1 * vals[:, i]
            if d2 > 0.0:
                nxt[:, i] -= (r - 1) / d2 * vals[:, i + 1]
        vals = nxt
    out[:] = vals
    return out


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix_bits(key, counters):
    counters = np.asarray(counters, dtype=np.uint64)
    state = np.uint64(key) + (counters + np.uint64(1)) * _GOLDEN
    return _mix(state)


def _horner(coeffs, r):
    acc = np.full_like(r, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * r + c
    return acc


def inverse_normal(p):
    p = np.asarray(p, dtype=np.float64)
    q = p - 0.5
    out = np.empty_like(p)
    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        out[central] = qc * _horner(_coeffs.A, r) / _horner(_coeffs.B, r)
    tail = ~central
    if tail.any():
        qt = q[tail]
        r = np.where(qt < 0.0, p[tail], 1.0 - p[tail])
        r = np.sqrt(-np.log(r))
        near = r <= 5.0
        val = np.empty_like(r)
        rn = r[near] - 1.6
        val[near] = _horner(_coeffs.C, rn) / _horner(_coeffs.D, rn)
        rf = r[~near] - 5.0
        val[~near] = _horner(_coeffs.E, rf) / _horner(_coeffs.F, rf)
        out[tail] = np.where(qt < 0.0, -val, val)
    return out


def nearest_rows(points, centers):
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    diff = points[:, None, :] - centers[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    # argmin returns the first minimum
    return np.argmin(dist, axis=1)
