"""Penalty selection: grid of K-fold MAE values, spline-smoothed, argmin of the smooth."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from ordifun.basis import (
    GCV_GRID,
    basis_matrix,
    gcv_score,
    gram_matrices,
    make_bspline_basis,
    penalized_smooth,
)
from ordifun.basis import _penalized_fit
from ordifun.classify import cross_validate, fold_indices
from ordifun.errors import NumericalError, ValidationError
from ordifun.reducers import DEFAULT_M, Method

MIN_AXIS_POINTS = 4
TENSOR_BASIS = 5
TENSOR_GCV_GRID = np.logspace(-4, 8, 13)


def default_grid(kind: str) -> list[tuple]:
    if kind == "focca":
        axis = np.logspace(-1, 5, 7)
        return list(itertools.product(axis.tolist(), axis.tolist()))
    if kind in ("fpca", "fofd"):
        return [(v,) for v in np.logspace(0, 9, 10).tolist()]
    return [()]


def _axis_basis(x, n_basis):
    lo, hi = float(x.min()), float(x.max())
    return make_bspline_basis(n_basis, (lo, hi))


def _smooth_1d(x, y):
    n_distinct = np.unique(x).size
    spec = _axis_basis(x, max(4, min(n_distinct - 2, 10)))
    phi = basis_matrix(spec, x)
    return phi @ penalized_smooth(phi, y, gram_matrices(spec).K, "gcv").coefficients


def _smooth_2d(x, y, n_basis=TENSOR_BASIS):
    specs = [
        _axis_basis(x[:, a], min(n_basis, np.unique(x[:, a]).size)) for a in (0, 1)
    ]
    phis = [basis_matrix(s, x[:, a]) for a, s in enumerate(specs)]
    grams = [gram_matrices(s) for s in specs]
    design = (phis[0][:, :, None] * phis[1][:, None, :]).reshape(x.shape[0], -1)
    # integrated squared second partials along each axis
    pen_a = np.kron(grams[0].K, grams[1].J)
    pen_b = np.kron(grams[0].J, grams[1].K)
    best = None
    for la in TENSOR_GCV_GRID:
        for lb in TENSOR_GCV_GRID:
            try:
                coef, rss, edf = _penalized_fit(design, y, la * pen_a + lb * pen_b, 1.0)
            except NumericalError:
                continue
            score = gcv_score(rss, edf, y.size)
            if best is None or score <= best[0]:
                best = (score, coef)
    if best is None:
        raise NumericalError("tensor-product smoother failed for every penalty", "singular_smoothing")
    return design @ best[1]


def smooth_loss(grid_points, losses) -> np.ndarray:
    """Smooth a loss curve or surface given in ``log10(lambda)`` coordinates.

    ``grid_points`` is ``(P,)`` for one penalty or ``(P, 2)`` for two.  A
    1-D curve gets a cubic smoothing spline; a 2-D surface a tensor product
    of cubic B-splines with a separable curvature penalty.  Smoothing
    parameters are chosen by GCV.  The result does not depend on the order
    of the points.
    """
    x = np.asarray(grid_points, dtype=np.float64)
    y = np.asarray(losses, dtype=np.float64)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.shape[0] != y.size:
        raise ValidationError("grid and losses differ in length", "length_mismatch")
    axes = [x] if x.ndim == 1 else [x[:, a] for a in range(x.shape[1])]
    if x.ndim > 1 and x.shape[1] != 2:
        raise ValidationError("only one- and two-penalty grids are supported", "bad_grid")
    if any(np.unique(ax).size < MIN_AXIS_POINTS for ax in axes):
        raise ValidationError(
            f"smoothing needs >= {MIN_AXIS_POINTS} distinct grid values per axis", "bad_grid"
        )
    order = np.lexsort(tuple(ax for ax in reversed(axes)))
    xs, ys = x[order], y[order]
    fitted = _smooth_1d(xs, ys) if x.ndim == 1 else _smooth_2d(xs, ys)
    out = np.empty_like(y)
    out[order] = fitted
    return out


@dataclass(frozen=True)
class TuningResult:
    kind: str
    grid: list
    raw_loss: np.ndarray
    smoothed_loss: np.ndarray
    selected: tuple
    smoothed: bool

    @property
    def selected_index(self) -> int:
        return self.grid.index(self.selected)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "grid": [list(p) for p in self.grid],
            "raw_loss": self.raw_loss.tolist(),
            "smoothed_loss": self.smoothed_loss.tolist(),
            "selected": list(self.selected),
            "smoothed": self.smoothed,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda1", "lambda2", "raw_loss", "smoothed_loss"])
            for p, r, s in zip(self.grid, self.raw_loss, self.smoothed_loss):
                l1 = repr(p[0]) if len(p) > 0 else ""
                l2 = repr(p[1]) if len(p) > 1 else ""
                w.writerow([l1, l2, repr(float(r)), repr(float(s))])


def _normalize_grid(method, grid):
    if grid is None:
        return default_grid(method.kind)
    width = len(method.lambdas)
    points = []
    for p in grid:
        p = tuple(float(v) for v in np.atleast_1d(p)) if width else ()
        if len(p) != width:
            raise ValidationError(f"grid point {p} has the wrong arity for {method.kind}", "bad_grid")
        if any(v <= 0 for v in p):
            raise ValidationError("grid penalties must be positive (smoothing uses log10)", "bad_grid")
        points.append(p)
    if not points:
        raise ValidationError("empty grid", "bad_grid")
    if len(set(points)) != len(points):
        raise ValidationError("grid contains duplicate points", "bad_grid")
    return points


def _argmin_larger(values, grid):
    lo = values.min()
    ties = [i for i, v in enumerate(values) if v <= lo + 1e-12 * max(abs(lo), 1.0)]
    return max(ties, key=lambda i: grid[i])


def tune_penalties(
    data,
    labels,
    method: Method,
    grid=None,
    K: int = 5,
    m: int = DEFAULT_M,
    seed: int = 0,
    **cv_kw,
) -> TuningResult:
    """Evaluate K-fold MAE on every grid point (shared folds) and pick the smoothed argmin.

    Grids too small to smooth (fewer than four distinct values on an axis)
    are used raw.  Ties go to the larger penalty.
    """
    points = _normalize_grid(method, grid)
    folds = fold_indices(data.n, K, seed)
    raw = np.array(
        [cross_validate(data, labels, method.with_lambdas(p), K, m, seed, folds=folds, **cv_kw).mae for p in points]
    )
    coords = np.log10(np.array(points, dtype=np.float64)) if points[0] else None
    try:
        smooth = smooth_loss(coords, raw) if coords is not None else None
    except ValidationError:
        smooth = None
    used = smooth is not None
    if smooth is None:
        smooth = raw.copy()
    pick = _argmin_larger(smooth, points)
    return TuningResult(method.kind, points, raw, smooth, points[pick], used)
