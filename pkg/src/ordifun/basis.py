"""Cubic B-spline bases on an interval: evaluation, Gram/penalty matrices, smoothing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from ordifun import kernels
from ordifun.errors import NumericalError, ValidationError

GCV_GRID = np.logspace(-4, 8, 41)


@dataclass(frozen=True)
class BasisSpec:
    """B-spline basis with clamped boundary knots and equispaced interior knots.

    Parameters
    ----------
    order : int
        Spline order (4 is cubic).
    n_basis : int
        Number of basis functions; must be at least ``order``.
    domain : tuple of float
        Closed interval ``(t_lo, t_hi)``.
    """

    order: int
    n_basis: int
    domain: tuple[float, float]

    def __post_init__(self):
        if int(self.order) < 1:
            raise ValidationError(f"order must be >= 1, got {self.order}", "bad_basis")
        if int(self.n_basis) < int(self.order):
            raise ValidationError(
                f"n_basis={self.n_basis} is smaller than order={self.order}", "bad_basis"
            )
        lo, hi = (float(v) for v in self.domain)
        if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
            raise ValidationError(f"degenerate domain {self.domain}", "bad_basis")
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "n_basis", int(self.n_basis))
        object.__setattr__(self, "domain", (lo, hi))

    @property
    def n_interior(self) -> int:
        return self.n_basis - self.order

    @cached_property
    def knots(self) -> np.ndarray:
        lo, hi = self.domain
        interior = np.linspace(lo, hi, self.n_interior + 2)[1:-1]
        knots = np.concatenate([np.full(self.order, lo), interior, np.full(self.order, hi)])
        knots.setflags(write=False)
        return knots

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.knots)

    def to_dict(self) -> dict:
        return {"order": self.order, "n_basis": self.n_basis, "domain": list(self.domain)}

    @classmethod
    def from_dict(cls, d: dict) -> "BasisSpec":
        try:
            return cls(order=d["order"], n_basis=d["n_basis"], domain=tuple(d["domain"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed basis description: {d!r}", "bad_basis") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class GramPair:
    """``J[j, k] = int phi_j phi_k`` and ``K[j, k] = int phi_j'' phi_k''``."""

    J: np.ndarray
    K: np.ndarray

    def __iter__(self):
        return iter((self.J, self.K))


@dataclass(frozen=True)
class FunctionalDataset:
    """Curves ``x_i(t) = sum_j coefficients[i, j] phi_j(t)`` on a shared basis."""

    coefficients: np.ndarray
    basis: BasisSpec
    unit_ids: tuple = field(default=None, compare=False)

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=np.float64)
        if coef.ndim != 2 or coef.shape[1] != self.basis.n_basis:
            raise ValidationError(
                f"coefficient matrix of shape {coef.shape} does not match "
                f"n_basis={self.basis.n_basis}",
                "column_mismatch",
            )
        if not np.all(np.isfinite(coef)):
            raise ValidationError("coefficients contain non-finite values", "non_finite")
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        if self.unit_ids is None:
            object.__setattr__(self, "unit_ids", tuple(str(i) for i in range(coef.shape[0])))
        elif len(self.unit_ids) != coef.shape[0]:
            raise ValidationError("unit_ids length differs from the number of rows", "column_mismatch")

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    def subset(self, index) -> "FunctionalDataset":
        index = np.asarray(index)
        ids = tuple(self.unit_ids[i] for i in index)
        return FunctionalDataset(self.coefficients[index], self.basis, ids)

    def evaluate(self, t, derivative=0) -> np.ndarray:
        """Curve values, shape ``(n, len(t))``."""
        return self.coefficients @ basis_matrix(self.basis, t, derivative).T


def make_bspline_basis(n_basis: int, domain, order: int = 4) -> BasisSpec:
    return BasisSpec(order=order, n_basis=n_basis, domain=tuple(domain))


def basis_matrix(spec: BasisSpec, t, derivative: int = 0) -> np.ndarray:
    """Evaluate all basis functions at points ``t``; returns shape ``(len(t), n_basis)``."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if derivative not in (0, 1, 2, 3):
        raise ValidationError(f"derivative must be 0..3, got {derivative}", "bad_derivative")
    lo, hi = spec.domain
    if t.size and (t.min() < lo or t.max() > hi or not np.all(np.isfinite(t))):
        raise ValidationError(f"evaluation points outside the domain [{lo}, {hi}]", "out_of_domain")
    return kernels.bspline_design(spec.knots, spec.order, t, derivative)


def eval_basis(spec: BasisSpec, t: float, derivative: int = 0) -> np.ndarray:
    """Vector of ``phi_j^(derivative)(t)`` for a single point."""
    return basis_matrix(spec, [t], derivative)[0]


def _gauss_gram(spec, derivative, n_nodes):
    nodes, weights = leggauss(n_nodes)
    brk = spec.breakpoints
    a, b = brk[:-1, None], brk[1:, None]
    half = (b - a) / 2.0
    t = (half * nodes + (a + b) / 2.0).ravel()
    w = (half * weights).ravel()
    # interior nodes never sit on a knot, so span lookup is unambiguous
    phi = basis_matrix(spec, t, derivative)
    gram = phi.T @ (w[:, None] * phi)
    return (gram + gram.T) / 2.0


@lru_cache(maxsize=64)
def gram_matrices(spec: BasisSpec) -> GramPair:
    """Exact Gram and curvature-penalty matrices by per-interval Gauss-Legendre.

    Products of degree ``order - 1`` polynomials need ``order`` nodes per
    interval; second-derivative products need ``order - 2``.
    """
    J = _gauss_gram(spec, 0, spec.order)
    K = _gauss_gram(spec, 2, max(spec.order - 2, 1))
    J.setflags(write=False)
    K.setflags(write=False)
    return GramPair(J=J, K=K)


@dataclass(frozen=True)
class SmoothingFit:
    coefficients: np.ndarray
    lam: float
    gcv: float
    rss: float
    edf: float


def _penalty_root(K):
    w, V = np.linalg.eigh((K + K.T) / 2.0)
    # drop the numerical nullspace so huge penalties cannot leak into it
    w = np.where(w > 1e-12 * max(w.max(), 0.0), w, 0.0)
    return np.sqrt(w)[:, None] * V.T


def _penalized_fit(phi, values, K, lam):
    """Solve the penalized normal equations through the SVD of ``[phi; sqrt(lam) R]``.

    ``R'R = K``.  The stacked form stays accurate for very large penalties
    where ``phi'phi + lam K`` itself is badly conditioned.
    """
    L, p = phi.shape
    stacked = np.vstack([phi, np.sqrt(lam) * _penalty_root(K)])
    U, s, Wt = linalg.svd(stacked, full_matrices=False)
    if s[-1] <= 1e-13 * s[0] * max(L, p):
        raise NumericalError(
            f"normal equations are singular at lambda={lam:g} "
            f"({L} points, {p} basis functions)",
            "singular_smoothing",
        )
    top = U[:L]
    coef = Wt.T @ ((top.T @ values) / s)
    resid = values - phi @ coef
    edf = float(np.sum(top * top))
    return coef, float(resid @ resid), edf


def gcv_score(rss: float, edf: float, n_points: int) -> float:
    denom = n_points - edf
    if denom <= 1e-8 * n_points:
        return np.inf
    return n_points * rss / denom**2


def penalized_smooth(phi, values, K, lam="gcv", grid=None) -> SmoothingFit:
    """Penalized least squares ``||values - phi b||^2 + lam b'Kb`` on a design matrix.

    Works for any design/penalty pair (used for both 1-D and tensor-product
    fits).  With ``lam="gcv"`` the grid value minimizing GCV is selected,
    ties going to the larger lambda.
    """
    values = np.asarray(values, dtype=np.float64)
    L = values.shape[0]
    if lam != "gcv":
        lam = float(lam)
        if lam < 0:
            raise ValidationError("lambda must be nonnegative", "bad_lambda")
        coef, rss, edf = _penalized_fit(phi, values, K, lam)
        return SmoothingFit(coef, lam, gcv_score(rss, edf, L), rss, edf)
    grid = GCV_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    best = None
    for cand in np.sort(grid):
        try:
            coef, rss, edf = _penalized_fit(phi, values, K, float(cand))
        except NumericalError:
            continue
        score = gcv_score(rss, edf, L)
        if best is None or score <= best.gcv:
            best = SmoothingFit(coef, float(cand), score, rss, edf)
    if best is None:
        raise NumericalError("no lambda in the GCV grid gives a solvable system", "singular_smoothing")
    return best


def smooth_to_basis(times, values, spec: BasisSpec, lam=0.0, grid=None, gram: GramPair | None = None):
    """Fit basis coefficients to one sampled curve.

    Minimizes ``sum_l (values_l - x(times_l))^2 + lam * int x''(t)^2 dt``.
    Pass ``lam="gcv"`` to choose lambda on a log grid (default 41 values in
    ``[1e-4, 1e8]``).  Returns the coefficient vector; use
    :func:`smooth_to_basis_fit` for the selected lambda and diagnostics.
    """
    return smooth_to_basis_fit(times, values, spec, lam, grid, gram).coefficients


def smooth_to_basis_fit(times, values, spec, lam=0.0, grid=None, gram=None) -> SmoothingFit:
    times = np.asarray(times, dtype=np.float64).ravel()
    values = np.asarray(values, dtype=np.float64).ravel()
    if times.size != values.size:
        raise ValidationError("times and values differ in length", "length_mismatch")
    if times.size < 2:
        raise ValidationError("need at least two samples per curve", "too_few_points")
    if gram is None:
        gram = gram_matrices(spec)
    phi = basis_matrix(spec, times)
    return penalized_smooth(phi, values, gram.K, lam, grid)
