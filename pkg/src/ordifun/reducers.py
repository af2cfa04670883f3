"""Dimensionality reducers for functional data with an ordinal target.

Four reducers share one life cycle (``fit_*`` returns an immutable model
whose ``transform`` maps curves to an ``(n, m)`` score matrix):

* foCCA: penalized canonical correlation between curves and the cumulative
  encoding of the levels;
* fPCA: penalized functional principal components;
* foFD: Fisher discriminant whose between-class term only compares
  consecutive levels;
* heuristic: the curve value at the right end of the domain.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ordifun.basis import BasisSpec, FunctionalDataset, eval_basis, gram_matrices
from ordifun.eigen import cca_svd, gsym_eig
from ordifun.errors import DegenerateFitWarning, ValidationError
from ordifun.ordinal import OrdinalLabels, center_columns, cumulative_matrix

KINDS = ("focca", "fpca", "fofd", "heuristic")
DEFAULT_M = 2


def _check_same_basis(model_basis, data):
    if data.basis != model_basis:
        raise ValidationError(
            f"dataset basis {data.basis} differs from the model basis {model_basis}",
            "basis_mismatch",
        )


def _check_pair(data, labels):
    if data.n != labels.n:
        raise ValidationError(
            f"{data.n} curves but {labels.n} labels", "length_mismatch"
        )


@dataclass(frozen=True)
class FoccaModel:
    """Fitted foCCA components.

    ``b`` is ``(n_basis, m)`` and ``theta`` is ``(n_C, m)``; column ``k``
    holds the k-th functional/ordinal pair with canonical value ``rho[k]``.
    """

    b: np.ndarray
    theta: np.ndarray
    rho: np.ndarray
    coeff_mean: np.ndarray
    y_mean: np.ndarray
    lambda1: float
    lambda2: float
    basis: BasisSpec
    kind: str = "focca"

    @property
    def m(self) -> int:
        return self.rho.size

    @property
    def n_C(self) -> int:
        return self.theta.shape[0]

    @property
    def lambdas(self) -> tuple:
        return (self.lambda1, self.lambda2)

    @property
    def pairs(self):
        return [(self.b[:, k], self.theta[:, k], float(self.rho[k])) for k in range(self.m)]

    def transform(self, data: FunctionalDataset) -> np.ndarray:
        return focca_transform(self, data)

    def ordinal_scores(self, labels: OrdinalLabels) -> np.ndarray:
        return focca_ordinal_scores(self, labels)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "basis": self.basis.to_dict(),
            "m": self.m,
            "lambdas": [float(self.lambda1), float(self.lambda2)],
            "coeff_mean": self.coeff_mean.tolist(),
            "y_mean": self.y_mean.tolist(),
            "components": [
                {"b": self.b[:, k].tolist(), "theta": self.theta[:, k].tolist(), "value": float(self.rho[k])}
                for k in range(self.m)
            ],
        }


@dataclass(frozen=True)
class LinearReducerModel:
    """Fitted fPCA / foFD / heuristic components (``b`` is ``(n_basis, m)``)."""

    b: np.ndarray
    values: np.ndarray
    coeff_mean: np.ndarray
    lam: float
    kind: str
    basis: BasisSpec

    @property
    def m(self) -> int:
        return self.values.size

    @property
    def lambdas(self) -> tuple:
        return () if self.kind == "heuristic" else (self.lam,)

    @property
    def components(self):
        return [(self.b[:, k], float(self.values[k])) for k in range(self.m)]

    def transform(self, data: FunctionalDataset) -> np.ndarray:
        _check_same_basis(self.basis, data)
        centered = data.coefficients - self.coeff_mean
        if self.kind == "heuristic":
            # point evaluation, not an L2 inner product
            return centered @ self.b
        return centered @ (gram_matrices(self.basis).J @ self.b)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "basis": self.basis.to_dict(),
            "m": self.m,
            "lambdas": [float(v) for v in self.lambdas],
            "coeff_mean": self.coeff_mean.tolist(),
            "components": [
                {"b": self.b[:, k].tolist(), "value": float(self.values[k])} for k in range(self.m)
            ],
        }


def _frozen(*arrays):
    for a in arrays:
        a.setflags(write=False)


def focca_matrices(data: FunctionalDataset, labels: OrdinalLabels, lambda1: float, lambda2: float):
    """Cross matrix and the two penalized metrics of the foCCA pencil.

    Returns ``(C12, S1, S2, coeff_mean, y_mean)`` with ``C12 = J V12``,
    ``S1 = J V11 J + lambda1 K`` and ``S2 = V22 + lambda2 I``.
    """
    _check_pair(data, labels)
    n = data.n
    A, a_mean = center_columns(data.coefficients)
    Dm, y_mean = center_columns(cumulative_matrix(labels.levels, labels.n_C))
    gp = gram_matrices(data.basis)
    V11 = A.T @ A / n
    V12 = A.T @ Dm / n
    V22 = Dm.T @ Dm / n
    C12 = gp.J @ V12
    S1 = gp.J @ V11 @ gp.J + lambda1 * gp.K
    S2 = V22 + lambda2 * np.eye(labels.n_C)
    return C12, (S1 + S1.T) / 2.0, S2, a_mean, y_mean


def fit_focca(
    data: FunctionalDataset,
    labels: OrdinalLabels,
    lambda1: float,
    lambda2: float,
    m: int = DEFAULT_M,
) -> FoccaModel:
    """Fit penalized functional-ordinal CCA.

    Maximizes ``(b'J V12 theta)^2 / ((b'J V11 J b + lambda1 b'Kb)(theta'V22 theta + lambda2 theta'theta))``
    over successive pairs; each returned pair satisfies unit normalization in
    both penalized metrics.
    """
    if lambda1 < 0 or lambda2 < 0:
        raise ValidationError("penalties must be nonnegative", "bad_lambda")
    if data.n < 2:
        raise ValidationError("foCCA needs at least two units", "too_few_units")
    if not 1 <= m <= min(data.basis.n_basis, labels.n_C):
        raise ValidationError(
            f"m={m} exceeds min(n_basis, n_C)={min(data.basis.n_basis, labels.n_C)}", "m_too_large"
        )
    C12, S1, S2, a_mean, y_mean = focca_matrices(data, labels, lambda1, lambda2)
    triples = cca_svd(C12, S1, S2, m)
    b = np.column_stack([t.b for t in triples])
    theta = np.column_stack([t.theta for t in triples])
    rho = np.array([t.rho for t in triples])
    _frozen(b, theta, rho, a_mean, y_mean)
    return FoccaModel(b, theta, rho, a_mean, y_mean, float(lambda1), float(lambda2), data.basis)


def focca_transform(model: FoccaModel, data: FunctionalDataset) -> np.ndarray:
    """Functional scores ``b_k' J (a_i - coeff_mean)``."""
    _check_same_basis(model.basis, data)
    return (data.coefficients - model.coeff_mean) @ (gram_matrices(model.basis).J @ model.b)


def focca_ordinal_scores(model: FoccaModel, labels: OrdinalLabels) -> np.ndarray:
    """Ordinal scores ``theta_k' (y_i - y_mean)``."""
    if labels.n_C != model.n_C:
        raise ValidationError(
            f"labels have n_C={labels.n_C}, model was fit with n_C={model.n_C}", "level_out_of_range"
        )
    Y = cumulative_matrix(labels.levels, labels.n_C)
    return (Y - model.y_mean) @ model.theta


def _linear_model(pairs, a_mean, lam, kind, basis):
    b = np.column_stack([p.vector for p in pairs])
    values = np.array([p.value for p in pairs])
    _frozen(b, values, a_mean)
    return LinearReducerModel(b, values, a_mean, float(lam), kind, basis)


def fit_fpca(data: FunctionalDataset, lam: float, m: int = DEFAULT_M) -> LinearReducerModel:
    """Penalized fPCA: ``J V11 J b = rho (J + lam K) b``."""
    if lam < 0:
        raise ValidationError("penalty must be nonnegative", "bad_lambda")
    if not 1 <= m <= data.basis.n_basis:
        raise ValidationError(f"m={m} exceeds n_basis={data.basis.n_basis}", "m_too_large")
    A, a_mean = center_columns(data.coefficients)
    gp = gram_matrices(data.basis)
    V11 = A.T @ A / data.n
    pairs = gsym_eig(gp.J @ V11 @ gp.J, gp.J + lam * gp.K, m)
    return _linear_model(pairs, a_mean, lam, "fpca", data.basis)


def ordinal_scatter(coefficients, levels, n_C):
    """Consecutive-level between scatter and the within-class scatter (coefficient space).

    Absent levels contribute nothing to the between term.
    """
    coefficients = np.asarray(coefficients, dtype=np.float64)
    p = coefficients.shape[1]
    counts = np.bincount(levels, minlength=n_C + 1).astype(np.float64)
    sums = np.zeros((n_C + 1, p))
    np.add.at(sums, levels, coefficients)
    means = np.divide(sums, counts[:, None], out=np.zeros_like(sums), where=counts[:, None] > 0)
    between = np.zeros((p, p))
    for c in range(n_C):
        n_lo, n_hi = counts[c], counts[c + 1]
        if n_lo == 0 or n_hi == 0:
            continue
        pooled = (sums[c] + sums[c + 1]) / (n_lo + n_hi)
        d_lo = means[c] - pooled
        d_hi = means[c + 1] - pooled
        between += n_lo * np.outer(d_lo, d_lo) + n_hi * np.outer(d_hi, d_hi)
    resid = coefficients - means[levels]
    within = resid.T @ resid / coefficients.shape[0]
    return between, within


def fit_fofd(
    data: FunctionalDataset, labels: OrdinalLabels, lam: float, m: int = DEFAULT_M
) -> LinearReducerModel:
    """Functional-ordinal Fisher discriminant.

    Solves ``J S_B J b = rho (J S_W J + lam K) b`` where ``S_B`` sums the
    two-class between scatter of every consecutive level pair.
    """
    _check_pair(data, labels)
    if lam < 0:
        raise ValidationError("penalty must be nonnegative", "bad_lambda")
    if not 1 <= m <= data.basis.n_basis:
        raise ValidationError(f"m={m} exceeds n_basis={data.basis.n_basis}", "m_too_large")
    between, within = ordinal_scatter(data.coefficients, labels.levels, labels.n_C)
    if not np.any(between):
        warnings.warn("between-level scatter is zero; foFD components are arbitrary", DegenerateFitWarning)
    gp = gram_matrices(data.basis)
    a_mean = data.coefficients.mean(axis=0)
    pairs = gsym_eig(gp.J @ between @ gp.J, gp.J @ within @ gp.J + lam * gp.K, m)
    return _linear_model(pairs, a_mean, lam, "fofd", data.basis)


def fit_heuristic(data: FunctionalDataset) -> LinearReducerModel:
    """Single score: the centered curve value at the right end of the domain."""
    phi_end = eval_basis(data.basis, data.basis.domain[1])
    a_mean = data.coefficients.mean(axis=0)
    scores = (data.coefficients - a_mean) @ phi_end
    b = phi_end[:, None].copy()
    values = np.array([float(scores @ scores) / data.n])
    _frozen(b, values, a_mean)
    return LinearReducerModel(b, values, a_mean, 0.0, "heuristic", data.basis)


@dataclass(frozen=True)
class Method:
    """A reducer kind plus its penalties.

    ``lambdas`` is ``(lambda1, lambda2)`` for foCCA, ``(lambda,)`` for fPCA
    and foFD, and empty for the heuristic.
    """

    kind: str
    lambdas: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown method {self.kind!r}; expected one of {KINDS}", "bad_method")
        want = {"focca": 2, "fpca": 1, "fofd": 1, "heuristic": 0}[self.kind]
        lams = tuple(float(v) for v in np.atleast_1d(self.lambdas)) if want else ()
        if len(lams) != want:
            raise ValidationError(f"{self.kind} takes {want} penalties, got {len(lams)}", "bad_lambda")
        object.__setattr__(self, "lambdas", lams)

    def fit(self, data: FunctionalDataset, labels: OrdinalLabels, m: int = DEFAULT_M):
        if self.kind == "focca":
            return fit_focca(data, labels, self.lambdas[0], self.lambdas[1], m)
        if self.kind == "fpca":
            return fit_fpca(data, self.lambdas[0], m)
        if self.kind == "fofd":
            return fit_fofd(data, labels, self.lambdas[0], m)
        return fit_heuristic(data)

    def with_lambdas(self, lambdas) -> "Method":
        return Method(self.kind, tuple(lambdas))


# default penalties, chosen for curves on a (0, 100) domain with 10 cubic splines
DEFAULT_METHODS = {
    "focca": Method("focca", (1e2, 1e3)),
    "fpca": Method("fpca", (1e6,)),
    "fofd": Method("fofd", (1e8,)),
    "heuristic": Method("heuristic"),
}


def model_from_dict(d: dict):
    """Rebuild a fitted model from :meth:`to_dict` output."""
    try:
        kind = d["kind"]
        basis = BasisSpec.from_dict(d["basis"])
        comps = d["components"]
        b = np.array([c["b"] for c in comps], dtype=np.float64).T
        values = np.array([c["value"] for c in comps], dtype=np.float64)
        coeff_mean = np.array(d["coeff_mean"], dtype=np.float64)
        lambdas = [float(v) for v in d.get("lambdas", [])]
        if kind == "focca":
            theta = np.array([c["theta"] for c in comps], dtype=np.float64).T
            y_mean = np.array(d["y_mean"], dtype=np.float64)
            _frozen(b, theta, values, coeff_mean, y_mean)
            return FoccaModel(b, theta, values, coeff_mean, y_mean, lambdas[0], lambdas[1], basis)
        if kind not in ("fpca", "fofd", "heuristic"):
            raise ValidationError(f"unknown model kind {kind!r}", "bad_model")
        _frozen(b, values, coeff_mean)
        lam = lambdas[0] if lambdas else 0.0
        return LinearReducerModel(b, values, coeff_mean, lam, kind, basis)
    except (KeyError, IndexError, TypeError) as exc:
        raise ValidationError(f"malformed model description: {exc}", "bad_model") from exc
