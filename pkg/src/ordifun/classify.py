"""Nearest-centroid classification in score space and K-fold cross-validated MAE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ordifun import kernels, rng
from ordifun.basis import FunctionalDataset
from ordifun.errors import ValidationError
from ordifun.ordinal import OrdinalLabels
from ordifun.reducers import DEFAULT_M, Method

_FOLD_TAG = 101


@dataclass(frozen=True)
class CentroidClassifier:
    """Mean training score per level; rows of ``centroids`` follow ``levels_present``."""

    centroids: np.ndarray
    levels_present: np.ndarray

    def as_dict(self) -> dict:
        return {int(c): self.centroids[k] for k, c in enumerate(self.levels_present)}


def fit_centroids(scores, labels: OrdinalLabels) -> CentroidClassifier:
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    if scores.shape[0] != labels.n:
        raise ValidationError("scores and labels differ in length", "length_mismatch")
    if labels.n < 1:
        raise ValidationError("need at least one training unit", "empty")
    present = np.unique(labels.levels)
    pos = np.searchsorted(present, labels.levels)
    sums = np.zeros((present.size, scores.shape[1]))
    np.add.at(sums, pos, scores)
    counts = np.bincount(pos, minlength=present.size)
    return CentroidClassifier(sums / counts[:, None], present)


def predict(classifier: CentroidClassifier, scores) -> np.ndarray:
    """Level of the nearest centroid (Euclidean); ties go to the lower level."""
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    if classifier.levels_present.size == 0:
        raise ValidationError("classifier has no centroids", "empty")
    if scores.shape[1] != classifier.centroids.shape[1]:
        raise ValidationError(
            f"scores have {scores.shape[1]} columns, centroids {classifier.centroids.shape[1]}",
            "bad_shape",
        )
    return classifier.levels_present[kernels.nearest_rows(scores, classifier.centroids)]


def fold_indices(n: int, K: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle cut into ``K`` contiguous, near-equal blocks."""
    if K < 2:
        raise ValidationError(f"K must be >= 2, got {K}", "bad_folds")
    if K > n:
        raise ValidationError(f"K={K} exceeds the number of units n={n}", "bad_folds")
    perm = rng.permutation(rng.stream_key(seed, _FOLD_TAG), n)
    return np.array_split(perm, K)


def mae_cv(true_levels, predicted, folds) -> float:
    """Sum over folds of the fold-mean absolute level error."""
    true_levels = np.asarray(true_levels)
    predicted = np.asarray(predicted)
    return float(sum(np.abs(true_levels[f] - predicted[f]).mean() for f in folds))


@dataclass(frozen=True)
class CVResult:
    mae: float
    fold_mae: np.ndarray
    predictions: np.ndarray
    folds: tuple


def cross_validate(
    data: FunctionalDataset,
    labels: OrdinalLabels,
    method: Method,
    K: int = 5,
    m: int = DEFAULT_M,
    seed: int = 0,
    refit_reducer: bool = True,
    folds=None,
) -> CVResult:
    """Out-of-fold nearest-centroid predictions.

    The reducer and the centroids are both refit on each training split
    unless ``refit_reducer=False`` (then only the centroids are, on scores
    from a single full-data fit).  ``mae`` is the sum over folds of the
    per-fold mean absolute level error.
    """
    if data.n != labels.n:
        raise ValidationError(f"{data.n} curves but {labels.n} labels", "length_mismatch")
    if folds is None:
        folds = fold_indices(data.n, K, seed)
    pred = np.empty(data.n, dtype=np.int64)
    fold_mae = np.empty(len(folds))
    full_scores = None if refit_reducer else method.fit(data, labels, m).transform(data)
    for k, test in enumerate(folds):
        train = np.setdiff1d(np.arange(data.n), test, assume_unique=True)
        train_labels = labels.subset(train)
        if refit_reducer:
            model = method.fit(data.subset(train), train_labels, m)
            train_scores = model.transform(data.subset(train))
            test_scores = model.transform(data.subset(test))
        else:
            train_scores, test_scores = full_scores[train], full_scores[test]
        clf = fit_centroids(train_scores, train_labels)
        pred[test] = predict(clf, test_scores)
        fold_mae[k] = np.abs(labels.levels[test] - pred[test]).mean()
    return CVResult(mae_cv(labels.levels, pred, folds), fold_mae, pred, tuple(folds))


def kfold_mae(data, labels, method: Method, K: int = 5, m: int = DEFAULT_M, seed: int = 0, **kw) -> float:
    return cross_validate(data, labels, method, K, m, seed, **kw).mae


@dataclass(frozen=True)
class EvaluationReport:
    levels: list
    confusion: np.ndarray
    accuracy: float
    sensitivity: np.ndarray
    specificity: np.ndarray
    mae: float
    merges: list

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "accuracy": self.accuracy,
            "levels": list(self.levels),
            "confusion": self.confusion.tolist(),
            "sensitivity": [None if np.isnan(v) else float(v) for v in self.sensitivity],
            "specificity": [None if np.isnan(v) else float(v) for v in self.specificity],
            "merges": [sorted(g) for g in self.merges],
        }


def merge_map(merge_groups, n_C: int) -> np.ndarray:
    """Lookup table sending each level to the largest level of its merge group."""
    table = np.arange(n_C + 1)
    seen = set()
    for group in merge_groups:
        group = {int(g) for g in group}
        if seen & group:
            raise ValidationError(f"merge groups overlap on {sorted(seen & group)}", "overlapping_merge")
        if min(group) < 0 or max(group) > n_C:
            raise ValidationError(f"merge group {sorted(group)} outside 0..{n_C}", "level_out_of_range")
        seen |= group
        table[list(group)] = max(group)
    return table


def evaluation_report(true_labels, predicted_labels, merge_groups=(), n_C=None, mae=None) -> EvaluationReport:
    """Confusion matrix (rows true, columns predicted) and one-vs-rest rates after merging.

    ``mae`` defaults to the plain per-unit mean absolute error on the
    unmerged labels; pass the cross-validated value to report that instead.
    """
    true = np.asarray(true_labels, dtype=np.int64)
    pred = np.asarray(predicted_labels, dtype=np.int64)
    if true.shape != pred.shape:
        raise ValidationError("true and predicted labels differ in length", "length_mismatch")
    if n_C is None:
        n_C = int(max(true.max(initial=0), pred.max(initial=0)))
    table = merge_map(merge_groups, n_C)
    levels = np.unique(table)
    index = np.searchsorted(levels, table)
    ti, pi = index[true], index[pred]
    g = levels.size
    confusion = np.zeros((g, g), dtype=np.int64)
    np.add.at(confusion, (ti, pi), 1)
    tp = np.diag(confusion).astype(np.float64)
    fn = confusion.sum(axis=1) - tp
    fp = confusion.sum(axis=0) - tp
    tn = confusion.sum() - tp - fn - fp
    with np.errstate(invalid="ignore", divide="ignore"):
        sens = np.where(tp + fn > 0, tp / (tp + fn), np.nan)
        spec = np.where(tn + fp > 0, tn / (tn + fp), np.nan)
    n = max(true.size, 1)
    if mae is None:
        mae = float(np.abs(true - pred).mean()) if true.size else 0.0
    return EvaluationReport(
        levels=levels.tolist(),
        confusion=confusion,
        accuracy=float(tp.sum() / n),
        sensitivity=sens,
        specificity=spec,
        mae=float(mae),
        merges=[sorted(int(v) for v in grp) for grp in merge_groups],
    )
