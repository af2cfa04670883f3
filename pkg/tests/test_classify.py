import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_instance
from ordifun.basis import FunctionalDataset, make_bspline_basis
from ordifun.classify import (
    cross_validate,
    evaluation_report,
    fit_centroids,
    fold_indices,
    kfold_mae,
    mae_cv,
    merge_map,
    predict,
)
from ordifun.errors import ValidationError
from ordifun.ordinal import OrdinalLabels
from ordifun.reducers import DEFAULT_METHODS, Method
from ordifun.simgen import ScenarioConfig, simulate

FOCCA = DEFAULT_METHODS["focca"]


def test_centroids_one_unit_per_level():
    scores = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    clf = fit_centroids(scores, OrdinalLabels(np.array([2, 0, 1]), 3))
    np.testing.assert_array_equal(clf.levels_present, [0, 1, 2])
    np.testing.assert_array_equal(clf.centroids, scores[[1, 2, 0]])


def test_centroids_are_level_means():
    gen = np.random.default_rng(0)
    scores = gen.normal(size=(50, 3))
    levels = gen.integers(0, 5, 50)
    levels[levels == 3] = 4
    clf = fit_centroids(scores, OrdinalLabels(levels, 4))
    assert 3 not in clf.levels_present
    for k, c in enumerate(clf.levels_present):
        np.testing.assert_allclose(clf.centroids[k], scores[levels == c].mean(axis=0), atol=1e-14)
    dup = fit_centroids(np.vstack([scores, scores]), OrdinalLabels(np.concatenate([levels, levels]), 4))
    np.testing.assert_allclose(dup.centroids, clf.centroids, atol=1e-14)


def test_predict_examples():
    clf = fit_centroids(np.array([[0.0], [2.0], [4.0]]), OrdinalLabels(np.array([0, 2, 5]), 5))
    np.testing.assert_array_equal(predict(clf, np.array([[2.0], [4.0], [0.0]])), [2, 5, 0])
    # equidistant between levels 2 and 5
    assert predict(clf, np.array([[3.0]]))[0] == 2
    with pytest.raises(ValidationError):
        predict(clf, np.zeros((1, 2)))


def test_predict_brute_force():
    gen = np.random.default_rng(1)
    clf = fit_centroids(gen.normal(size=(2, 2)), OrdinalLabels(np.array([1, 3]), 3))
    scores = gen.normal(size=(500, 2))
    d = ((scores[:, None, :] - clf.centroids[None]) ** 2).sum(-1)
    np.testing.assert_array_equal(predict(clf, scores), clf.levels_present[d.argmin(axis=1)])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0, 2 * np.pi), st.floats(-50, 50), st.floats(-50, 50))
def test_predict_isometry_invariance(seed, angle, dx, dy):
    gen = np.random.default_rng(seed)
    # centroid gaps well above rounding keep near-ties away
    cents = np.array([[0.0, 0.0], [1.0, 0.3], [-0.4, 1.7]])
    scores = gen.normal(size=(60, 2))
    d = np.sort(((scores[:, None] - cents[None]) ** 2).sum(-1), axis=1)
    scores = scores[d[:, 1] - d[:, 0] > 1e-6]
    R = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    shift = np.array([dx, dy])
    a = predict(fit_centroids(cents, OrdinalLabels(np.arange(3), 2)), scores)
    b = predict(fit_centroids(cents @ R.T + shift, OrdinalLabels(np.arange(3), 2)), scores @ R.T + shift)
    np.testing.assert_array_equal(a, b)


def test_fold_indices():
    folds = fold_indices(23, 5, 0)
    assert sorted(len(f) for f in folds) == [4, 4, 5, 5, 5]
    np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(23))
    again = fold_indices(23, 5, 0)
    assert all(np.array_equal(a, b) for a, b in zip(folds, again))
    assert not all(np.array_equal(a, b) for a, b in zip(folds, fold_indices(23, 5, 1)))
    for K in (1, 24):
        with pytest.raises(ValidationError):
            fold_indices(23, K, 0)


def test_mae_formula():
    true = np.arange(20) % 4
    folds = fold_indices(20, 4, 3)
    assert mae_cv(true, true + 1, folds) == 4.0
    assert mae_cv(true, true, folds) == 0.0
    # unequal folds: sum of fold means, not a pooled mean
    assert mae_cv(np.zeros(3), np.array([1, 0, 0]), [np.array([0]), np.array([1, 2])]) == 1.0


def test_perfect_separation_gives_zero():
    spec = make_bspline_basis(4, (0.0, 1.0))
    gen = np.random.default_rng(2)
    levels = np.repeat(np.arange(4), 15)
    coef = np.outer(levels, [1.0, 2.0, 0.5, -1.0]) * 10 + 1e-3 * gen.normal(size=(60, 4))
    data, labels = FunctionalDataset(coef, spec), OrdinalLabels(levels, 3)
    for method in (Method("focca", (1e-6, 1e-6)), DEFAULT_METHODS["heuristic"], Method("fpca", (0.0,))):
        assert kfold_mae(data, labels, method, K=5, m=1, seed=0) == 0.0


def test_signal_beats_no_signal_paired():
    wins = 0
    for r in range(20):
        strong = simulate(ScenarioConfig("a", 1.0, n=300, seed=r))
        weak = simulate(ScenarioConfig("a", 0.0, n=300, seed=r))
        wins += kfold_mae(strong.data, strong.labels, FOCCA, seed=r) < kfold_mae(weak.data, weak.labels, FOCCA, seed=r)
    assert wins == 20


def test_determinism_and_unit_order(instance):
    data, labels = instance
    a = cross_validate(data, labels, FOCCA, K=4, seed=5)
    b = cross_validate(data, labels, FOCCA, K=4, seed=5)
    assert a.mae == b.mae
    np.testing.assert_array_equal(a.predictions, b.predictions)
    # relabel units; carry the fold assignment along
    perm = np.random.default_rng(9).permutation(data.n)
    inv = np.argsort(perm)
    folds = [np.sort(inv[f]) for f in a.folds]
    c = cross_validate(data.subset(perm), labels.subset(perm), FOCCA, folds=folds)
    assert c.mae == pytest.approx(a.mae, abs=1e-12)
    np.testing.assert_array_equal(c.predictions, a.predictions[perm])


def test_zero_signal_within_permutation_band():
    gen = np.random.default_rng(10)
    spec = make_bspline_basis(6, (0.0, 1.0))
    data = FunctionalDataset(gen.normal(size=(200, 6)), spec)
    labels = OrdinalLabels(gen.integers(0, 5, 200), 4)
    observed = kfold_mae(data, labels, FOCCA, seed=0)
    null = [kfold_mae(data, OrdinalLabels(gen.permutation(labels.levels), 4), FOCCA, seed=0) for _ in range(100)]
    lo, hi = np.percentile(null, [5, 95])
    assert lo <= observed <= hi


def test_centroid_only_mode(instance):
    data, labels = instance
    res = cross_validate(data, labels, FOCCA, K=5, seed=0, refit_reducer=False)
    assert res.mae >= 0 and res.predictions.shape == (data.n,)


def test_report_perfect():
    true = np.array([0, 1, 2, 2, 1, 0])
    rep = evaluation_report(true, true)
    np.testing.assert_array_equal(rep.confusion, np.diag([2, 2, 2]))
    assert rep.accuracy == 1.0
    np.testing.assert_array_equal(rep.sensitivity, 1.0)
    np.testing.assert_array_equal(rep.specificity, 1.0)


def test_report_merge_counts_as_correct():
    rep = evaluation_report(np.array([0, 2]), np.array([1, 2]), merge_groups=[{0, 1}], n_C=2)
    assert rep.levels == [1, 2]
    assert rep.accuracy == 1.0
    assert rep.mae == 0.5
    assert json.loads(json.dumps(rep.to_dict()))["merges"] == [[0, 1]]


def test_report_hand_built_3x3():
    true = np.array([0, 0, 0, 1, 1, 1, 2, 2, 2, 2])
    pred = np.array([0, 1, 2, 1, 1, 0, 2, 2, 1, 2])
    rep = evaluation_report(true, pred)
    np.testing.assert_array_equal(rep.confusion, [[1, 1, 1], [1, 2, 0], [0, 1, 3]])
    assert rep.accuracy == 0.6
    # level 0: TP 1 FN 2 FP 1 TN 6; level 1: TP 2 FN 1 FP 2 TN 5; level 2: TP 3 FN 1 FP 1 TN 5
    np.testing.assert_allclose(rep.sensitivity, [1 / 3, 2 / 3, 3 / 4])
    np.testing.assert_allclose(rep.specificity, [6 / 7, 5 / 7, 5 / 6])
    assert rep.confusion.sum() == 10


def test_merge_errors():
    with pytest.raises(ValidationError) as e:
        merge_map([{0, 1}, {1, 2}], 3)
    assert e.value.code == "overlapping_merge"
    with pytest.raises(ValidationError):
        merge_map([{3, 4}], 3)
    np.testing.assert_array_equal(merge_map([{0, 1}], 3), [1, 1, 2, 3])
