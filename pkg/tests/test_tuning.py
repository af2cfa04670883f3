import csv
import json

import numpy as np
import pytest

from conftest import random_instance
from ordifun.classify import kfold_mae
from ordifun.errors import ValidationError
from ordifun.reducers import DEFAULT_METHODS, Method
from ordifun.simgen import ScenarioConfig, simulate
from ordifun.tuning import default_grid, smooth_loss, tune_penalties

FOCCA = DEFAULT_METHODS["focca"]


def test_quadratic_curve_reproduced():
    x = np.linspace(-1, 5, 13)
    y = 0.3 * (x - 2.2) ** 2 + 1.0
    s = smooth_loss(x, y)
    np.testing.assert_allclose(s, y, atol=1e-3)
    assert s.argmin() == y.argmin()


def test_quadratic_surface_reproduced():
    ax = np.linspace(-1, 5, 7)
    X = np.array([(a, b) for a in ax for b in ax])
    y = 0.2 * (X[:, 0] - 2) ** 2 + 0.1 * (X[:, 1] - 3) ** 2 + 0.05 * X[:, 0] * X[:, 1]
    s = smooth_loss(X, y)
    np.testing.assert_allclose(s, y, atol=1e-3)
    assert s.argmin() == y.argmin()


def test_constant_losses():
    np.testing.assert_allclose(smooth_loss(np.arange(8.0), np.full(8, 2.5)), 2.5, atol=1e-10)
    ax = np.arange(5.0)
    X = np.array([(a, b) for a in ax for b in ax])
    np.testing.assert_allclose(smooth_loss(X, np.full(25, 0.7)), 0.7, atol=1e-10)


def test_noisy_convex_argmin():
    x = np.linspace(-2, 6, 21)
    truth = (x - 1.7) ** 2
    hits = 0
    for seed in range(20):
        noisy = truth + np.random.default_rng(seed).normal(0, 1.0, x.size)
        hits += abs(int(smooth_loss(x, noisy).argmin()) - int(truth.argmin())) <= 1
    assert hits >= 18


def test_order_invariance():
    gen = np.random.default_rng(1)
    x = np.linspace(0, 4, 9)
    y = (x - 1) ** 2 + gen.normal(0, 0.3, 9)
    perm = gen.permutation(9)
    np.testing.assert_allclose(smooth_loss(x[perm], y[perm]), smooth_loss(x, y)[perm], atol=1e-12)
    ax = np.linspace(0, 3, 5)
    X = np.array([(a, b) for a in ax for b in ax])
    Y = X.sum(axis=1) ** 2 + gen.normal(0, 0.3, 25)
    perm = gen.permutation(25)
    np.testing.assert_allclose(smooth_loss(X[perm], Y[perm]), smooth_loss(X, Y)[perm], atol=1e-12)


def test_too_few_points():
    with pytest.raises(ValidationError):
        smooth_loss(np.arange(3.0), np.ones(3))
    with pytest.raises(ValidationError):
        smooth_loss(np.arange(5.0), np.ones(4))


def test_default_grids():
    assert (100.0, 1000.0) in default_grid("focca")
    assert len(default_grid("focca")) == 49
    assert (1e6,) in default_grid("fpca") and (1e8,) in default_grid("fofd")
    assert default_grid("heuristic") == [()]


def test_single_point_grid(instance):
    data, labels = instance
    res = tune_penalties(data, labels, FOCCA, grid=[(3.0, 4.0)], K=4)
    assert res.selected == (3.0, 4.0) and not res.smoothed
    res = tune_penalties(data, labels, DEFAULT_METHODS["heuristic"], K=4)
    assert res.selected == ()


def test_tune_fpca_and_serialization(instance, tmp_path):
    data, labels = instance
    res = tune_penalties(data, labels, Method("fpca", (1.0,)), K=4, seed=2)
    assert res.smoothed and res.selected in res.grid
    assert res.raw_loss.min() <= res.raw_loss[res.selected_index] <= res.raw_loss.max()
    assert res.smoothed_loss[res.selected_index] == pytest.approx(res.smoothed_loss.min(), abs=1e-10)
    json.dumps(res.to_dict())
    res.write_csv(tmp_path / "t.csv")
    rows = list(csv.DictReader(open(tmp_path / "t.csv")))
    assert list(rows[0]) == ["lambda1", "lambda2", "raw_loss", "smoothed_loss"]
    assert len(rows) == len(res.grid) and rows[0]["lambda2"] == ""


def test_ties_go_to_larger_penalty():
    from ordifun.tuning import _argmin_larger

    grid = [(1.0, 5.0), (10.0, 1.0), (10.0, 2.0), (3.0, 9.0)]
    assert grid[_argmin_larger(np.array([1.0, 0.5, 0.5, 0.7]), grid)] == (10.0, 2.0)
    assert grid[_argmin_larger(np.array([0.5, 0.6, 0.6, 0.5]), grid)] == (3.0, 9.0)


def test_grid_validation(instance):
    data, labels = instance
    for bad in ([(1.0,)], [(0.0, 1.0)], [(1.0, 2.0), (1.0, 2.0)], []):
        with pytest.raises(ValidationError):
            tune_penalties(data, labels, FOCCA, grid=bad, K=4)


def test_scenario_a_tuning_is_deterministic_and_consistent():
    sim = simulate(ScenarioConfig("a", 0.8, n=300, seed=1))
    grid = [(a, b) for a in np.logspace(-1, 5, 5) for b in np.logspace(-1, 5, 5)]
    a = tune_penalties(sim.data, sim.labels, FOCCA, grid=grid, seed=1)
    b = tune_penalties(sim.data, sim.labels, FOCCA, grid=list(reversed(grid)), seed=1)
    assert a.selected == b.selected
    np.testing.assert_allclose(a.smoothed_loss, b.smoothed_loss[::-1], atol=1e-12)
    raw_pick = a.grid[int(np.argmin(a.raw_loss))]
    # recompute both candidates from scratch
    for point in (a.selected, raw_pick):
        i = a.grid.index(point)
        assert kfold_mae(sim.data, sim.labels, FOCCA.with_lambdas(point), seed=1) == a.raw_loss[i]
    assert a.smoothed_loss[a.grid.index(a.selected)] <= a.smoothed_loss[a.grid.index(raw_pick)]
