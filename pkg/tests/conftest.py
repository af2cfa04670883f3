import numpy as np
import pytest

from ordifun.basis import FunctionalDataset, make_bspline_basis
from ordifun.ordinal import OrdinalLabels


def random_instance(seed, n=40, n_basis=4, n_C=3, domain=(0.0, 1.0), signal=1.0):
    """Small random dataset with a mild level effect, every level present."""
    gen = np.random.default_rng(seed)
    basis = make_bspline_basis(n_basis, domain)
    levels = np.concatenate([np.arange(n_C + 1), gen.integers(0, n_C + 1, n - n_C - 1)])
    direction = gen.normal(size=n_basis)
    coef = gen.normal(size=(n, n_basis)) * gen.uniform(0.5, 2.0, n_basis)
    coef += signal * np.outer(levels, direction)
    return FunctionalDataset(coef, basis), OrdinalLabels(levels, n_C)


@pytest.fixture
def instance():
    return random_instance(0)
