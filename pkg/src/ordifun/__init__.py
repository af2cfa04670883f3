"""Functional-ordinal dimensionality reduction: foCCA, penalized fPCA, ordinal Fisher discriminant."""

from ordifun.basis import (
    BasisSpec,
    FunctionalDataset,
    GramPair,
    basis_matrix,
    eval_basis,
    gram_matrices,
    make_bspline_basis,
    smooth_to_basis,
)
from ordifun.classify import (
    CentroidClassifier,
    cross_validate,
    evaluation_report,
    fit_centroids,
    kfold_mae,
    predict,
)
from ordifun.eigen import cca_svd, gsym_eig
from ordifun.ordinal import (
    CumulativeEncoding,
    OrdinalLabels,
    center_columns,
    encode_cumulative,
    ordinal_step,
)
from ordifun.reducers import (
    FoccaModel,
    LinearReducerModel,
    Method,
    fit_focca,
    fit_fofd,
    fit_fpca,
    fit_heuristic,
    focca_ordinal_scores,
    focca_transform,
)
from ordifun.simgen import ScenarioConfig, simulate, simulate_scenario_a, simulate_scenario_b
from ordifun.tuning import TuningResult, smooth_loss, tune_penalties

__version__ = "0.1.0"
