"""Ordinal labels, their cumulative 0/1 encoding, and centering helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ordifun.errors import ValidationError


@dataclass(frozen=True)
class OrdinalLabels:
    """Levels ``0..n_C`` for each unit.

    ``n_C`` defaults to the largest observed level.
    """

    levels: np.ndarray
    n_C: int = None

    def __post_init__(self):
        raw = np.asarray(self.levels)
        if raw.ndim != 1:
            raise ValidationError("levels must be a 1-D vector", "bad_shape")
        if raw.dtype.kind == "f":
            if not np.all(np.isfinite(raw)) or np.any(raw != np.round(raw)):
                raise ValidationError("levels must be integers", "non_integer_level")
        elif raw.dtype.kind not in "iub" and raw.size:
            raise ValidationError("levels must be integers", "non_integer_level")
        lev = raw.astype(np.int64)
        n_C = int(lev.max()) if self.n_C is None and lev.size else self.n_C
        n_C = 1 if n_C is None else int(n_C)
        if n_C < 1:
            raise ValidationError(f"n_C must be >= 1, got {n_C}", "bad_levels")
        if lev.size and (lev.min() < 0 or lev.max() > n_C):
            raise ValidationError(
                f"levels must lie in 0..{n_C}; found range {lev.min()}..{lev.max()}",
                "level_out_of_range",
            )
        lev.setflags(write=False)
        object.__setattr__(self, "levels", lev)
        object.__setattr__(self, "n_C", n_C)

    @property
    def n(self) -> int:
        return self.levels.size

    def subset(self, index) -> "OrdinalLabels":
        return OrdinalLabels(self.levels[np.asarray(index)], self.n_C)


@dataclass(frozen=True)
class CumulativeEncoding:
    matrix: np.ndarray
    column_means: np.ndarray | None = None


def cumulative_matrix(levels, n_C: int) -> np.ndarray:
    """Row ``i`` holds ``1{levels[i] >= c}`` for ``c = 1..n_C``."""
    levels = np.asarray(levels)
    return (levels[:, None] >= np.arange(1, n_C + 1)[None, :]).astype(np.float64)


def encode_cumulative(labels: OrdinalLabels) -> CumulativeEncoding:
    return CumulativeEncoding(matrix=cumulative_matrix(labels.levels, labels.n_C))


def decode_cumulative(matrix) -> np.ndarray:
    """Inverse of the uncentered encoding: the row sums."""
    return np.rint(np.asarray(matrix).sum(axis=1)).astype(np.int64)


def center_columns(matrix):
    """Return ``(matrix - column_means, column_means)``."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[0] < 1:
        raise ValidationError("cannot center an empty matrix", "empty")
    mean = matrix.mean(axis=0)
    return matrix - mean, mean


def ordinal_step(theta, c_hat: int) -> float:
    """Score increment from level ``c_hat - 1`` to ``c_hat``: simply ``theta[c_hat - 1]``."""
    theta = np.asarray(theta)
    if not 1 <= int(c_hat) <= theta.size:
        raise ValidationError(f"c_hat must be in 1..{theta.size}, got {c_hat}", "level_out_of_range")
    return float(theta[int(c_hat) - 1])
