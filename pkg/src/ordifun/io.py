"""CSV/JSON persistence for datasets, models, scores and reports.

A dataset bundle is a directory holding

* ``coefficients.csv``: ``unit_id,b0,...,b{nJ-1}``
* ``labels.csv``: ``unit_id,level``
* ``basis.json``: ``{"order", "n_basis", "domain"}``
* ``config.json`` (optional): realized simulation configuration

Floats are written with Python's shortest round-trip ``repr``.
"""

from __future__ import annotations

import csv
import json
from collections import OrderedDict
from pathlib import Path

import numpy as np

from ordifun.basis import BasisSpec, FunctionalDataset, gram_matrices, smooth_to_basis
from ordifun.errors import ValidationError
from ordifun.ordinal import OrdinalLabels
from ordifun.reducers import model_from_dict

COEF_FILE = "coefficients.csv"
LABEL_FILE = "labels.csv"
BASIS_FILE = "basis.json"
CONFIG_FILE = "config.json"
RAW_FILE = "curves.csv"


def _fmt(x) -> str:
    return repr(float(x))


def _read_rows(path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"file not found: {path}", "missing_file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path} is empty", "parse_error") from None
        return [h.strip() for h in header], [row for row in reader if row]


def read_json(path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"file not found: {path}", "missing_file")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})", "parse_error") from exc


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def write_dataset(out_dir, data: FunctionalDataset, labels: OrdinalLabels, config: dict | None = None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / COEF_FILE, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["unit_id"] + [f"b{j}" for j in range(data.basis.n_basis)])
        for uid, row in zip(data.unit_ids, data.coefficients):
            w.writerow([uid] + [_fmt(v) for v in row])
    with open(out / LABEL_FILE, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["unit_id", "level"])
        for uid, lev in zip(data.unit_ids, labels.levels):
            w.writerow([uid, int(lev)])
    write_json(out / BASIS_FILE, data.basis.to_dict())
    if config is not None:
        write_json(out / CONFIG_FILE, config)
    return out


def read_labels(path, n_C=None):
    """Return ``(unit_ids, OrdinalLabels)`` in file order."""
    header, rows = _read_rows(path)
    if header[:2] != ["unit_id", "level"]:
        raise ValidationError(f"{path}: expected header 'unit_id,level', got {header}", "parse_error")
    ids, levels = [], []
    for row in rows:
        if len(row) < 2:
            raise ValidationError(f"{path}: short row {row}", "parse_error")
        raw = row[1].strip()
        try:
            val = int(raw)
        except ValueError:
            raise ValidationError(f"{path}: level {raw!r} of unit {row[0]} is not an integer",
                                  "non_integer_level") from None
        ids.append(row[0].strip())
        levels.append(val)
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{path}: duplicate unit_id", "duplicate_unit")
    return ids, OrdinalLabels(np.array(levels, dtype=np.int64), n_C)


def read_coefficients(path, basis: BasisSpec):
    header, rows = _read_rows(path)
    expected = ["unit_id"] + [f"b{j}" for j in range(basis.n_basis)]
    if header != expected:
        raise ValidationError(
            f"{path}: header has {len(header) - 1} coefficient columns, basis has {basis.n_basis}",
            "column_mismatch",
        )
    table = OrderedDict()
    for row in rows:
        if len(row) != len(expected):
            raise ValidationError(f"{path}: row for unit {row[0]} has {len(row)} fields", "column_mismatch")
        try:
            table[row[0].strip()] = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}", "parse_error") from None
    return table


def read_raw_curves(path):
    """Long-format ``unit_id,t,value`` file -> ``{unit_id: (times, values)}``."""
    header, rows = _read_rows(path)
    if header[:3] != ["unit_id", "t", "value"]:
        raise ValidationError(f"{path}: expected header 'unit_id,t,value'", "parse_error")
    curves: dict = OrderedDict()
    for row in rows:
        try:
            t, v = float(row[1]), float(row[2])
        except (ValueError, IndexError):
            raise ValidationError(f"{path}: bad row {row}", "parse_error") from None
        curves.setdefault(row[0].strip(), ([], []))
        curves[row[0].strip()][0].append(t)
        curves[row[0].strip()][1].append(v)
    return {k: (np.array(t), np.array(v)) for k, (t, v) in curves.items()}


def write_raw_curves(path, unit_ids, times, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["unit_id", "t", "value"])
        for uid, ts, vs in zip(unit_ids, times, values):
            for t, v in zip(ts, vs):
                w.writerow([uid, _fmt(t), _fmt(v)])


def load_dataset(
    directory=None,
    *,
    coefficients=None,
    labels=None,
    basis=None,
    raw_curves=None,
    lam=0.0,
    n_C=None,
):
    """Load ``(FunctionalDataset, OrdinalLabels)``; unit order follows the labels file.

    Either coefficients or raw curves (smoothed per unit onto ``basis`` with
    penalty ``lam`` or ``"gcv"``) supply the curves.  ``n_C`` falls back to
    the ``config.json`` sidecar, then to the largest level present.
    """
    d = Path(directory) if directory is not None else None
    labels = labels or (d / LABEL_FILE if d else None)
    if labels is None:
        raise ValidationError("no labels file given", "missing_file")
    if basis is None and d is not None:
        basis = d / BASIS_FILE
    if isinstance(basis, (str, Path)):
        basis = BasisSpec.from_dict(read_json(basis))
    if basis is None:
        raise ValidationError("no basis description given", "missing_file")
    if n_C is None and d is not None and (d / CONFIG_FILE).is_file():
        n_C = read_json(d / CONFIG_FILE).get("n_C")
    ids, lab = read_labels(labels, n_C)

    if raw_curves is None and coefficients is None and d is not None:
        if (d / COEF_FILE).is_file():
            coefficients = d / COEF_FILE
        elif (d / RAW_FILE).is_file():
            raw_curves = d / RAW_FILE
    if raw_curves is not None:
        curves = read_raw_curves(raw_curves)
        gram = gram_matrices(basis)
        table = {uid: smooth_to_basis(t, v, basis, lam, gram=gram) for uid, (t, v) in curves.items()}
    elif coefficients is not None:
        table = read_coefficients(coefficients, basis)
    else:
        raise ValidationError("neither coefficients nor raw curves were given", "missing_file")

    missing = [u for u in ids if u not in table]
    extra = [u for u in table if u not in set(ids)]
    if missing or extra:
        raise ValidationError(
            f"unit_id sets differ: {len(missing)} labelled units without curves "
            f"(e.g. {missing[:3]}), {len(extra)} curves without labels (e.g. {extra[:3]})",
            "missing_unit",
        )
    coef = np.array([table[u] for u in ids], dtype=np.float64).reshape(len(ids), basis.n_basis)
    return FunctionalDataset(coef, basis, tuple(ids)), lab


def write_model(path, model):
    write_json(path, model.to_dict())


def read_model(path):
    return model_from_dict(read_json(path))


def write_scores(path, unit_ids, scores):
    scores = np.atleast_2d(scores)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["unit_id"] + [f"score{k}" for k in range(scores.shape[1])])
        for uid, row in zip(unit_ids, scores):
            w.writerow([uid] + [_fmt(v) for v in row])


def read_scores(path):
    header, rows = _read_rows(path)
    if not header or header[0] != "unit_id":
        raise ValidationError(f"{path}: expected a unit_id column", "parse_error")
    ids = [r[0] for r in rows]
    return ids, np.array([[float(v) for v in r[1:]] for r in rows]).reshape(len(rows), len(header) - 1)
