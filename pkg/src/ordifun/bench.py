"""Monte Carlo comparison of reducers over simulated scenarios."""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.linalg import LinAlgError

from ordifun.classify import kfold_mae
from ordifun.errors import OrdifunError, ValidationError
from ordifun.reducers import DEFAULT_METHODS, Method
from ordifun.simgen import ScenarioConfig, dataset_hash, simulate
from ordifun.tuning import tune_penalties

REPLICA_COLUMNS = ["scenario", "q", "method", "replica", "seed", "mae", "wall_time_s"]
SUMMARY_COLUMNS = ["scenario", "q", "method", "mean_mae", "q05_mae", "q95_mae"]
MIN_COMPLETE = 0.9


@dataclass(frozen=True)
class ReplicaRow:
    scenario: str
    q: float
    method: str
    replica: int
    seed: int
    mae: float
    wall_time_s: float
    dataset_hash: str


@dataclass(frozen=True)
class FailedRow:
    scenario: str
    q: float
    method: str
    replica: int
    seed: int
    reason: str


@dataclass(frozen=True)
class SummaryRow:
    scenario: str
    q: float
    method: str
    mean_mae: float
    q05_mae: float
    q95_mae: float
    n_complete: int
    n_expected: int

    @property
    def flagged(self) -> bool:
        return self.n_complete < MIN_COMPLETE * self.n_expected


@dataclass
class BenchmarkTable:
    rows: list
    failures: list = field(default_factory=list)
    expected_per_cell: int = 0

    def summary(self) -> list:
        return summarize(self)

    def write_csv(self, path, record_timing: bool = True):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPLICA_COLUMNS)
            for r in self.rows:
                wall = f"{r.wall_time_s:.6f}" if record_timing else ""
                w.writerow([r.scenario, repr(r.q), r.method, r.replica, r.seed, repr(r.mae), wall])

    def write_summary_csv(self, path):
        write_summary_csv(self.summary(), path)

    def write_failures_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["scenario", "q", "method", "replica", "seed", "reason"])
            for f in self.failures:
                w.writerow([f.scenario, repr(f.q), f.method, f.replica, f.seed, f.reason])


def summarize(table: BenchmarkTable) -> list[SummaryRow]:
    """Mean and 5%/95% quantiles of the MAE per (scenario, q, method) cell.

    Quantiles use linear interpolation between order statistics
    (``numpy.quantile(method="linear")``): for sorted values ``x_1..x_N`` the
    p-quantile is read at position ``1 + p (N - 1)``.
    """
    cells: dict = {}
    for r in table.rows:
        cells.setdefault((r.scenario, r.q, r.method), []).append(r.mae)
    for f in table.failures:
        cells.setdefault((f.scenario, f.q, f.method), [])
    out = []
    for key in sorted(cells, key=lambda k: (k[0], k[1], _method_rank(k[2]))):
        vals = np.asarray(cells[key], dtype=np.float64)
        expected = table.expected_per_cell or vals.size
        if vals.size:
            q05, q95 = np.quantile(vals, [0.05, 0.95], method="linear")
            stats = (float(vals.mean()), float(q05), float(q95))
        else:
            stats = (float("nan"),) * 3
        out.append(SummaryRow(*key, *stats, n_complete=int(vals.size), n_expected=int(expected)))
    return out


def write_summary_csv(summary, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for s in summary:
            w.writerow([s.scenario, repr(s.q), s.method, repr(s.mean_mae), repr(s.q05_mae), repr(s.q95_mae)])


def _method_rank(kind):
    order = list(DEFAULT_METHODS)
    return order.index(kind) if kind in order else len(order)


def worker_count(requested=None) -> int:
    """Requested workers, capped by ``ORDIFUN_WORKERS`` when that is set."""
    cap = os.environ.get("ORDIFUN_WORKERS")
    n = int(requested) if requested else (int(cap) if cap else 1)
    if cap:
        n = min(n, int(cap))
    return max(n, 1)


def _run_cell(job):
    (scenario, q, replica, seed, n, methods, K, m, retune, sim_kw) = job
    sim = simulate(ScenarioConfig(scenario=scenario, q=q, n=n, seed=seed, **sim_kw))
    digest = dataset_hash(sim.data, sim.labels)
    rows, failures = [], []
    for method in methods:
        start = time.perf_counter()
        try:
            chosen = method
            if retune and method.lambdas:
                chosen = method.with_lambdas(
                    tune_penalties(sim.data, sim.labels, method, K=K, m=m, seed=seed).selected
                )
            mae = kfold_mae(sim.data, sim.labels, chosen, K=K, m=m, seed=seed)
        except (OrdifunError, LinAlgError, FloatingPointError) as exc:
            failures.append(FailedRow(scenario, q, method.kind, replica, seed, f"{type(exc).__name__}: {exc}"))
            continue
        wall = time.perf_counter() - start
        rows.append(ReplicaRow(scenario, q, method.kind, replica, seed, mae, wall, digest))
    return rows, failures


def _as_method(spec, fixed_params):
    if isinstance(spec, Method):
        return spec
    if fixed_params and spec in fixed_params:
        return Method(spec, tuple(np.atleast_1d(fixed_params[spec])))
    return DEFAULT_METHODS[spec]


def run_monte_carlo(
    scenario: str,
    q_values,
    M: int,
    methods=("focca", "fpca", "fofd"),
    K: int = 5,
    m: int = 2,
    fixed_params=None,
    master_seed: int = 0,
    n: int = 500,
    retune: bool = False,
    workers=None,
    **sim_kw,
) -> BenchmarkTable:
    """Paired replicas: replica ``r`` uses seed ``master_seed + r`` for every q and method.

    Penalties are fixed per method (``fixed_params`` overrides the built-in
    defaults) unless ``retune`` is set, in which case each replica tunes its
    own.  Failing fits become entries of ``failures`` instead of aborting.
    """
    if M < 1:
        raise ValidationError(f"M must be >= 1, got {M}", "bad_runs")
    qs = [float(q) for q in q_values]
    methods = [_as_method(s, fixed_params) for s in methods]
    jobs = [
        (scenario, q, r, master_seed + r, n, methods, K, m, retune, sim_kw)
        for q in qs
        for r in range(M)
    ]
    n_workers = min(worker_count(workers), len(jobs))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (4 * n_workers))))
    else:
        results = [_run_cell(j) for j in jobs]
    rows = [r for res in results for r in res[0]]
    failures = [f for res in results for f in res[1]]
    rows.sort(key=lambda r: (qs.index(r.q), r.replica, _method_rank(r.method)))
    return BenchmarkTable(rows=rows, failures=failures, expected_per_cell=M)


def read_replica_csv(path) -> BenchmarkTable:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            wall = float(rec["wall_time_s"]) if rec["wall_time_s"] else float("nan")
            rows.append(
                ReplicaRow(rec["scenario"], float(rec["q"]), rec["method"], int(rec["replica"]),
                           int(rec["seed"]), float(rec["mae"]), wall, "")
            )
    return BenchmarkTable(rows=rows)
