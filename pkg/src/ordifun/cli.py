"""Command-line interface: ``ordifun {simulate,fit,transform,tune,evaluate,benchmark}``.

Every command prints a JSON summary on stdout.  Exit status is 0 on
success, 2 for invalid input and 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ordifun import io
from ordifun.bench import run_monte_carlo, worker_count
from ordifun.classify import cross_validate, evaluation_report
from ordifun.errors import NumericalError, ValidationError
from ordifun.reducers import DEFAULT_METHODS, KINDS, Method
from ordifun.simgen import ScenarioConfig, simulate
from ordifun.tuning import default_grid, tune_penalties


def parse_range(text: str) -> list[float]:
    """``"0:1:0.2"`` (inclusive start:stop:step) or a comma list."""
    text = text.strip()
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise ValidationError(f"bad range {text!r}; expected start:stop:step", "bad_argument") from None
        if step <= 0:
            raise ValidationError("range step must be positive", "bad_argument")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"bad list {text!r}", "bad_argument") from None


def parse_log_grid(text: str) -> list[float]:
    """``"lo:hi:n"`` for n log-spaced values, or a comma list."""
    if ":" in text:
        try:
            lo, hi, n = text.split(":")
            return np.logspace(np.log10(float(lo)), np.log10(float(hi)), int(n)).tolist()
        except ValueError:
            raise ValidationError(f"bad grid {text!r}; expected lo:hi:n", "bad_argument") from None
    return parse_range(text)


def _method_from_args(args) -> Method:
    if args.method == "focca":
        return Method("focca", (args.lambda1, args.lambda2))
    if args.method in ("fpca", "fofd"):
        lam = args.lam if args.lam is not None else DEFAULT_METHODS[args.method].lambdas[0]
        return Method(args.method, (lam,))
    return Method("heuristic")


def _load(args):
    lam = args.smooth_lambda
    if lam != "gcv":
        lam = float(lam)
    return io.load_dataset(args.data, raw_curves=args.raw, basis=args.basis, lam=lam, n_C=args.n_levels)


def cmd_simulate(args):
    cfg = ScenarioConfig(
        scenario=args.scenario, q=args.q, n=args.n, n_basis=args.n_basis,
        n_C=args.n_levels, seed=args.seed, variant=args.variant,
    )
    sim = simulate(cfg)
    sidecar = sim.sidecar()
    out = io.write_dataset(args.out, sim.data, sim.labels, sidecar)
    return {"command": "simulate", "out": str(out), "n": sim.data.n, "n_basis": cfg.n_basis,
            "n_C": cfg.n_C, "dataset_sha256": sidecar["dataset_sha256"]}


def cmd_fit(args):
    data, labels = _load(args)
    model = _method_from_args(args).fit(data, labels, args.m)
    io.write_model(args.out, model)
    values = model.rho if model.kind == "focca" else model.values
    return {"command": "fit", "out": str(args.out), "kind": model.kind, "m": model.m,
            "lambdas": list(model.lambdas), "values": values.tolist()}


def cmd_transform(args):
    model = io.read_model(args.model)
    data, _ = _load(args)
    scores = model.transform(data)
    io.write_scores(args.out, data.unit_ids, scores)
    return {"command": "transform", "out": str(args.out), "n": int(scores.shape[0]), "m": int(scores.shape[1])}


def _tuning_grid(args):
    if args.method == "heuristic":
        return [()]
    if args.method == "focca":
        if args.grid is None and args.grid2 is None:
            return None
        g1 = parse_log_grid(args.grid) if args.grid else sorted({p[0] for p in default_grid("focca")})
        g2 = parse_log_grid(args.grid2) if args.grid2 else sorted({p[1] for p in default_grid("focca")})
        return [(a, b) for a in g1 for b in g2]
    return None if args.grid is None else [(v,) for v in parse_log_grid(args.grid)]


def cmd_tune(args):
    data, labels = _load(args)
    method = _method_from_args(args)
    result = tune_penalties(data, labels, method, _tuning_grid(args), args.k, args.m, args.seed)
    out = Path(args.out)
    io.write_json(out, result.to_dict())
    csv_path = out.with_suffix(".csv")
    result.write_csv(csv_path)
    return {"command": "tune", "out": str(out), "csv": str(csv_path), "kind": result.kind,
            "selected": list(result.selected),
            "selected_raw_loss": float(result.raw_loss[result.selected_index]),
            "selected_smoothed_loss": float(result.smoothed_loss[result.selected_index])}


def _merge_groups(specs):
    groups = []
    for spec in specs or []:
        for part in spec.split(";"):
            if part.strip():
                try:
                    groups.append({int(v) for v in part.split(",")})
                except ValueError:
                    raise ValidationError(f"bad merge group {part!r}", "bad_argument") from None
    return groups


def cmd_evaluate(args):
    data, labels = _load(args)
    if args.model:
        model = io.read_model(args.model)
        method = Method(model.kind, model.lambdas)
        m = model.m
    else:
        method, m = _method_from_args(args), args.m
    cv = cross_validate(data, labels, method, args.k, m, args.seed, refit_reducer=not args.no_refit)
    report = evaluation_report(labels.levels, cv.predictions, _merge_groups(args.merge), labels.n_C, cv.mae)
    result = report.to_dict()
    result["mae_per_fold_mean"] = cv.mae / args.k
    if args.out:
        io.write_json(args.out, result)
    return {"command": "evaluate", "out": args.out, "kind": method.kind, **result}


def cmd_benchmark(args):
    methods = [s.strip() for s in args.methods.split(",") if s.strip()]
    for s in methods:
        if s not in KINDS:
            raise ValidationError(f"unknown method {s!r}", "bad_method")
    params = {}
    for spec in args.param or []:
        name, _, vals = spec.partition("=")
        params[name.strip()] = [float(v) for v in vals.split(",")]
    table = run_monte_carlo(
        args.scenario, parse_range(args.q), args.runs, methods, K=args.k, m=args.m,
        fixed_params=params, master_seed=args.seed, n=args.n, retune=args.retune,
        workers=args.workers,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    table.write_csv(out, record_timing=not args.no_timing)
    summary_path = out.with_name(out.stem + "_summary.csv")
    table.write_summary_csv(summary_path)
    result = {"command": "benchmark", "out": str(out), "summary": str(summary_path),
              "rows": len(table.rows), "failures": len(table.failures),
              "workers": worker_count(args.workers)}
    if table.failures:
        fail_path = out.with_name(out.stem + "_failures.csv")
        table.write_failures_csv(fail_path)
        result["failures_csv"] = str(fail_path)
    result["cells"] = [
        {"q": s.q, "method": s.method, "mean_mae": s.mean_mae, "q05_mae": s.q05_mae,
         "q95_mae": s.q95_mae, "flagged": s.flagged}
        for s in table.summary()
    ]
    return result


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)


def _add_data(p):
    p.add_argument("--data", required=True, help="dataset bundle directory")
    p.add_argument("--raw", default=None, help="long-format unit_id,t,value curves to smooth")
    p.add_argument("--basis", default=None, help="basis JSON (defaults to DATA/basis.json)")
    p.add_argument("--smooth-lambda", default="0", help="smoothing penalty for --raw, or 'gcv'")
    p.add_argument("--n-levels", type=int, default=None, help="highest level n_C")


def _add_method(p, required=True):
    p.add_argument("--method", choices=KINDS, required=required)
    p.add_argument("--lambda1", type=float, default=DEFAULT_METHODS["focca"].lambdas[0])
    p.add_argument("--lambda2", type=float, default=DEFAULT_METHODS["focca"].lambdas[1])
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--m", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordifun", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a scenario dataset")
    _add_common(p)
    p.add_argument("--scenario", choices=("a", "b"), required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--n-basis", type=int, default=10)
    p.add_argument("--n-levels", type=int, default=8)
    p.add_argument("--variant", choices=("fixed_steps", "random_steps"), default="fixed_steps")
    p.set_defaults(func=cmd_simulate, out_default="data")

    p = sub.add_parser("fit", help="fit a reducer and write model JSON")
    _add_common(p)
    _add_data(p)
    _add_method(p)
    p.set_defaults(func=cmd_fit, out_default="model.json")

    p = sub.add_parser("transform", help="score a dataset with a fitted model")
    _add_common(p)
    _add_data(p)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_transform, out_default="scores.csv")

    p = sub.add_parser("tune", help="cross-validated penalty selection")
    _add_common(p)
    _add_data(p)
    _add_method(p)
    p.add_argument("--grid", default=None, help="lambda (or lambda1) grid, lo:hi:n log-spaced")
    p.add_argument("--grid2", default=None, help="lambda2 grid for foCCA")
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_tune, out_default="tuning.json")

    p = sub.add_parser("evaluate", help="K-fold CV confusion matrix and rates")
    _add_common(p)
    _add_data(p)
    _add_method(p, required=False)
    p.add_argument("--model", default=None, help="take method and penalties from a model JSON")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--merge", action="append", help="levels merged for reporting, e.g. 0,1")
    p.add_argument("--no-refit", action="store_true", help="fit the reducer once on all data")
    p.set_defaults(func=cmd_evaluate, out_default=None)

    p = sub.add_parser("benchmark", help="Monte Carlo comparison over q values")
    _add_common(p)
    p.add_argument("--scenario", choices=("a", "b"), required=True)
    p.add_argument("--q", default="0:1:0.1", help="start:stop:step or comma list")
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--methods", default="focca,fpca,fofd")
    p.add_argument("--param", action="append", help="fixed penalties, e.g. focca=100,1000")
    p.add_argument("--retune", action="store_true", help="tune penalties inside each replica")
    p.add_argument("--workers", type=int, default=None, help="worker processes (capped by ORDIFUN_WORKERS)")
    p.add_argument("--no-timing", action="store_true", help="leave wall_time_s empty (byte-stable output)")
    p.set_defaults(func=cmd_benchmark, out_default="bench.csv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out is None:
        args.out = args.out_default
    if args.command == "evaluate" and not (args.method or args.model):
        parser.error("evaluate needs --method or --model")
    try:
        result = args.func(args)
    except ValidationError as exc:
        print(json.dumps({"error": str(exc), "code": exc.code}), file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(json.dumps({"error": str(exc), "code": exc.code}), file=sys.stderr)
        return 3
    print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
