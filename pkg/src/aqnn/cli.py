"""Command-line front end.

Exit codes: 0 ok, 1 verification residual too large, 2 parse/config error,
3 dimension error, 4 channel not CPTP, 5 infeasible construction,
6 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import coherence as coh
from . import diamond as dmd
from . import dilation as dil
from .channels import ChannelSpec, choi, is_cptp, iterate
from .classify import DEFAULT_BUDGET, classify
from .errors import (
    ConstraintInfeasible, DimensionMismatch, DimensionTooLarge, NotCPTP, SolverDidNotConverge,
)
from .states import density_from_json, density_to_json, matrix_to_json

EXIT_OK, EXIT_RESIDUAL, EXIT_PARSE, EXIT_DIM, EXIT_CPTP, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 1, 2, 3, 4, 5, 6
RESIDUAL_LIMIT = 1e-8
EXPERIMENTS = ("fig2_depth_curve", "prop3_diamond_sweep", "gamma_independence",
               "classify_family", "cp_region_scan")


class ParseError(Exception):
    pass


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _load_spec(path) -> ChannelSpec:
    obj = _load_json(path)
    try:
        return ChannelSpec.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid channel spec in {path}: {exc}") from exc


def _load_state(path) -> np.ndarray:
    obj = _load_json(path)
    try:
        return density_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid state in {path}: {exc}") from exc


def _emit(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.12g" % v
    return str(v)


def _worker_count() -> int:
    raw = os.environ.get("AQNN_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _parallel_rows(fn, items):
    """Map ``fn`` over ``items`` in a thread pool, keeping grid order."""
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        return list(pool.map(fn, items))


# simple commands -------------------------------------------------------------------

def cmd_apply(args) -> int:
    spec = _load_spec(args.spec)
    rho = _load_state(args.state)
    r = 1 if args.iterations is None else args.iterations
    out = iterate(spec, rho, r)
    _emit({"iterations": r, "state": density_to_json(out), "c_l1": coh.c_l1(out),
           "c_re": coh.c_relative_entropy(out)}, args.out)
    return EXIT_OK


def cmd_choi(args) -> int:
    spec = _load_spec(args.spec)
    _emit({"dim": spec.dim, "choi": matrix_to_json(choi(spec))}, args.out)
    return EXIT_OK


def cmd_cptp_check(args) -> int:
    spec = _load_spec(args.spec)
    v = is_cptp(spec)
    _emit({"cptp": v.ok, "min_eigenvalue": v.min_eigenvalue, "tp_residual": v.tp_residual}, args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    spec = _load_spec(args.spec)
    report = classify(spec, budget=args.budget, seed=args.seed)
    _emit(report.to_json(), args.out)
    return EXIT_OK


def cmd_dilate(args) -> int:
    spec = _load_spec(args.spec)
    method = args.method or "generic"
    if method == "gio":
        u = dil.build_gio_dilation(spec)
    elif method == "sio":
        u = dil.build_sio_dilation(spec)
    else:
        u = dil.build_dilation_for(spec)
    residual = dil.verify_dilation(u, spec, trials=args.trials or 100, seed=args.seed)
    _emit({"method": method, "unitary": u.to_json(), "residual": residual,
           "unitarity_residual": u.unitarity_residual()}, args.out)
    return EXIT_OK if residual <= RESIDUAL_LIMIT else EXIT_RESIDUAL


def cmd_diamond(args) -> int:
    if not args.spec or len(args.spec) != 2:
        raise ParseError("diamond needs exactly two --spec files")
    a, b = (_load_spec(p) for p in args.spec)
    res = dmd.diamond_distance(a, b)
    analytic = dmd.diamond_analytic_diagonal(a, b)
    lower = dmd.diamond_lower_bound(a, b, trials=args.trials or 200, seed=args.seed)
    _emit({"value": res.value, "method": res.method.value, "dual_gap_estimate": res.dual_gap_estimate,
           "analytic_value": None if analytic is None else analytic.value, "lower_bound": lower,
           "residuals": {k: float(v) for k, v in res.residuals.items()}}, args.out)
    return EXIT_OK


# experiments -------------------------------------------------------------------

def _grid(params, key, default):
    values = params.get(key, default)
    values = list(values) if isinstance(values, (list, tuple)) else [values]
    if not values:
        raise ParseError(f"grid '{key}' is empty")
    return values


def _complex(v) -> complex:
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    return complex(v)


def _exp_fig2(params):
    n = int(params.get("N", 100))
    eta = float(params.get("eta", 0.01))
    if n < 2 or not 0 < eta < 1:
        raise ParseError("fig2_depth_curve needs N >= 2 and 0 < eta < 1")
    if "D_grid" in params:
        grid = [float(d) for d in _grid(params, "D_grid", [])]
    else:
        points = int(params.get("grid_points", 200))
        grid = [(n - 1) * k / points for k in range(1, points + 1)]

    def row(d):
        spec = coh.uniform_spec_for_power(n, d)
        rep = coh.depth(coh.DepthQuery(spec, eta))
        return {"N": n, "eta": eta, "D": d, "alpha": -d / (n - 1), "analytic_depth": rep.analytic_bound,
                "simulated_depth": rep.simulated_depth, "agreement": rep.agreement, "status": "ok"}

    rows = _parallel_rows(_guard(row, ["analytic_depth", "simulated_depth", "agreement"]), grid)
    sims = [r["simulated_depth"] for r in rows if r["status"] == "ok"]
    summary = {"rows": len(rows), "all_agree": all(r["agreement"] for r in rows),
               "monotone_non_increasing": all(a >= b for a, b in zip(sims, sims[1:]))}
    for r in rows:
        if abs(r["D"] - (n - 1) / 2) < 1e-12:
            summary["depth_at_half_power"] = r["simulated_depth"]
    return ["N", "eta", "D", "alpha", "analytic_depth", "simulated_depth", "agreement", "status"], rows, summary


def _exp_prop3(params):
    n = int(params.get("N", 3))
    eps_grid = [float(e) for e in _grid(params, "epsilon", [0.1 * k for k in range(1, 10)])]
    trials = int(params.get("trials", 100))
    seed = int(params.get("seed", 0))

    def row(eps):
        alpha = float(params.get("alpha", -(1 + eps) / 2))
        a = ChannelSpec.ideal(n, uniform=alpha)
        b = ChannelSpec.faulty(n, eps, uniform=alpha)
        sdp = dmd.diamond_distance(a, b).value
        ana = dmd.diamond_analytic_diagonal(a, b)
        return {"N": n, "epsilon": eps, "alpha": alpha, "sdp_value": sdp,
                "analytic_value": None if ana is None else ana.value,
                "lower_bound": dmd.diamond_lower_bound(a, b, trials, seed),
                "abs_error": abs(sdp - eps), "status": "ok"}

    rows = _parallel_rows(_guard(row, ["sdp_value", "analytic_value", "lower_bound", "abs_error"]), eps_grid)
    errs = [r["abs_error"] for r in rows if r["status"] == "ok"]
    summary = {"rows": len(rows), "max_abs_error": max(errs) if errs else None,
               "failures": sum(r["status"] != "ok" for r in rows)}
    return ["N", "epsilon", "alpha", "sdp_value", "analytic_value", "lower_bound", "abs_error", "status"], rows, summary


def _exp_gamma(params):
    dims = [int(x) for x in _grid(params, "N", [2, 3])]
    eps_grid = [float(e) for e in _grid(params, "epsilon", [0.1, 0.3, 0.5])]
    points = int(params.get("gamma_points", 5))
    phase = float(params.get("gamma_phase", 0.0))
    alpha = params.get("alpha")
    items = []
    for n in dims:
        for eps in eps_grid:
            for k in range(points):
                mod = eps / (n - 1) * k / max(points - 1, 1)
                items.append((n, eps, mod * np.exp(1j * phase)))

    def row(item):
        n, eps, gamma = item
        a_val = float(alpha) if alpha is not None else -(1 + eps) / 2
        a = ChannelSpec.ideal(n, uniform=a_val)
        b = ChannelSpec.faulty(n, eps, gamma=gamma, uniform=a_val)
        sdp = dmd.diamond_distance(a, b).value
        return {"N": n, "epsilon": eps, "alpha": a_val, "gamma_re": gamma.real, "gamma_im": gamma.imag,
                "abs_gamma": abs(gamma), "sdp_value": sdp, "abs_error": abs(sdp - eps), "status": "ok"}

    rows = _parallel_rows(_guard(row, ["sdp_value", "abs_error"]), items)
    errs = [r["abs_error"] for r in rows if r["status"] == "ok"]
    summary = {"rows": len(rows), "max_abs_error": max(errs) if errs else None}
    return ["N", "epsilon", "alpha", "gamma_re", "gamma_im", "abs_gamma", "sdp_value", "abs_error", "status"], rows, summary


def _family_items(params):
    n = int(params.get("N", 3))
    if n < 2:
        raise ParseError("N must be at least 2")
    eps_grid = [float(e) for e in _grid(params, "epsilon", [0.2, 0.5])]
    gamma_grid = [_complex(g) for g in _grid(params, "gamma", [0.0, 0.1])]
    lambda_grid = [_complex(x) for x in _grid(params, "lambda", [0.0, 0.05])]
    alpha_grid = [float(a) for a in _grid(params, "alpha", [-0.6])]
    return [(n, e, g, l, a) for e in eps_grid for g in gamma_grid for l in lambda_grid for a in alpha_grid]


def _family_spec(item):
    n, eps, gamma, lam, alpha = item
    return ChannelSpec.faulty(n, eps, gamma=gamma, lambda_shift=lam, uniform=alpha)


def _exp_classify(params):
    budget = int(params.get("budget", DEFAULT_BUDGET))
    seed = int(params.get("seed", 0))

    def row(item):
        n, eps, gamma, lam, alpha = item
        base = {"N": n, "epsilon": eps, "alpha": alpha, "gamma_re": gamma.real, "gamma_im": gamma.imag,
                "lambda_re": lam.real, "lambda_im": lam.imag}
        spec = _family_spec(item)
        if not is_cptp(spec):
            return {**base, "cptp": False, "status": "not_cptp"}
        rep = classify(spec, budget=budget, seed=seed)
        return {**base, "cptp": True, "is_ncg": rep.is_ncg, "is_gio": rep.is_gio,
                "sio_certified": rep.sio_certificate is not None,
                "io_certified": rep.io_certificate is not None,
                "activates": rep.activates_coherence, "status": "ok"}

    rows = _parallel_rows(_guard(row, []), _family_items(params))
    ok = [r for r in rows if r["status"] == "ok"]
    summary = {"rows": len(rows), "cptp_rows": len(ok),
               "sio_certified_rows": sum(bool(r["sio_certified"]) for r in ok),
               "ncg_rows": sum(bool(r["is_ncg"]) for r in ok)}
    header = ["N", "epsilon", "alpha", "gamma_re", "gamma_im", "lambda_re", "lambda_im", "cptp",
              "is_ncg", "is_gio", "sio_certified", "io_certified", "activates", "status"]
    return header, rows, summary


def _exp_cp_scan(params):
    def row(item):
        n, eps, gamma, lam, alpha = item
        v = is_cptp(_family_spec(item))
        return {"N": n, "epsilon": eps, "alpha": alpha, "gamma_re": gamma.real, "gamma_im": gamma.imag,
                "lambda_re": lam.real, "lambda_im": lam.imag, "cptp": v.ok,
                "min_eigenvalue": v.min_eigenvalue, "tp_residual": v.tp_residual, "status": "ok"}

    rows = _parallel_rows(_guard(row, []), _family_items(params))
    summary = {"rows": len(rows), "cptp_rows": sum(bool(r.get("cptp")) for r in rows)}
    header = ["N", "epsilon", "alpha", "gamma_re", "gamma_im", "lambda_re", "lambda_im", "cptp",
              "min_eigenvalue", "tp_residual", "status"]
    return header, rows, summary


def _guard(fn, blank_keys):
    """Record a per-row failure in the row instead of aborting the run."""
    def wrapped(item):
        try:
            return fn(item)
        except (SolverDidNotConverge, NotCPTP, DimensionTooLarge, ValueError, RuntimeError) as exc:
            row = {"status": f"error:{type(exc).__name__}"}
            if isinstance(item, tuple):
                row.update(zip(("N", "epsilon", "gamma", "lambda", "alpha"), item))
            else:
                row["input"] = item
            row.update({k: None for k in blank_keys})
            return row
    return wrapped


_RUNNERS = {
    "fig2_depth_curve": _exp_fig2,
    "prop3_diamond_sweep": _exp_prop3,
    "gamma_independence": _exp_gamma,
    "classify_family": _exp_classify,
    "cp_region_scan": _exp_cp_scan,
}


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([_fmt(r.get(k)) for k in header])
    return buf.getvalue()


def run_experiment(config: dict, output_path=None) -> tuple[str, dict]:
    """Run one experiment config; returns the CSV text and the summary."""
    name = config.get("experiment")
    if name not in _RUNNERS:
        raise ParseError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    params = config.get("parameters", {})
    if not isinstance(params, dict):
        raise ParseError("'parameters' must be an object")
    try:
        header, rows, summary = _RUNNERS[name](params)
    except (TypeError, KeyError) as exc:
        raise ParseError(f"bad parameters for {name}: {exc}") from exc
    summary = {"experiment": name, **summary}
    text = rows_to_csv(header, rows)
    path = output_path or config.get("output_path")
    if path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        summary["csv"] = str(path)
        path.with_suffix(".summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return text, summary


def cmd_experiment(args) -> int:
    config = _load_json(args.config)
    if not isinstance(config, dict):
        raise ParseError("config must be a JSON object")
    text, summary = run_experiment(config, args.out)
    if "csv" not in summary:
        sys.stdout.write(text)
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


# entry point -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aqnn", description="Attractor quantum neural network toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, spec="one"):
        p = sub.add_parser(name, help=help_text)
        if spec == "one":
            p.add_argument("--spec", required=True, help="channel spec JSON file")
        elif spec == "two":
            p.add_argument("--spec", action="append", required=True, help="channel spec JSON (give twice)")
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=fn)
        return p

    p = add("apply", cmd_apply, "apply the channel to a state")
    p.add_argument("--state", required=True)
    p.add_argument("--iterations", type=int, default=1)
    p = add("iterate", cmd_apply, "apply the channel r times")
    p.add_argument("--state", required=True)
    p.add_argument("--iterations", type=int, required=True)
    add("choi", cmd_choi, "print the Choi matrix")
    add("cptp-check", cmd_cptp_check, "test complete positivity and trace preservation")
    p = add("classify", cmd_classify, "place the channel in the incoherent hierarchy")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="remix-search budget")
    p = add("dilate", cmd_dilate, "build and verify a Stinespring dilation")
    p.add_argument("--method", choices=("gio", "sio", "generic"), default="generic")
    p.add_argument("--trials", type=int, default=100)
    p = add("diamond", cmd_diamond, "diamond distance between two channels", spec="two")
    p.add_argument("--trials", type=int, default=200)
    p = add("experiment", cmd_experiment, "run an experiment config", spec=None)
    p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DimensionMismatch, DimensionTooLarge) as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except NotCPTP as exc:
        print(f"not CPTP: {exc}", file=sys.stderr)
        return EXIT_CPTP
    except ConstraintInfeasible as exc:
        print(f"infeasible: {exc}. Retry with --method generic.", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverDidNotConverge as exc:
        print(f"solver failure: {exc} {exc.residuals}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
