"""Command-line front end.

Subcommands: estimate, simulate, montecarlo, bootstrap, verify.  Every
stochastic subcommand requires an explicit --seed and is reproducible from
it; reports are emitted as JSON, with optional per-row CSVs and matplotlib
figures next to them.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import report as reportmod
from .core import (
    CodingError,
    GraphError,
    NeighborGraph,
    SpatialDataset,
    build_lattice_graph,
    center_dataset,
    code_pairs,
    extract_pair_sample,
    read_edge_list,
)
from .estimator import SolverOptions, Theta, compute_stats, estimate
from .inference import confidence_intervals, fisher_information
from .oracle import brute_force_maximize
from .resample import besag_average, coding_bootstrap
from .simulate import DgpConfig, generate_lattice_sem, generate_pair_sample, run_monte_carlo

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class InputError(Exception):
    """User-facing input problem; maps to exit status 1."""


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a dataset CSV: header row, then id, response, k predictors.

    Unit ids must be the integers 0..n-1 in any order.  Numbers use a decimal
    point; missing values are rejected.
    """
    rows: dict[int, tuple[float, list[float]]] = {}
    k = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file")
        if len(header) < 2:
            raise InputError(f"{path}:1: header needs id, response and predictors")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if k is None:
                k = len(row) - 2
                if k < 1:
                    raise InputError(f"{path}:{lineno}: no predictor columns")
            if len(row) != k + 2:
                raise InputError(f"{path}:{lineno}: expected {k + 2} fields, got {len(row)}")
            try:
                unit = int(row[0])
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-integer unit id {row[0]!r}")
            try:
                values = [float(v) for v in row[1:]]
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric value in {row[1:]!r}")
            if any(np.isnan(values)):
                raise InputError(f"{path}:{lineno}: missing value not allowed")
            if unit in rows:
                raise InputError(f"{path}:{lineno}: duplicate unit id {unit}")
            rows[unit] = (values[0], values[1:])
    if not rows:
        raise InputError(f"{path}: no data rows")
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise InputError(f"{path}: unit ids must be 0..{n - 1}")
    y = np.array([rows[i][0] for i in range(n)])
    X = np.array([rows[i][1] for i in range(n)])
    return y, X


def _build_graph(args, n: int) -> NeighborGraph:
    if args.graph is not None and args.rows is not None:
        raise InputError("give either --graph or --rows/--cols, not both")
    if args.graph is not None:
        try:
            graph = read_edge_list(args.graph)
        except GraphError as exc:
            raise InputError(str(exc))
        if graph.n > n:
            raise InputError(
                f"graph refers to unit {graph.n - 1} but the dataset has {n} units"
            )
        if graph.n < n:
            # Trailing isolated units carry no edges in the file.
            graph = NeighborGraph.from_edges(n, graph.edges())
        return graph
    if args.rows is not None:
        if args.cols is None:
            raise InputError("--rows requires --cols")
        if args.rows * args.cols != n:
            raise InputError(
                f"lattice {args.rows}x{args.cols} has {args.rows * args.cols} units, "
                f"dataset has {n}"
            )
        return build_lattice_graph(args.rows, args.cols, args.scheme)
    raise InputError("a graph is required: --graph FILE or --rows/--cols")


def _solver_options(args) -> SolverOptions:
    return SolverOptions(
        tol=args.tol,
        max_iter=args.max_iter,
        fix_psi_zero=getattr(args, "fix_psi_zero", False),
    )


def _require_seed(args):
    if args.seed is None:
        raise InputError("--seed is required for stochastic commands")


def _write_json(payload: dict, output) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _load_estimation_inputs(args):
    if args.input is None:
        raise InputError("--input CSV is required")
    y, X = read_dataset_csv(args.input)
    graph = _build_graph(args, y.shape[0])
    dataset = SpatialDataset(y=y, X=X, graph=graph)
    centering = {"centered": False, "y_mean": 0.0, "x_means": [0.0] * dataset.k}
    if not args.no_center:
        dataset = center_dataset(dataset)
        centering = {
            "centered": True,
            "y_mean": dataset.y_mean,
            "x_means": [float(v) for v in dataset.x_means],
        }
    return dataset, centering


def cmd_estimate(args) -> int:
    _require_seed(args)
    dataset, centering = _load_estimation_inputs(args)
    coding = code_pairs(dataset.graph, args.seed, mode=args.mode, q=args.pairs)
    sample = extract_pair_sample(dataset, coding)
    fit = estimate(sample, options=_solver_options(args),
                   coding_rate=coding.coding_rate(dataset.n))
    stats = compute_stats(sample)
    info = fisher_information(fit.theta, stats)
    inference = confidence_intervals(fit, info, level=args.level, stats=stats)
    payload = {
        "command": "estimate",
        "seed": args.seed,
        "coding": {
            "mode": args.mode,
            "q": coding.q,
            "pairs": [[int(i), int(l)] for i, l in coding.pairs],
        },
        "centering": centering,
        "estimate": fit.to_dict(),
        "inference": inference.to_dict(),
    }
    _write_json(payload, args.output)
    if args.figures is not None:
        figdir = Path(args.figures)
        figdir.mkdir(parents=True, exist_ok=True)
        reportmod.psi_profile_figure(sample, fit, figdir / "psi_profile.png")
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


def cmd_simulate(args) -> int:
    _require_seed(args)
    beta = [float(v) for v in args.beta.split(",")]
    dataset = generate_lattice_sem(
        args.rows, args.cols, beta, args.sigma2, args.lam, args.seed
    )
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    data_path = out.with_suffix(".csv")
    graph_path = out.with_suffix(".edges")
    with open(data_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "y"] + [f"x{j + 1}" for j in range(dataset.k)])
        for i in range(dataset.n):
            writer.writerow([i, repr(float(dataset.y[i]))]
                            + [repr(float(v)) for v in dataset.X[i]])
    with open(graph_path, "w", encoding="utf-8") as fh:
        for i, l in dataset.graph.edges():
            fh.write(f"{i} {l}\n")
    payload = {
        "command": "simulate",
        "seed": args.seed,
        "rows": args.rows,
        "cols": args.cols,
        "beta": beta,
        "sigma2": args.sigma2,
        "lam": args.lam,
        "n": dataset.n,
        "data_csv": str(data_path),
        "graph_edges": str(graph_path),
    }
    _write_json(payload, out.with_suffix(".json"))
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    _require_seed(args)
    beta = np.array([float(v) for v in args.beta.split(",")])
    theta = Theta(beta=beta, sigma2=args.sigma2, psi=args.psi)
    config = DgpConfig(q=args.pairs, theta=theta, seed=args.seed, k=beta.shape[0])
    mc = run_monte_carlo(config, args.reps, seed=args.seed,
                         options=_solver_options(args))
    payload = {
        "command": "montecarlo",
        "seed": args.seed,
        "config": {
            "q": args.pairs,
            "reps": args.reps,
            "beta": [float(v) for v in beta],
            "sigma2": args.sigma2,
            "psi": args.psi,
        },
        "report": mc.to_dict(),
    }
    _write_json(payload, args.output)
    if args.per_rep_csv is not None:
        reportmod.write_estimates_csv(mc.estimates, mc.parameter_names, args.per_rep_csv)
    if args.figures is not None:
        figdir = Path(args.figures)
        figdir.mkdir(parents=True, exist_ok=True)
        reportmod.montecarlo_figure(mc, figdir / "montecarlo_estimates.png")
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    _require_seed(args)
    dataset, centering = _load_estimation_inputs(args)
    boot = coding_bootstrap(
        dataset,
        codings=args.codings,
        seed=args.seed,
        mode=args.mode,
        q=args.pairs,
        level=args.level,
        options=_solver_options(args),
    )
    average = besag_average(boot)
    payload = {
        "command": "bootstrap",
        "seed": args.seed,
        "centering": centering,
        "config": {
            "codings": args.codings,
            "mode": args.mode,
            "pairs": args.pairs,
            "level": args.level,
        },
        "report": boot.to_dict(include_estimates=args.estimates_csv is None),
        "besag_average": {
            "beta": [float(v) for v in average.beta],
            "sigma2": float(average.sigma2),
            "psi": float(average.psi),
        },
    }
    _write_json(payload, args.output)
    if args.estimates_csv is not None:
        reportmod.write_estimates_csv(boot.estimates, boot.parameter_names,
                                      args.estimates_csv)
    if args.figures is not None:
        figdir = Path(args.figures)
        figdir.mkdir(parents=True, exist_ok=True)
        reportmod.bootstrap_figure(boot, figdir / "bootstrap_estimates.png")
    return EXIT_OK


def cmd_verify(args) -> int:
    _require_seed(args)
    if args.input is not None:
        dataset, _ = _load_estimation_inputs(args)
        coding = code_pairs(dataset.graph, args.seed, mode=args.mode, q=args.pairs)
        sample = extract_pair_sample(dataset, coding)
    else:
        if args.pairs is None:
            raise InputError("verify without --input needs --pairs for the synthetic sample")
        beta = np.array([float(v) for v in args.beta.split(",")])
        theta = Theta(beta=beta, sigma2=args.sigma2, psi=args.psi)
        config = DgpConfig(q=args.pairs, theta=theta, seed=args.seed, k=beta.shape[0])
        sample = generate_pair_sample(config)
    fit = estimate(sample, options=_solver_options(args))
    resolution = (args.grid, args.grid - 3) if sample.k == 1 else None
    oracle = brute_force_maximize(sample, resolution=resolution)
    diff = max(
        float(np.max(np.abs(fit.theta.beta - oracle.beta))),
        abs(fit.theta.sigma2 - oracle.sigma2),
        abs(fit.theta.psi - oracle.psi),
    )
    agree = bool(diff <= args.tolerance) and fit.converged
    payload = {
        "command": "verify",
        "seed": args.seed,
        "estimator": fit.to_dict(),
        "oracle": oracle.to_dict(),
        "max_abs_difference": diff,
        "tolerance": args.tolerance,
        "agree": agree,
    }
    _write_json(payload, args.output)
    return EXIT_OK if agree else EXIT_NOT_CONVERGED


def _add_common_solver_flags(parser):
    parser.add_argument("--tol", type=float, default=1e-10,
                        help="fixed-point parameter tolerance")
    parser.add_argument("--max-iter", type=int, default=200)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--output", default=None, help="JSON report path (default stdout)")


def _add_data_flags(parser):
    parser.add_argument("--input", required=False, default=None,
                        help="dataset CSV: id, response, predictors")
    parser.add_argument("--graph", default=None, help="edge-list file, one 'i l' per line")
    parser.add_argument("--rows", type=int, default=None)
    parser.add_argument("--cols", type=int, default=None)
    parser.add_argument("--scheme", choices=["rook", "queen"], default="rook")
    parser.add_argument("--no-center", action="store_true",
                        help="skip mean-centering of y and X")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairml",
        description="Pairwise (bivariate marginal) likelihood spatial regression",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("estimate", help="code pairs and fit the model")
    _add_data_flags(p)
    _add_common_solver_flags(p)
    p.add_argument("--mode", choices=["exhaustive", "subsample"], default="exhaustive")
    p.add_argument("--pairs", type=int, default=None, help="pair count for subsample mode")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--fix-psi-zero", action="store_true",
                   help="constrain the pair correlation to zero")
    p.add_argument("--figures", default=None, help="directory for report figures")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="generate a lattice SEM dataset")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--beta", default="1.0", help="comma-separated coefficients")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=0.5, help="spatial error parameter")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", required=True,
                   help="output prefix; writes .csv, .edges and .json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("montecarlo", help="replicate the pair-level DGP and re-estimate")
    _add_common_solver_flags(p)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--pairs", type=int, required=True, help="pairs per replication")
    p.add_argument("--beta", default="1.0")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--psi", type=float, default=0.012)
    p.add_argument("--per-rep-csv", default=None,
                   help="CSV of per-replication estimates")
    p.add_argument("--figures", default=None)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("bootstrap", help="re-estimate under many random codings")
    _add_data_flags(p)
    _add_common_solver_flags(p)
    p.add_argument("--codings", type=int, required=True)
    p.add_argument("--mode", choices=["exhaustive", "subsample"], default="subsample")
    p.add_argument("--pairs", type=int, default=None,
                   help="pairs per coding (default n // 4 in subsample mode)")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--estimates-csv", default=None)
    p.add_argument("--figures", default=None)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("verify", help="check the solver against the brute-force oracle")
    _add_data_flags(p)
    _add_common_solver_flags(p)
    p.add_argument("--mode", choices=["exhaustive", "subsample"], default="exhaustive")
    p.add_argument("--pairs", type=int, default=None)
    p.add_argument("--beta", default="1.0")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--psi", type=float, default=0.3)
    p.add_argument("--grid", type=int, default=200, help="oracle grid resolution")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GraphError, CodingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
