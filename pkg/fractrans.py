#!/usr/bin/env python3
"""
fractrans - command-line entry point
Subcommands: convergence, solve, verify-kernels, compare-models, analyze
"""

import argparse
import csv
import math
import sys
from pathlib import Path

from assembly import CoefficientField
from config import Config
from convergence_analyzer import ConvergenceAnalyzer
from error_norms import compute_errors
from errors import CapacityError, FractransError
from exact_local import build_exact
from experiment_manager import (
    PRESETS, ExperimentSession, RunConfig, compare_models, interface_summary, load_run_config, preset,
    run_config_from_mapping, write_profile_csv, write_results_csv, write_solution_csv,
)
from mesh_interface import build_mesh
from quadrature_oracle import summarize_checks, verify_matrix
from run_logging import log_status
from solvers import ModelKind, ProblemConfig, run_model
from svg_plot import plot_slope_fits, write_profile_svg
from utils import format_time, parse_float_list, parse_int_list
from version import get_version_display


def _add_problem_args(parser, sigma3=True):
    parser.add_argument("--b", default=None, help="Interface location p/q (default: 1/2)")
    parser.add_argument("--sigma1", type=float, default=None, help="Coefficient on (0, b)")
    parser.add_argument("--sigma2", type=float, default=None, help="Coefficient on (b, 1)")
    if sigma3:
        parser.add_argument("--sigma3", default=None,
                            help="Cross coefficient of the old model: a number, 'avg' or 'zero' (default: avg)")
    parser.add_argument("--alpha", type=float, default=None, help="Source exponent, f(x) = x^alpha")


def _overrides(args) -> dict:
    """Flag values that were actually given, keyed like the run configuration file"""
    sigma3 = getattr(args, "sigma3", None)
    if sigma3 is not None and str(sigma3).strip().lower() == "avg":
        sigma3 = "average"
    data = {
        "b": args.b, "sigma1": args.sigma1, "sigma2": args.sigma2, "sigma3": sigma3, "alpha": args.alpha,
        "s": getattr(args, "s", None), "levels": getattr(args, "levels", None),
        "models": getattr(args, "models", None),
    }
    if getattr(args, "coupled", False):
        data["coupled"] = True
    if getattr(args, "allow_critical", False):
        data["allow_critical"] = True
    return {k: v for k, v in data.items() if v is not None}


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def cmd_convergence(args) -> int:
    if args.config and args.preset:
        log_status("CONFIG", "give either --config or --preset, not both", "error")
        return 2
    overrides = _overrides(args)
    if args.config:
        configs = [load_run_config(args.config, overrides)]
    elif args.preset:
        configs = [run_config_from_mapping(overrides, base=c) if overrides else c for c in preset(args.preset)]
    else:
        configs = [run_config_from_mapping(overrides)]

    session = ExperimentSession(configs, out_dir=args.out, name=args.name, threads=args.threads)
    paths = session.run()
    log_status("OUTPUT", f"results: {paths['csv']}", "ok")
    log_status("OUTPUT", f"manifest: {paths['manifest']}", "ok")

    analyzer = ConvergenceAnalyzer(session.records)
    fits = analyzer.print_report()
    if args.plot:
        plot_slope_fits(session.session_dir / "plots", fits)
    failed = sum(1 for o in session.outcomes if not o.ok)
    return 1 if failed else 0


def cmd_solve(args) -> int:
    kind = ModelKind.parse(args.model)
    sigma3 = args.sigma3
    if sigma3 is not None:
        policy = str(sigma3).strip().lower()
        sigma3 = None if policy in ("avg", "average") else (0.0 if policy == "zero" else float(policy))
    problem = ProblemConfig(b=args.b or "1/2", sigma1=args.sigma1 if args.sigma1 is not None else 1.0,
                            sigma2=args.sigma2 if args.sigma2 is not None else 1.0,
                            alpha=args.alpha if args.alpha is not None else 0.0, s=args.s, sigma3=sigma3)
    mesh = build_mesh(problem.b, args.level)
    log_status("SOLVE", f"{kind.value} on {mesh.describe()}")
    solution = run_model(kind, problem, mesh)

    print(f"u(b)       = {solution.interface_value:.12g}")
    summary = interface_summary(RunConfig(b=problem.b, sigma1=problem.sigma1, sigma2=problem.sigma2),
                                args.s if kind.fractional else None)
    print(f"c~         = {summary['c_tilde']:.12g}")
    if "c_star" in summary:
        print(f"c*         = {summary['c_star']:.12g}")

    if not RunConfig(b=problem.b, sigma1=problem.sigma1, sigma2=problem.sigma2).critical:
        exact = build_exact(mesh.b, problem.sigma1, problem.sigma2, problem.alpha)
        report = compute_errors(solution, exact, mesh, args.s if kind.fractional else None)
        for name, value in report.as_dict().items():
            print(f"{name:<10} = {value:.6e}")
    else:
        log_status("SOLVE", "critical contrast: no local exact solution to compare against", "warn")

    out = Path(args.out) if args.out else Config.get_output_dir() / f"solve_{kind.value}.csv"
    write_solution_csv(out, solution)
    log_status("OUTPUT", f"solution: {out}", "ok")
    return 0


def cmd_verify_kernels(args) -> int:
    orders = parse_float_list(args.s)
    levels = parse_int_list(args.levels)
    coeff = CoefficientField(args.sigma1, args.sigma2, args.sigma3)
    meshes = [build_mesh(args.b, level) for level in levels]
    for mesh in meshes:
        if mesh.n_cells > Config.VERIFY_MAX_CELLS:
            raise CapacityError(
                f"level {mesh.level} gives {mesh.n_cells} cells; the limit is {Config.VERIFY_MAX_CELLS}")

    rows = []
    for s in orders:
        for mesh in meshes:
            checks = verify_matrix(mesh, coeff, s, args.tol)
            worst = summarize_checks(checks)
            for case_class in ("diag", "superdiag", "far"):
                in_class = [c for c in checks if c.case_class == case_class]
                if not in_class:
                    continue
                unconverged = sum(1 for c in in_class if not c.converged)
                rel = worst[case_class]
                failed = unconverged > 0 or rel > Config.VERIFY_FAIL_THRESHOLD
                rows.append({"s": s, "level": mesh.level, "cells": mesh.n_cells, "case_class": case_class,
                             "entries": len(in_class), "max_relative": rel, "unconverged": unconverged,
                             "status": "failed" if failed else "ok"})
                icon = "❌" if failed else "✅"
                print(f"{icon} s={s:<8g} cells={mesh.n_cells:<4d} {case_class:<10} max rel {rel:.3e}"
                      + (f" ({unconverged} unconverged)" if unconverged else ""))

    out = Path(args.out) if args.out else Config.get_output_dir() / "verify_kernels.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0]) if rows else ["s"])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (Config.CSV_FLOAT_FORMAT % v if isinstance(v, float) else v)
                             for k, v in row.items()})
    log_status("OUTPUT", f"discrepancies: {out}", "ok")
    return 1 if any(r["status"] == "failed" for r in rows) else 0


def cmd_compare_models(args) -> int:
    mapping = _overrides(args)
    mapping.pop("s", None)
    mapping.pop("levels", None)
    config = run_config_from_mapping(mapping)
    models = [ModelKind.parse(m) for m in args.models.replace(",", " ").split()] if args.models else None
    outcomes = compare_models(config, args.level, args.s, models)

    out_dir = Config.get_output_dir(args.out) / (args.name or "compare")
    ok = [o for o in outcomes if o.ok]
    write_results_csv(out_dir / "errors.csv", [o.record for o in ok])
    if ok:
        solutions = [o.solution for o in ok]
        write_profile_csv(out_dir / "profiles.csv", solutions)
        curves = {sol.kind.value: sol.profile() for sol in solutions}
        write_profile_svg(out_dir / "profiles.svg", curves, interface=config.b.value,
                          title=f"b={config.b}, sigma=({config.sigma1:g}, {config.sigma2:g}), "
                                f"alpha={config.alpha:g}, s={args.s:g}")

    for o in ok:
        rec = o.record
        h1 = "n/a" if math.isnan(rec.h1) else f"{rec.h1:.4e}"
        print(f"✅ {rec.model:<11} u(b)={o.solution.interface_value: .8f}  H1 error {h1}  "
              f"({format_time(o.walltime_ms / 1000.0)})")
    log_status("OUTPUT", f"comparison written to {out_dir}", "ok")
    return 0 if len(ok) == len(outcomes) else 1


def cmd_analyze(args) -> int:
    analyzer = ConvergenceAnalyzer.from_csv(args.csv)
    fits = analyzer.print_report()
    if args.plot:
        plot_slope_fits(args.plot, fits)
    return 0


# ============================================================================
# PARSER
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractrans", description="Fractional transmission problems with sign-changing coefficients")
    parser.add_argument("--version", action="version", version=f"fractrans {get_version_display()}")
    parser.add_argument("--quiet", action="store_true", help="Suppress status lines")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convergence", help="Run a convergence sweep and write CSV + manifest")
    p.add_argument("--config", type=Path, default=None, help="YAML run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None, help="Named run configuration")
    _add_problem_args(p)
    p.add_argument("--s", default=None, help="Fractional orders, e.g. '0.96,0.99'")
    p.add_argument("--levels", default=None, help="Refinement levels, e.g. '4-9' or '5,6,7'")
    p.add_argument("--models", default=None, help="Models, e.g. 'new,simplified'")
    p.add_argument("--coupled", action="store_true", help="Pair each level with 1 - s = h/4")
    p.add_argument("--allow-critical", action="store_true", help="Run fractional models at critical contrast")
    p.add_argument("--name", default=None, help="Session name (output subdirectory)")
    p.add_argument("--out", default=None, help=f"Output directory (default: {Config.OUTPUT_DIR})")
    p.add_argument("--threads", type=int, default=None, help="Worker count (default: FRACTRANS_THREADS or CPUs)")
    p.add_argument("--plot", action="store_true", help="Write log-log SVG plots of the fitted slopes")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("solve", help="Solve one model on one mesh")
    p.add_argument("--model", required=True, choices=[k.value for k in ModelKind])
    _add_problem_args(p)
    p.add_argument("--s", type=float, default=None, help="Fractional order")
    p.add_argument("--level", type=int, required=True, help="Refinement level k (n_cells = q 2^k)")
    p.add_argument("--out", default=None, help="Solution CSV path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify-kernels", help="Compare closed-form entries with the quadrature oracle")
    p.add_argument("--s", required=True, help="Fractional orders")
    p.add_argument("--levels", required=True, help="Refinement levels (at most 32 cells)")
    p.add_argument("--b", default="1/2")
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--sigma3", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=None, help=f"Oracle tolerance (default: {Config.ORACLE_TOLERANCE:g})")
    p.add_argument("--out", default=None, help="Discrepancy CSV path")
    p.set_defaults(func=cmd_verify_kernels)

    p = sub.add_parser("compare-models", help="Run every model on one configuration (profiles + errors)")
    _add_problem_args(p)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--models", default=None, help="Subset of models (default: all five)")
    p.add_argument("--allow-critical", action="store_true")
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare_models)

    p = sub.add_parser("analyze", help="Re-fit slopes from an existing results CSV")
    p.add_argument("--csv", type=Path, required=True)
    p.add_argument("--plot", type=Path, default=None, help="Directory for log-log SVG plots")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.quiet:
        Config.QUIET = True
    try:
        return args.func(args)
    except FractransError as exc:
        log_status(exc.error_class, str(exc), "error")
        return 2
    except ValueError as exc:
        log_status("INPUT", str(exc), "error")
        return 2


if __name__ == "__main__":
    sys.exit(main())
