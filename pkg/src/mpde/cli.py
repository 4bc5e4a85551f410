"""Command line pipeline: parse a problem file, validate, build the Newton
polygon, solve, analyze growth, and write the report artifacts.

Artifacts written to the output directory:
  report.json   validation results, polygon data, exact 1/k_1 ("p/q"),
                fitted order/constants, verdicts
  coeffs.csv    solution coefficients, one row per (n, alpha)
  bounds.csv    the bound sequence b_n used for fitting
  polygon.svg   deterministic rendering of the Newton polygon

Exit status: 0 when the fitted order is consistent with 1/k_1 (or the fit is
inconclusive), 2 when inconsistent, 1 on input or validation errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import mpmath

from . import analysis
from .polygon import build_polygon, inverse_k1, polygon_slopes
from .precision import set_precision, to_mpf
from .problemspec import SpecError, override_run, materialize_problem, parse_problem_file
from .series import coefficient_rows, majorizes
from .solver import solve_formal, solve_majorant, residual_max_relative, validate
from .svgrender import render_polygon_svg


def _frac_str(f: Fraction) -> str:
    f = Fraction(f)
    return f"{f.numerator}/{f.denominator}"


def _float_str(x) -> str:
    return mpmath.nstr(x, 12) if x is not None else "n/a"


def _fit_dict(fit: analysis.FitResult) -> dict:
    return {
        "ok": fit.ok,
        "s_hat": float(fit.s_hat) if fit.ok else None,
        "stderr": float(fit.stderr) if fit.ok else None,
        "log_H": float(fit.log_h) if fit.ok else None,
        "log_C": float(fit.log_c) if fit.ok else None,
        "window": list(fit.window),
        "points_used": fit.n_used,
        "zero_entries": fit.zero_count,
        "note": fit.note,
    }


def run_pipeline(spec_path, out_dir, *, n_max=None, degree=None, precision=None,
                 radius=None, mode=None, quiet=False) -> int:
    """Full pipeline; returns the process exit code."""

    def say(msg):
        if not quiet:
            print(msg)

    try:
        spec_file = parse_problem_file(spec_path)
        run = override_run(spec_file.run, n_max=n_max, report_degree=degree,
                           precision_bits=precision, radius=radius, mode=mode)
        set_precision(run.precision_bits)
        problem, run = materialize_problem(spec_file, run)
    except (SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    report_check = validate(problem)
    if not report_check.passed:
        for check in report_check.checks:
            if not check.passed:
                print(f"error: condition {check.name} {check.detail}", file=sys.stderr)
        return 1

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        poly = build_polygon(problem.spec)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    inv_k1 = inverse_k1(problem.spec)
    say(f"{spec_file.name}: 1/k1 = {_frac_str(inv_k1)} "
        f"(slopes: {', '.join(str(k) for k in polygon_slopes(poly)) or 'none'})")

    try:
        sol = solve_formal(problem, run.n_max, run.report_degree)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    maj = solve_majorant(problem, run.n_max, run.report_degree)
    dominated = all(
        majorizes(maj.u.coeffs[n], sol.u.coeffs[n]) for n in range(sol.n_max + 1)
    )
    rel_residual = residual_max_relative(problem, sol)

    bounds = analysis.coefficient_bounds(sol, run.radius)
    window = (min(run.fit_window[0], run.n_max), min(run.fit_window[1], run.n_max))
    growth = analysis.make_growth_report(
        bounds, run.radius, inv_k1, problem.spec.M, problem.spec.m0.order, window)

    forcing_fit = None
    forcing_bounds = analysis.coefficient_bounds(problem.forcing, run.radius)
    if any(b != 0 for b in forcing_bounds) and len(forcing_bounds) >= 9:
        f_window = (min(window[0], len(forcing_bounds) - 1), len(forcing_bounds) - 1)
        if f_window[1] - f_window[0] + 1 >= 8:
            forcing_fit = analysis.fit_gevrey_order(forcing_bounds, f_window)

    say(f"fit: s_hat = {growth.fit.s_hat if growth.fit.ok else 'n/a'} "
        f"(stderr {growth.fit.stderr if growth.fit.ok else 'n/a'}); "
        f"verdict: {growth.verdict}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    report = {
        "problem_name": spec_file.name,
        "arithmetic_mode": run.mode,
        "precision_bits": run.precision_bits,
        "n_max": run.n_max,
        "report_degree": run.report_degree,
        "radius": _frac_str(run.radius),
        "validation": {
            "passed": report_check.passed,
            "conditions": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in report_check.checks
            ],
        },
        "newton_polygon": {
            "points": [[_frac_str(x), _frac_str(y)] for x, y in poly.points],
            "vertices": [[_frac_str(x), _frac_str(y)] for x, y in poly.vertices],
            "slopes": [_frac_str(k) for k in poly.slopes],
        },
        "inverse_k1": _frac_str(inv_k1),
        "d": _frac_str(growth.d),
        "solution": {
            "provenance": sol.provenance,
            "n_max": sol.n_max,
            "report_degree": sol.report_degree,
            "working_degrees": list(sol.valid_degrees),
        },
        "residual": {
            "max_relative": _float_str(rel_residual),
            "exact_zero": rel_residual == 0,
        },
        "majorant_dominates": dominated,
        "fit": _fit_dict(growth.fit),
        "gevrey_bound_witness": {
            "order": _frac_str(growth.witness.order),
            "H": _float_str(growth.witness.H),
            "C": _float_str(growth.witness.C),
            "bounded": growth.witness.bounded,
        },
        "intermediate_bound": {
            "d": _frac_str(growth.intermediate.d),
            "bounded": growth.intermediate.bounded,
            "tail_max": _float_str(growth.intermediate.tail_max),
            "middle_max": _float_str(growth.intermediate.middle_max),
        },
        "forcing_fit": _fit_dict(forcing_fit) if forcing_fit is not None else None,
        "verdict": growth.verdict,
    }

    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(out / "coeffs.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n"] + [f"alpha_{j + 1}" for j in range(problem.spec.dim)]
                        + ["re", "im"])
        for n, series_n in enumerate(sol.u.coeffs):
            for row in coefficient_rows(series_n):
                writer.writerow([str(n)] + row)

    with open(out / "bounds.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "b_n"])
        for n, b in enumerate(bounds):
            writer.writerow([str(n), mpmath.nstr(to_mpf(b), mpmath.mp.dps + 2)])

    render_polygon_svg(poly, out / "polygon.svg")

    say(f"artifacts written to {out}")
    return 2 if growth.verdict == "inconsistent" else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mpde",
        description="Formal solutions of moment PDE Cauchy problems and "
                    "Gevrey-order verification against the Newton polygon.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run the full pipeline on a problem file")
    run_p.add_argument("spec", help="path to the JSON problem file")
    run_p.add_argument("--out", default="mpde_out", help="output directory")
    run_p.add_argument("--n-max", type=int, default=None, help="override run.n_max")
    run_p.add_argument("--degree", type=int, default=None, help="override run.report_degree")
    run_p.add_argument("--precision", type=int, default=None, help="override precision bits")
    run_p.add_argument("--radius", default=None, help="override the report radius (p/q)")
    run_p.add_argument("--mode", choices=("exact", "float"), default=None,
                       help="override the arithmetic mode")
    run_p.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    if args.command == "run":
        return run_pipeline(args.spec, args.out, n_max=args.n_max, degree=args.degree,
                            precision=args.precision, radius=args.radius,
                            mode=args.mode, quiet=args.quiet)
    parser.error(f"unknown command {args.command!r}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
