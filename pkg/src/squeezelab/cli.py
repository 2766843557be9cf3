"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 numerical-consistency error (invalid state data, non-Hermitian input).
Verdicts are never encoded in exit codes; they live in the reports.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .examples import ExampleCurve, example1_curve, example2_curves
from .hilbert import (
    DimensionCapError,
    HermiticityError,
    NumericalConsistencyError,
    StateValidationError,
)
from .invariant import ALT_MARGIN_KEYS, GENERALIZED_MARGIN_KEYS, evaluate_generalized_invariant
from .observables import parse_observable_spec
from .oracle import run_verification
from .reporting import render_curve_png, write_curve_csv, write_gnuplot_script
from .serialize import format_float, load_state_file, write_json
from .witness import VERDICT_DETECTED, VERDICT_NOT_DETECTED, VERDICT_TOL, full_report


def _with_suffix(path, tag: str | None, suffix: str) -> Path:
    path = Path(path)
    stem = path.stem if tag is None else f"{path.stem}_{tag}"
    return path.with_name(stem + suffix)


def _emit_curve(curve: ExampleCurve, columns, out, tag, title, shade, args) -> Path:
    csv_path = _with_suffix(out, tag, ".csv")
    write_curve_csv(csv_path, curve, columns)
    print(f"wrote {csv_path}")
    if not args.no_fig:
        png_path = _with_suffix(out, tag, ".png")
        render_curve_png(png_path, curve, columns, title, shade=shade)
        print(f"wrote {png_path}")
    if args.gnuplot:
        gp_path = _with_suffix(out, tag, ".gp")
        write_gnuplot_script(gp_path, csv_path, curve, columns, title)
        print(f"wrote {gp_path}")
    return csv_path


def _describe_violations(curve: ExampleCurve, name: str) -> str:
    values = curve.series[name]
    i_min = int(np.argmin(values))
    head = f"min {name} = {format_float(values[i_min])} at {curve.parameter} = {format_float(curve.grid[i_min])}"
    intervals = curve.violation_intervals(name)
    if not intervals:
        return head + "; no violation"
    ranges = ", ".join(f"[{format_float(lo)}, {format_float(hi)}]" for lo, hi in intervals)
    count = int(curve.violation_mask(name).sum())
    return head + f"; violated at {count}/{curve.grid.size} grid points, {curve.parameter} in {ranges}"


def cmd_example1(args) -> int:
    grid = np.linspace(0.0, 1.0, args.steps)
    curve = example1_curve(grid)
    _emit_curve(curve, ("L", "G", "delta"), args.out, None,
                "naive vs corrected margin on a separable mixture", "L", args)
    print(_describe_violations(curve, "L"))
    print(_describe_violations(curve, "G"))
    print("note: L < 0 on separable states is a false positive; "
          "the corrected margin G = L + delta stays nonnegative")
    return 0


def cmd_example2(args) -> int:
    grid = np.linspace(0.0, args.theta_max, args.steps)
    spin_curve, dich_curve = example2_curves(args.n, grid)
    both = args.suite == "both"
    if args.suite in ("spin", "both"):
        _emit_curve(spin_curve, ("F1", "F2", "F3", "F4"), args.out,
                    "spin" if both else None,
                    f"fixed-number spin margins, N={args.n}", None, args)
        for key in ("F1", "F2", "F3", "F4"):
            vals = spin_curve.series[key]
            print(f"{key}: min {format_float(vals.min())}, max {format_float(vals.max())}")
    if args.suite in ("dichotomic", "both"):
        columns = GENERALIZED_MARGIN_KEYS + ALT_MARGIN_KEYS
        _emit_curve(dich_curve, columns, args.out,
                    "dichotomic" if both else None,
                    f"fluctuating-number dichotomic margins, N={args.n}", "G3_alt", args)
        print(_describe_violations(dich_curve, "G3"))
        print(_describe_violations(dich_curve, "G3_alt"))
    return 0


def cmd_witness(args) -> int:
    state = load_state_file(args.state)
    triple = parse_observable_spec(args.observables, state.sites, state.local_dim)
    if args.suite == "invariant":
        margins, matrices, delta, n_mean = evaluate_generalized_invariant(state, triple)
        detected = any(margins[k] < -VERDICT_TOL for k in GENERALIZED_MARGIN_KEYS)
        report = {
            "suite": "invariant",
            "delta": delta,
            "margins": {k: margins[k] for k in GENERALIZED_MARGIN_KEYS},
            "diagnostics": {k: margins[k] for k in ALT_MARGIN_KEYS},
            "verdict": VERDICT_DETECTED if detected else VERDICT_NOT_DETECTED,
            "n_mean": n_mean,
            "matrices": matrices.to_json_dict(),
            "warnings": [],
        }
    else:
        report = full_report(
            state,
            triple,
            args.suite,
            n_fixed=args.n_fixed,
            allow_fluctuating=args.allow_fluctuating,
        ).to_json_dict()
    text = json.dumps(report, indent=2)
    print(text)
    if args.report:
        write_json(args.report, report)
        print(f"wrote {args.report}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    local_dims = tuple(int(d) for d in args.local_dims.split(","))
    summary = run_verification(
        trials=args.trials,
        seed=args.seed,
        max_sites=args.max_sites,
        local_dims=local_dims,
        tolerance=args.tolerance,
    )
    for check in summary.checks:
        flag = "PASS" if check.passed else "FAIL"
        print(f"{flag}  {check.name:32s} trials={check.trials:7d}  "
              f"min_margin={format_float(check.min_margin)}")
        for failure in check.failures:
            print(f"      failing draw: {failure}")
    if args.out:
        write_json(args.out, summary.to_json_dict())
        print(f"wrote {args.out}")
    print("verification " + ("PASSED" if summary.passed else "FAILED"))
    return 0 if summary.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squeezelab",
        description="entanglement witnesses robust to particle-number fluctuations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("example1", help="separable mixture false-positive curve")
    p1.add_argument("--steps", type=int, default=101, help="grid points in [0, 1] (default 101)")
    p1.add_argument("--out", default="example1.csv", help="output CSV path")
    p1.add_argument("--no-fig", action="store_true", help="skip the PNG figure")
    p1.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    p1.set_defaults(func=cmd_example1)

    p2 = sub.add_parser("example2", help="one-axis twisting sweeps")
    p2.add_argument("--n", type=int, default=5, help="number of spin-1 sites (default 5)")
    p2.add_argument("--theta-max", type=float, default=2 * np.pi, help="grid end (default 2 pi)")
    p2.add_argument("--steps", type=int, default=200, help="grid points (default 200)")
    p2.add_argument("--suite", choices=("spin", "dichotomic", "both"), default="both")
    p2.add_argument("--out", default="example2.csv", help="output CSV path (suite tag appended)")
    p2.add_argument("--no-fig", action="store_true", help="skip the PNG figures")
    p2.add_argument("--gnuplot", action="store_true", help="also write gnuplot scripts")
    p2.set_defaults(func=cmd_example2)

    pw = sub.add_parser("witness", help="evaluate a suite on a state file")
    pw.add_argument("--state", required=True, help="state JSON file")
    pw.add_argument("--observables", required=True,
                    help="spin:<j> | dichotomic:<m0>,<m1>[,<factor>] | projector:<file>")
    pw.add_argument("--suite", choices=("generalized", "original", "naive", "invariant"),
                    default="generalized")
    pw.add_argument("--report", help="write the JSON report here as well as stdout")
    pw.add_argument("--n-fixed", type=int, default=None,
                    help="particle number for the original suite (default: site count)")
    pw.add_argument("--allow-fluctuating", action="store_true",
                    help="evaluate the original suite even if the particle number fluctuates")
    pw.set_defaults(func=cmd_witness)

    pv = sub.add_parser("verify", help="run the randomized verification suite")
    pv.add_argument("--trials", type=int, default=1000, help="samples per check group")
    pv.add_argument("--seed", type=int, default=42)
    pv.add_argument("--max-sites", type=int, default=4)
    pv.add_argument("--local-dims", default="2,3", help="comma list of local dimensions")
    pv.add_argument("--tolerance", type=float, default=1e-9, help="margin tolerance")
    pv.add_argument("--out", help="write the JSON summary here")
    pv.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StateValidationError, HermiticityError, NumericalConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DimensionCapError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
