"""Command-line entry point: classify, verify, polys, example, scan.

Exit codes: 0 when every check passes, 1 when some check failed, 2 for
invalid input (bad JSON, unreadable files, invalid specs, usage errors).
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional

import src.config as config
from src.catalog import run_scan, run_suite
from src.errors import BfconeError
from src.families import (
    FamilySpec,
    bryant_type,
    example_spec,
    order_one_polys,
    predicted_polys,
    with_overrides,
)
from src.indefherm import describe, load_operator

logger = logging.getLogger(__name__)


def _json_print(payload: Any) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _load_json_object(value: str) -> dict:
    with Path(value).open("r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict):
        raise ValueError("Expected a JSON object.")
    return payload


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bfcone", description="Numerical verification of Bochner-flat cone constructions"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    classify_cmd = sub.add_parser("classify", help="Classify an eta-hermitian operator")
    classify_cmd.add_argument("operator", type=str, help="Operator JSON file")
    classify_cmd.add_argument("--tol", type=float, default=config.CLASSIFY_TOL)

    verify_cmd = sub.add_parser("verify", help="Run the identity suite on a family spec")
    verify_cmd.add_argument("spec", type=str, help="Family spec JSON file")
    verify_cmd.add_argument(
        "--ids", nargs="*", default=None, help="Catalog ids to run (default: all applicable)"
    )
    verify_cmd.add_argument("--samples", type=int, default=None)
    verify_cmd.add_argument("--seed", type=int, default=None)
    verify_cmd.add_argument("--threads", type=int, default=None)
    verify_cmd.add_argument("--t", type=float, default=0.7, help="Polynomial argument of the t-identities")
    verify_cmd.add_argument("--out", type=Path, default=None, help="Report JSON path")
    verify_cmd.add_argument("--csv", type=Path, default=None, help="Per-sample CSV path")
    verify_cmd.add_argument("--timing", action="store_true", help="Record wall time in the report")

    polys_cmd = sub.add_parser("polys", help="Print the predicted Bryant polynomials")
    polys_cmd.add_argument("spec", type=str, help="Family spec JSON file")

    example_cmd = sub.add_parser("example", help="Emit the spec of a named example")
    example_cmd.add_argument(
        "name", choices=["bryant", "wproj", "einstein", "tachibana", "flat", "negative"]
    )
    example_cmd.add_argument("params", nargs="*", type=float)
    example_cmd.add_argument("--mdim", type=int, default=2)
    example_cmd.add_argument("--sign", type=float, default=None, help="wproj: sign of d")
    example_cmd.add_argument("--lam", type=float, default=None, help="einstein case 4: lambda")
    example_cmd.add_argument("--case", type=int, default=None, help="einstein: case")
    example_cmd.add_argument("--d", type=float, default=None, help="tachibana: d")
    example_cmd.add_argument("--out", type=Path, default=None)

    scan_cmd = sub.add_parser("scan", help="Run verify over a parameter grid")
    scan_cmd.add_argument("grid", type=str, help="Grid JSON file")
    scan_cmd.add_argument("--threads", type=int, default=None)
    scan_cmd.add_argument("--out", type=Path, default=None, help="CSV path")
    return parser


def _verify(args: argparse.Namespace) -> int:
    spec = FamilySpec.load(args.spec)
    changes = {}
    if args.samples is not None:
        changes["samples"] = args.samples
    if args.seed is not None:
        changes["seed"] = args.seed
    if changes:
        spec = with_overrides(spec, **changes)
    selection = "all" if args.ids is None else args.ids
    report = run_suite(spec, selection, threads=args.threads, timing=args.timing, t=args.t)
    if args.out is not None:
        report.write(args.out)
        logger.info(f"Report written to {args.out}")
    else:
        print(report.to_json())
    if args.csv is not None:
        report.write_csv(args.csv)
        logger.info(f"Per-sample residuals written to {args.csv}")
    return report.exit_code


def _polys(args: argparse.Namespace) -> int:
    spec = FamilySpec.load(args.spec)
    p_m, p_c = predicted_polys(spec)
    payload = {
        "type": bryant_type(spec),
        "p_m": p_m.to_string(),
        "p_c": p_c.to_string(),
        "p_m_coeffs": p_m.to_list(),
        "p_c_coeffs": p_c.to_list(),
    }
    try:
        o_m, o_c = order_one_polys(spec)
        payload["order_one"] = {"p_m": o_m.to_string(), "p_c": o_c.to_string()}
    except BfconeError:
        pass
    _json_print(payload)
    return 0


def _example(args: argparse.Namespace) -> int:
    options = {}
    for key in ("sign", "lam", "case", "d"):
        value = getattr(args, key)
        if value is not None:
            options[key] = value
    spec = example_spec(args.name, args.params, mdim=args.mdim, **options)
    if args.out is not None:
        args.out.write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _json_print(spec.to_dict())
    return 0


def _scan(args: argparse.Namespace) -> int:
    table = run_scan(_load_json_object(args.grid), threads=args.threads)
    print(table.to_string(index=False))
    if args.out is not None:
        table.to_csv(args.out, index=False, float_format="%.17g")
    ok = table["error"].isna() & (table["fail"] == 0)
    return 0 if bool(ok.all()) else 1


def handle(args: argparse.Namespace) -> int:
    if args.command == "classify":
        _json_print(describe(load_operator(args.operator), args.tol))
        return 0
    if args.command == "verify":
        return _verify(args)
    if args.command == "polys":
        return _polys(args)
    if args.command == "example":
        return _example(args)
    return _scan(args)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return handle(args)
    except (BfconeError, ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    sys.exit(cli_main())
