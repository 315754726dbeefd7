"""Command line entry point.

    successhedge run CONFIG [--out DIR] [--no-verify]
    successhedge validate CONFIG

Exit codes: 0 success, 2 config error, 3 domain error, 4 capacity error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import CapacityError, ConfigError, DomainError
from .pipeline import run, validate

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_CAPACITY = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="successhedge",
        description="Capital-constrained hedging of equity-linked claims with maximal expected success ratio.",
    )
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="solve, hedge, verify and write the report")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (overrides outputs.dir)")
    p_run.add_argument("--no-verify", action="store_true", help="skip oracle and Monte Carlo checks")
    p_val = sub.add_parser("validate", help="check a configuration without solving")
    p_val.add_argument("config")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        if args.command == "validate":
            diags = validate(config)
            for d in diags:
                print(d)
            if diags:
                return EXIT_CAPACITY if all(d.startswith("capacity") for d in diags) else EXIT_DOMAIN
            print("ok")
            return EXIT_OK
        report = run(config, out_dir=args.out, verify=not args.no_verify)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN

    print(f"success_ratio          {report.success_ratio:.12g}")
    print(f"v0_used                {report.v0_used:.12g}")
    print(f"budget                 {report.budget:.12g}")
    print(f"superhedge_price_of_D  {report.superhedge_price_of_D:.12g}")
    print(f"k                      {report.k:.12g}")
    if report.oracle_ratio is not None:
        print(f"oracle_ratio           {report.oracle_ratio:.12g}")
    if report.mc_estimate is not None:
        print(f"mc_estimate            {report.mc_estimate:.6f} +/- {report.mc_standard_error:.6f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
