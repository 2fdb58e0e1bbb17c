"""Command-line interface.

Subcommands: run, verify-exact, compare, check-initial. Exit codes:
0 success, 1 verification failure, 2 solver failure, 3 bad input.
"""

import argparse
import json
import sys

from .errors import ConfigError, SolverFailure
from .harness import (
    check_initial,
    compare_runs,
    load_config,
    run_scenario,
    verify_exact,
)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="logdiff",
        description=(
            "Integrate the logarithmic diffusion flow v_t = lap ln v on the "
            "plane and classify its long-time limit."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario and write artifacts")
    p_run.add_argument("config", help="scenario YAML file")

    p_verify = sub.add_parser(
        "verify-exact",
        help="check the radial solver against the closed-form reference flow",
    )
    p_verify.add_argument("config", help="scenario YAML file (cigar + exact_cigar BC)")

    p_cmp = sub.add_parser("compare", help="compare two completed run directories")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")

    p_chk = sub.add_parser(
        "check-initial", help="print the admissibility report for a scenario's data"
    )
    p_chk.add_argument("config", help="scenario YAML file")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            artifacts = run_scenario(load_config(args.config))
            print(f"status: {artifacts.status}")
            if artifacts.note:
                print(f"note: {artifacts.note}")
            if artifacts.classification is not None:
                print(f"classification: {artifacts.classification.tag}")
            print(f"artifacts written to {artifacts.output_dir}")
            return 0 if artifacts.status == "reached_t_end" else 2
        if args.command == "verify-exact":
            report = verify_exact(load_config(args.config))
            print(report.to_text(), end="")
            return 0 if report.passed else 1
        if args.command == "compare":
            print(compare_runs(args.dir_a, args.dir_b).to_text(), end="")
            return 0
        if args.command == "check-initial":
            report = check_initial(load_config(args.config))
            for line in report.summary_lines():
                print(line)
            print(report.to_json(), end="")
            return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
