import argparse
from typing import List, Optional

from easydict import EasyDict as edict

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _routes(text: str) -> List[str]:
    return [r.strip() for r in text.split(",") if r.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coxjumps",
        description="""Survival probabilities of the n-th jump of a Cox process.
        Usage: coxjumps survival --config run.json --routes bell,monte_carlo""",
    )
    parser.add_argument(
        "--log-level",
        dest="log_level",
        type=str.upper,
        choices=LOG_LEVELS,
        default="WARNING",
        help="Verbosity of the diagnostics written to standard error (default: WARNING)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    survival = sub.add_parser("survival", help="Emit the survival term structure as CSV")
    survival.add_argument("--config", required=True, help="Path to the run configuration")
    survival.add_argument("--assert-alive", dest="assert_alive", action="store_true",
                          help="The n-th jump has not occurred by t (overrides the config)")

    validate = sub.add_parser("validate", help="Cross-check the routes and report pass/fail")
    validate.add_argument("--config", default=None,
                          help="Run configuration, or a document with 'suite: default' (default suite if omitted)")

    for p in (survival, validate):
        p.add_argument("--seed", type=int, default=None, help="Monte Carlo seed (overrides the config)")
        p.add_argument("--paths", type=int, default=None, help="Monte Carlo paths (overrides the config)")
        p.add_argument("--routes", type=_routes, default=None,
                       help="Comma-separated subset of bell,malliavin,monte_carlo")

    bell = sub.add_parser("bell", help="Evaluate a complete Bell polynomial")
    bell.add_argument("n", type=int, help="Polynomial degree, n >= 0")
    bell.add_argument("xs", nargs="?", default="", help="Comma-separated arguments x1,...,xn")
    return parser


def parse_command_line(argv: Optional[List[str]] = None) -> edict:
    """
    parse_command_line Parse command line input

    Args:
        argv (List[str], optional): Arguments, defaults to sys.argv[1:].

    Returns:
        edict: Options with attribute access.
    """
    args = build_parser().parse_args(argv)
    return edict(vars(args))
