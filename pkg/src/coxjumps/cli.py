"""Command-line front end: `survival`, `validate` and `bell` subcommands.

CSV tables go to standard output, diagnostics to standard error. Exit codes:
0 on success, 2 for invalid input (arguments, configuration files, model
parameters), 3 for numerical failures and failed validation rows.
"""

import logging
import math
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, TextIO

import pandas as pd

from coxjumps.bell import complete_bell_recurrence
from coxjumps.config import RunConfig, load_document, load_run_config, mc_from_dict
from coxjumps.errors import ConfigurationError, CoxJumpsError, DomainError
from coxjumps.report import build_validation_report, default_suite, survival_curve
from coxjumps.utils.logger import setup_logger
from coxjumps.utils.parser import parse_command_line

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class NumericalFailure(Exception):
    """A library error raised while computing, after the inputs were accepted."""

    def __init__(self, error: CoxJumpsError):
        super().__init__(str(error))
        self.error = error


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.12g}"
    return str(value)


def format_table(frame: pd.DataFrame) -> str:
    """CSV text with 12 significant digits and empty cells for missing values."""
    text = frame.copy()
    for column in text.columns:
        text[column] = text[column].map(_format_value)
    return text.to_csv(index=False, lineterminator="\n")


def apply_overrides(
    run: RunConfig,
    seed: Optional[int] = None,
    paths: Optional[int] = None,
    routes: Optional[Sequence[str]] = None,
) -> RunConfig:
    """Apply command-line overrides; the result is validated again."""
    try:
        if routes:
            run = replace(run, routes=list(routes))
        if run.mc is not None and (seed is not None or paths is not None):
            mc = run.mc
            if seed is not None:
                mc = replace(mc, seed=seed)
            if paths is not None:
                mc = replace(mc, n_paths=paths)
            run = replace(run, mc=mc)
    except DomainError as err:
        raise ConfigurationError(str(err)) from err
    return run


def _computing(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigurationError:
        raise
    except CoxJumpsError as err:
        raise NumericalFailure(err) from err


def cmd_survival(
    config_path: Path,
    seed: Optional[int] = None,
    paths: Optional[int] = None,
    routes: Optional[Sequence[str]] = None,
    assert_alive: bool = False,
    out: TextIO = None,
) -> pd.DataFrame:
    """Write the survival term structure of a run configuration as CSV.

    Columns are T, n, route, probability, std_error and warning.
    """
    out = out or sys.stdout
    run = apply_overrides(load_run_config(config_path), seed, paths, routes)
    frame = _computing(
        survival_curve, run.model, run.t, run.horizons, run.jump_indices, run.routes, run.mc
    )
    if not (assert_alive or run.assert_alive) and run.t > 0:
        logger.warning("Jump status at t is not asserted; values hold on {tau_n > t}.")
        flag = "conditional on tau_n > t"
        frame["warning"] = [f"{w}; {flag}" if w else flag for w in frame["warning"]]
    out.write(format_table(frame))
    return frame


def load_validation_runs(config_path: Optional[Path]) -> List[RunConfig]:
    """Runs named by a validation document.

    Accepted documents: `suite: default` (optionally with `mc` settings for
    its Monte Carlo runs), `runs: [...]` with one run configuration per item,
    or a single run configuration. No document means the default suite.
    """
    if config_path is None:
        return default_suite()
    data, lines = load_document(config_path)
    if "suite" in data:
        if data["suite"] != "default":
            raise ConfigurationError(f"Unknown suite '{data['suite']}'.", line=lines.get(("suite",)))
        unknown = sorted(set(data) - {"suite", "mc"})
        if unknown:
            raise ConfigurationError(f"Suite document has unknown field(s): {', '.join(unknown)}.")
        mc = mc_from_dict(data["mc"]) if data.get("mc") else None
        return default_suite(mc)
    if "runs" in data:
        runs = []
        for i, item in enumerate(data["runs"]):
            prefix = ("runs", i)
            local = {path[2:]: line for path, line in lines.items() if path[:2] == prefix}
            try:
                runs.append(RunConfig.from_dict(item, local))
            except ConfigurationError as err:
                raise ConfigurationError(f"{config_path}: runs[{i}]: {err}", line=err.line) from err
        if not runs:
            raise ConfigurationError(f"{config_path}: 'runs' is empty.")
        return runs
    return [load_run_config(config_path)]


def cmd_validate(
    config_path: Optional[Path] = None,
    seed: Optional[int] = None,
    paths: Optional[int] = None,
    routes: Optional[Sequence[str]] = None,
    out: TextIO = None,
    err: TextIO = None,
) -> bool:
    """Write the validation report as CSV and the summary line to `err`.

    Returns:
        bool: True iff every row passes.
    """
    out = out or sys.stdout
    err = err or sys.stderr
    runs = [apply_overrides(run, seed, paths, routes) for run in load_validation_runs(config_path)]
    logger.info(f"Validating {len(runs)} run configuration(s)")
    report = _computing(build_validation_report, runs)
    out.write(format_table(report.rows))
    err.write(report.summary() + "\n")
    return report.ok


def _parse_number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise DomainError(f"Bell argument '{text}' is not a number.") from None
    if not math.isfinite(value):
        raise DomainError(f"Bell argument '{text}' is not finite.")
    return value


def cmd_bell(n: int, xs: str = "", out: TextIO = None):
    """Print the complete Bell polynomial B_n(x_1, ..., x_n) with 15 digits."""
    out = out or sys.stdout
    args = [_parse_number(x) for x in xs.split(",")] if xs.strip() else []
    value = complete_bell_recurrence(n, args)
    if isinstance(value, Fraction):
        value = float(value)
    out.write(f"{value:.15g}\n")
    return value


def main(argv: Optional[List[str]] = None) -> int:
    try:
        opts = parse_command_line(argv)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_INPUT
    setup_logger(getattr(logging, opts.log_level))

    try:
        if opts.command == "survival":
            cmd_survival(Path(opts.config), opts.seed, opts.paths, opts.routes, opts.assert_alive)
        elif opts.command == "validate":
            config = Path(opts.config) if opts.config else None
            if not cmd_validate(config, opts.seed, opts.paths, opts.routes):
                return EXIT_NUMERICAL
        elif opts.command == "bell":
            cmd_bell(opts.n, opts.xs)
    except NumericalFailure as exc:
        sys.stderr.write(f"error: {exc.error}\n")
        return EXIT_NUMERICAL
    except (CoxJumpsError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
