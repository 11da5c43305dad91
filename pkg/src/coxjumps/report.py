"""Survival term structures and the cross-route validation report."""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import pandas as pd

from coxjumps.config import RunConfig
from coxjumps.hazard_models import (
    CIR,
    CMY,
    IGOU,
    OU_MODELS,
    CgfQuery,
    GammaOU,
    HazardModelSpec,
    LevyKernel,
    cgf,
    cgf_by_quadrature,
)
from coxjumps.kernels import CmyDensity, ConstantKernel, ExponentialKernel, SeparableKernel
from coxjumps.malliavin_rec import malliavin_moments, survival_from_moments
from coxjumps.mc_oracle import McConfig, mc_survival_many
from coxjumps.survival_bell import PROBABILITY_SLACK, survival_probabilities
from coxjumps.utils.timer import AverageTimer

logger = logging.getLogger(__name__)

ANALYTIC_REL_TOL = 1e-6
MC_SIGMAS = 3.0
# Points where the OU closed forms are checked against quadrature; mostly on the Laplace axis
CGF_CHECK_POINTS = (0.25j, 0.5j, 1j, 2j, 0.7, -1.3 + 0.2j)


def _warning(probability: float) -> str:
    if -PROBABILITY_SLACK <= probability <= 1 + PROBABILITY_SLACK:
        return ""
    return "outside [0, 1]"


def route_values(
    model: HazardModelSpec,
    t: float,
    T: float,
    jump_indices: Sequence[int],
    routes: Sequence[str],
    mc_config: Optional[McConfig] = None,
) -> dict:
    """Probabilities of every route at one horizon.

    Returns:
        dict: route -> list of (probability, std_error) aligned with
        `jump_indices`; std_error is None for the analytic routes.
    """
    values = {}
    if "bell" in routes:
        values["bell"] = [
            (res.probability, None) for _, res in survival_probabilities(model, t, T, list(jump_indices))
        ]
    if "malliavin" in routes:
        moments = malliavin_moments(model, t, T, max(jump_indices)).m
        values["malliavin"] = [
            (math.fsum(survival_from_moments(moments, model.lambda_t, n)), None)
            for n in jump_indices
        ]
    if "monte_carlo" in routes:
        estimates = mc_survival_many(model, t, T, jump_indices, config=mc_config or McConfig())
        values["monte_carlo"] = [(e.mean, e.std_error) for e in estimates]
    return values


def survival_curve(
    model: HazardModelSpec,
    t: float,
    horizons: Sequence[float],
    jump_indices: Sequence[int],
    routes: Sequence[str] = ("bell",),
    mc_config: Optional[McConfig] = None,
) -> pd.DataFrame:
    """Term structure of P(tau_n > T | F_t), one row per (T, n, route).

    Columns: T, n, route, probability, std_error (NaN for analytic routes)
    and warning (non-empty when the probability leaves [0, 1]).
    """
    rows = []
    for T in horizons:
        values = route_values(model, t, T, jump_indices, routes, mc_config)
        for i, n in enumerate(jump_indices):
            for route in routes:
                probability, std_error = values[route][i]
                rows.append(
                    {
                        "T": T,
                        "n": n,
                        "route": route,
                        "probability": probability,
                        "std_error": math.nan if std_error is None else std_error,
                        "warning": _warning(probability),
                    }
                )
    return pd.DataFrame(rows, columns=["T", "n", "route", "probability", "std_error", "warning"])


def discretisation_allowance(model: HazardModelSpec, t: float, T: float, mc: McConfig) -> float:
    """Bias allowance of the Euler-discretised CIR integral."""
    if not isinstance(model, CIR):
        return 0.0
    return 2 * mc.time_step * model.theta * max(model.kappa, model.lambda_t) * (T - t)


def cgf_quadrature_deviation(model: HazardModelSpec, t: float, T: float) -> float:
    """Largest relative gap between the closed-form Psi of an OU hazard and its quadrature."""
    gaps = []
    for u in CGF_CHECK_POINTS:
        q = CgfQuery(u, t, T)
        closed = cgf(model, q)
        gaps.append(abs(closed - cgf_by_quadrature(model, q)) / max(abs(closed), 1e-300))
    return max(gaps)


def _in_std_errors(gap: float, std_error: float) -> float:
    if std_error > 0:
        return gap / std_error
    return 0.0 if gap == 0 else math.inf


@dataclass
class ValidationReport:
    """Per-(model, T, n) route values, deviations and pass/fail flags."""

    rows: pd.DataFrame

    @property
    def passed(self) -> int:
        return int((self.rows["status"] == "pass").sum())

    @property
    def failed(self) -> int:
        return int((self.rows["status"] == "fail").sum())

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def summary(self) -> str:
        return f"passed/failed/total: {self.passed}/{self.failed}/{self.total}"


def validate_run(run: RunConfig, timer: Optional[AverageTimer] = None) -> List[dict]:
    """Rows of the validation report for one run configuration."""
    timer = timer or AverageTimer()
    label = run.label or run.model.tag
    rows = []
    for T in run.horizons:
        values = {}
        for route in run.routes:
            values.update(route_values(run.model, run.t, T, run.jump_indices, [route], run.mc))
            timer.update(f"{label}:{route}")
        allowance = discretisation_allowance(run.model, run.t, T, run.mc) if run.mc else 0.0
        cgf_dev = cgf_quadrature_deviation(run.model, run.t, T) if isinstance(run.model, OU_MODELS) else None
        for i, n in enumerate(run.jump_indices):
            row = {"model": label, "T": T, "n": n}
            for route in ("bell", "malliavin", "monte_carlo"):
                row[route] = values[route][i][0] if route in values else math.nan
            ok = True
            if "bell" in values and "malliavin" in values:
                dev = abs(row["bell"] - row["malliavin"]) / max(abs(row["bell"]), 1e-300)
                row["dev_bell_malliavin"] = dev
                ok &= dev <= ANALYTIC_REL_TOL
            if cgf_dev is not None:
                row["dev_cgf_quadrature"] = cgf_dev
                ok &= cgf_dev <= ANALYTIC_REL_TOL
            if "monte_carlo" in values:
                std_error = values["monte_carlo"][i][1]
                row["mc_std_error"] = std_error
                # the first analytic route present fills dev_analytic_mc_se
                analytic = [r for r in ("bell", "malliavin") if r in values]
                for route, column in zip(analytic, ("dev_analytic_mc_se", "dev_malliavin_mc_se")):
                    gap = abs(row[route] - row["monte_carlo"])
                    row[column] = _in_std_errors(gap, std_error)
                    ok &= gap <= MC_SIGMAS * std_error + allowance + 1e-12
            row["status"] = "pass" if ok else "fail"
            rows.append(row)
    return rows


def build_validation_report(runs: Sequence[RunConfig]) -> ValidationReport:
    timer = AverageTimer(logger=logger)
    rows = []
    for run in runs:
        rows.extend(validate_run(run, timer))
    timer.print("validation")
    columns = ["model", "T", "n", "bell", "malliavin", "monte_carlo", "mc_std_error", "dev_bell_malliavin",
               "dev_cgf_quadrature", "dev_analytic_mc_se", "dev_malliavin_mc_se", "status"]
    frame = pd.DataFrame(rows)
    present = [c for c in columns if c in frame.columns and not frame[c].isna().all()]
    return ValidationReport(frame[present])


def default_suite(mc: Optional[McConfig] = None) -> List[RunConfig]:
    """Catalogue used by `validate` when the configuration names `suite: default`.

    Cross-route grid of CMY hazards (analytic routes only) followed by Monte
    Carlo brackets for all five model families.
    """
    mc = mc or McConfig(n_paths=1_000_000, seed=20240601, jump_trunc_eps=1e-3)
    runs = []
    for C in (0.5, 1.0):
        for M in (1.0, 2.0, 4.0):
            for Y in (-0.5, 0.0, 0.5, 0.9):
                for kernel in (ConstantKernel(1.0), ExponentialKernel(1.0, 1.0)):
                    runs.append(
                        RunConfig(
                            model=CMY(C, M, Y, kernel),
                            t=0.0,
                            horizons=[0.5, 1.0],
                            jump_indices=[1, 2, 3, 4, 5],
                            routes=["bell", "malliavin"],
                            label=f"cmy(C={C},M={M},Y={Y},{kernel.to_dict()['type']})",
                        )
                    )
    mc_runs = [
        ("cmy", CMY(1.0, 2.0, 0.5, ConstantKernel(1.0)), ["bell", "malliavin", "monte_carlo"]),
        ("cmy_gamma", CMY(1.0, 2.0, 0.0, ExponentialKernel(1.0, 1.0)), ["bell", "malliavin", "monte_carlo"]),
        (
            "levy_kernel",
            LevyKernel(
                sigma_fn=SeparableKernel(ConstantKernel(0.5), 1.0),
                levy_density=CmyDensity(2.0, 1.0, -0.5),
                z_domain=CmyDensity(2.0, 1.0, -0.5).z_domain,
                lambda_t=0.2,
                compensated=False,
            ),
            ["bell", "malliavin", "monte_carlo"],
        ),
        ("cir", CIR(2.0, 1.0, 0.5, 1.0), ["bell", "monte_carlo"]),
        ("gamma_ou", GammaOU(1.0, 2.0, 4.0, 0.5), ["bell", "monte_carlo"]),
        ("ig_ou", IGOU(1.0, 1.0, 2.0, 0.5), ["bell", "monte_carlo"]),
    ]
    for label, model, routes in mc_runs:
        runs.append(RunConfig(model, 0.0, [1.0], [1, 2, 3], routes, mc, label=label))
    return runs


def with_mc(runs: Sequence[RunConfig], mc: Optional[McConfig]) -> List[RunConfig]:
    """Replace the Monte Carlo settings of the runs that use them."""
    if mc is None:
        return list(runs)
    return [replace(run, mc=mc) if run.mc is not None else run for run in runs]
