"""Survival probability of the n-th jump from cumulant derivatives.

P(tau_n > T | F_t) = sum_{k<n} e^{c0} / k! * B_k(c_1, ..., c_k) on the event
{tau_n > t}, where c_k = Psi^(k)(i) / i^k. The k-th summand equals
E[Lambda_T^k e^{-Lambda_T} | F_t] / k!.
"""

import logging
import math
import numbers
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from coxjumps.bell import MAX_JUMPS, complete_bell_sequence
from coxjumps.errors import DomainError
from coxjumps.hazard_models import (  # noqa: F401
    CumulantDerivatives,
    HazardModelSpec,
    cgf_derivatives_at_i,
)
from coxjumps.numerics import CauchySettings, QuadratureSettings

logger = logging.getLogger(__name__)

PROBABILITY_SLACK = 1e-9


class Route(str, Enum):
    BELL = "bell"
    MALLIAVIN = "malliavin"
    MONTE_CARLO = "monte_carlo"


@dataclass
class SurvivalResult:
    """Survival probability with its summands.

    Attributes:
        probability: P(tau_n > T | F_t), sum of `terms`.
        terms: terms[k] = E[Lambda_T^k e^{-Lambda_T} | F_t] / k!.
        route: Route that produced the value.
        diagnostics: Accuracy metadata (radius, node disagreement, warnings).
    """

    probability: float
    terms: List[float]
    route: Route
    diagnostics: dict = field(default_factory=dict)

    def __repr__(self) -> str:
        return (
            f"SurvivalResult(route={self.route.value}, n={len(self.terms)}, "
            f"probability={self.probability:.12g})"
        )


def check_jump_index(n: int) -> None:
    if not isinstance(n, numbers.Integral) or n < 1 or n > MAX_JUMPS:
        raise DomainError(f"Jump index must be an integer in [1, {MAX_JUMPS}], got {n}.")


def flag_probability(probability: float, diagnostics: dict, what: str) -> None:
    """Record a warning when a probability falls outside [0, 1]."""
    if -PROBABILITY_SLACK <= probability <= 1 + PROBABILITY_SLACK:
        return
    message = (
        f"{what} = {probability:.12g} lies outside [0, 1]; the hazard may take "
        "negative values (compensated kernel)."
    )
    logger.warning(message)
    diagnostics["warning"] = message


def survival_terms(derivs: CumulantDerivatives, n: Optional[int] = None) -> List[float]:
    """Summands e^{c0} / k! * B_k(c_1..c_k) for k = 0..n-1."""
    n = derivs.n if n is None else n
    if n > derivs.n:
        raise DomainError(f"Derivatives serve jump index {derivs.n}, not {n}.")
    scale = math.exp(derivs.c0)
    bells = complete_bell_sequence(list(derivs.c), n - 1)
    return [scale * b / math.factorial(k) for k, b in enumerate(bells)]


def survival_thm1(
    model: HazardModelSpec,
    t: float,
    T: float,
    n: int,
    quad: Optional[QuadratureSettings] = None,
    cauchy: Optional[CauchySettings] = None,
) -> SurvivalResult:
    """P(tau_n > T | F_t) through Bell polynomials of the CGF derivatives at i.

    Args:
        model (HazardModelSpec): Hazard model.
        t (float): Conditioning time.
        T (float): Horizon, T >= t.
        n (int): Jump index in [1, 32].
        quad (QuadratureSettings, optional): Quadrature tolerances.
        cauchy (CauchySettings, optional): Cauchy-circle settings.

    Returns:
        SurvivalResult: Probability, summands and diagnostics.
    """
    check_jump_index(n)
    if T < t:
        raise DomainError(f"Horizon T={T} precedes conditioning time t={t}.")
    derivs = cgf_derivatives_at_i(model, t, T, n - 1, quad, cauchy)
    terms = survival_terms(derivs)
    diagnostics = dict(derivs.diagnostics)
    probability = math.fsum(terms)
    flag_probability(probability, diagnostics, f"P(tau_{n} > {T})")
    return SurvivalResult(probability, terms, Route.BELL, diagnostics)


def survival_probabilities(
    model: HazardModelSpec,
    t: float,
    T: float,
    jump_indices: List[int],
    quad: Optional[QuadratureSettings] = None,
    cauchy: Optional[CauchySettings] = None,
) -> List[Tuple[int, SurvivalResult]]:
    """`survival_thm1` for several jump indices sharing one derivative vector."""
    for n in jump_indices:
        check_jump_index(n)
    derivs = cgf_derivatives_at_i(model, t, T, max(jump_indices) - 1, quad, cauchy)
    all_terms = survival_terms(derivs)
    results = []
    for n in jump_indices:
        terms = all_terms[:n]
        diagnostics = dict(derivs.diagnostics)
        probability = math.fsum(terms)
        flag_probability(probability, diagnostics, f"P(tau_{n} > {T})")
        results.append((n, SurvivalResult(probability, terms, Route.BELL, diagnostics)))
    return results
