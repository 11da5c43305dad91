"""Survival probability of Levy-driven hazards by the moment recursion.

With Delta = Lambda_T - Lambda_t, the moments m_r = E[Delta^r e^{-Delta} | F_t]
satisfy

    m_0 = exp(int int (e^-sigma - 1 + sigma))
    m_{r+1} = m_r I_A + sum_{k=1}^r binom(r, k) m_{r-k} I_k

with I_A = int int (e^-sigma - 1) sigma and I_k = int int e^-sigma sigma^{k+1},
and the survival probability is

    P(tau_n > T | F_t) = e^{-Lambda_t} sum_{k<n} sum_{j<=k} Lambda_t^j m_{k-j} / (j! (k-j)!).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

from coxjumps.errors import DomainError
from coxjumps.hazard_models import LEVY_MODELS, HazardModelSpec, KernelIntegrals, kernel_integrals
from coxjumps.numerics import QuadratureSettings
from coxjumps.survival_bell import Route, SurvivalResult, check_jump_index, flag_probability

logger = logging.getLogger(__name__)


@dataclass
class MalliavinMoments:
    m: List[float]
    t: float
    T: float


def moments_from_integrals(integrals: KernelIntegrals, count: int) -> List[float]:
    """m_0..m_{count-1} from precomputed kernel integrals."""
    m = [math.exp(integrals.log_m0)]
    for r in range(count - 1):
        nxt = m[r] * integrals.first
        for k in range(1, r + 1):
            nxt += math.comb(r, k) * m[r - k] * integrals.power(k + 1)
        m.append(nxt)
    return m


def malliavin_moments(
    model: HazardModelSpec,
    t: float,
    T: float,
    n: int,
    settings: Optional[QuadratureSettings] = None,
) -> MalliavinMoments:
    """Moments m_0..m_{n-1} of the hazard increment over [t, T].

    Args:
        model (HazardModelSpec): LevyKernel or CMY hazard.
        t (float): Conditioning time.
        T (float): Horizon.
        n (int): Number of moments.
        settings (QuadratureSettings, optional): Quadrature tolerances.

    Returns:
        MalliavinMoments: The moments.

    Raises:
        DomainError: For hazards not driven by a Poisson random measure.
    """
    if not isinstance(model, LEVY_MODELS):
        raise DomainError(
            f"The moment recursion needs a Levy-driven hazard, got {type(model).__name__}."
        )
    check_jump_index(n)
    if T < t:
        raise DomainError(f"Horizon T={T} precedes conditioning time t={t}.")
    # each I_k is computed once and reused at every step
    integrals = kernel_integrals(model, t, T, n - 1, settings)
    return MalliavinMoments(moments_from_integrals(integrals, n), t, T)


def survival_from_moments(moments: List[float], lambda_t: float, n: int) -> List[float]:
    """Summands E[Lambda_T^k e^{-Lambda_T}] / k! for k = 0..n-1."""
    scale = math.exp(-lambda_t)
    terms = []
    for k in range(n):
        inner = math.fsum(
            lambda_t**j * moments[k - j] / (math.factorial(j) * math.factorial(k - j))
            for j in range(k + 1)
        )
        terms.append(scale * inner)
    return terms


def survival_thm2(
    model: HazardModelSpec,
    t: float,
    T: float,
    n: int,
    lambda_t: Optional[float] = None,
    settings: Optional[QuadratureSettings] = None,
) -> SurvivalResult:
    """P(tau_n > T | F_t) from the moment recursion.

    Args:
        model (HazardModelSpec): LevyKernel or CMY hazard.
        t (float): Conditioning time.
        T (float): Horizon.
        n (int): Jump index in [1, 32].
        lambda_t (float, optional): Accumulated hazard at t. Defaults to the
            model's `lambda_t`.
        settings (QuadratureSettings, optional): Quadrature tolerances.

    Returns:
        SurvivalResult: Probability and summands.
    """
    lambda_t = model.lambda_t if lambda_t is None else lambda_t
    moments = malliavin_moments(model, t, T, n, settings)
    terms = survival_from_moments(moments.m, lambda_t, n)
    diagnostics = {"moments": list(moments.m)}
    probability = math.fsum(terms)
    flag_probability(probability, diagnostics, f"P(tau_{n} > {T})")
    return SurvivalResult(probability, terms, Route.MALLIAVIN, diagnostics)
