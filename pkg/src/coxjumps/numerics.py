"""Shared numerical kernels: adaptive quadrature, the Gamma function and
Cauchy-circle differentiation of analytic functions."""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from coxjumps.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

ComplexValue = complex

# Relative disagreement between N and 2N Cauchy nodes
CAUCHY_WARN_TOL = 1e-9
CAUCHY_FAIL_TOL = 1e-6
# Relative accuracy of double-precision function values on the circle
CAUCHY_ROUND_OFF = 1e-13


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances for the adaptive Gauss-Kronrod quadrature (QUADPACK)."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise DomainError("Quadrature tolerances must be strictly positive.")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be at least 1.")


@dataclass(frozen=True)
class CauchySettings:
    """Circle radius and number of trapezoid nodes for Cauchy differentiation."""

    radius: float = 0.25
    nodes: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("Cauchy radius must be strictly positive.")
        if self.nodes < 2 or self.nodes % 2:
            raise DomainError("Cauchy nodes must be a positive even integer.")


DEFAULT_QUADRATURE = QuadratureSettings()
DEFAULT_CAUCHY = CauchySettings()


def ensure_finite(value: ComplexValue, what: str = "value") -> ComplexValue:
    """Raise DomainError if `value` has a NaN or infinite component."""
    if not cmath.isfinite(complex(value)):
        raise DomainError(f"Non-finite {what}: {value}")
    return value


def integrate_1d(
    f: Callable[[float], float],
    a: float,
    b: float,
    settings: Optional[QuadratureSettings] = None,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Integrate a real function over [a, b] with adaptive Gauss-Kronrod.

    Args:
        f (Callable[[float], float]): Integrand.
        a (float): Lower limit (may be -inf).
        b (float): Upper limit (may be +inf).
        settings (QuadratureSettings, optional): Tolerances. Defaults to
            QuadratureSettings().
        points (Sequence[float], optional): Interior break points of the
            integrand (finite intervals only).

    Returns:
        float: The integral.

    Raises:
        ConvergenceError: If the tolerance is not met within
            `settings.max_subdivisions` subintervals.
        DomainError: If the integral is not finite.
    """
    settings = settings or DEFAULT_QUADRATURE
    if a == b:
        return 0.0
    if points is not None and math.isfinite(a) and math.isfinite(b):
        points = [p for p in points if min(a, b) < p < max(a, b)] or None
    else:
        points = None
    result = integrate.quad(
        f,
        a,
        b,
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        limit=settings.max_subdivisions,
        points=points,
        full_output=1,
    )
    value, error = result[0], result[1]
    if len(result) == 4:
        raise ConvergenceError(
            f"Quadrature over [{a}, {b}] did not converge: {result[3]}",
            estimate=value,
            error_bound=error,
        )
    if not math.isfinite(value):
        raise DomainError(f"Quadrature over [{a}, {b}] returned {value}.")
    return value


def integrate_levy(
    g: Callable[[float, float], float],
    t: float,
    T: float,
    levy_density: Callable[[float], float],
    z_domain: Tuple[float, float],
    settings: Optional[QuadratureSettings] = None,
    small_z_bound: Optional[Callable[[float], float]] = None,
    z_cutoff: float = 1e-8,
    time_points: Optional[Sequence[float]] = None,
) -> float:
    """Iterated integral int_t^T int g(s, z) nu(dz) ds.

    The inner integral runs over z, the outer one over s. When the z-domain
    starts at 0 and `small_z_bound` is given, the strip [0, eps) is not
    integrated: `small_z_bound(eps)` must bound its contribution by
    `settings.abs_tol`, otherwise eps is divided by 100 until it does.

    Args:
        g (Callable[[float, float], float]): Integrand g(s, z).
        t (float): Lower time limit.
        T (float): Upper time limit.
        levy_density (Callable[[float], float]): Density of nu on `z_domain`.
        z_domain (Tuple[float, float]): Support of nu.
        settings (QuadratureSettings, optional): Tolerances.
        small_z_bound (Callable[[float], float], optional): Bound of the
            [0, eps) strip as a function of eps.
        z_cutoff (float): Initial eps. Defaults to 1e-8.
        time_points (Sequence[float], optional): Break points in s.

    Returns:
        float: The integral.

    Raises:
        DomainError: If no cutoff makes the small-z strip negligible, or if
            the integral diverges.
        ConvergenceError: Propagated from the quadrature.
    """
    settings = settings or DEFAULT_QUADRATURE
    if T < t:
        raise DomainError(f"Time interval is reversed: t={t} > T={T}.")
    if T == t:
        return 0.0
    z_lo, z_hi = z_domain
    if z_lo == 0 and small_z_bound is not None:
        eps = z_cutoff
        while small_z_bound(eps) >= settings.abs_tol:
            eps /= 100.0
            if eps < 1e-300:
                raise DomainError(
                    "Levy integral is not integrable near z=0: the bound on "
                    f"[0, {z_cutoff}) never drops below {settings.abs_tol}."
                )
        z_lo = eps

    def inner(s: float) -> float:
        return integrate_1d(
            lambda z: g(s, z) * levy_density(z), z_lo, z_hi, settings
        )

    return integrate_1d(inner, t, T, settings, points=time_points)


def integrate_complex(
    f: Callable[[float], complex],
    a: float,
    b: float,
    settings: Optional[QuadratureSettings] = None,
    points: Optional[Sequence[float]] = None,
) -> complex:
    """`integrate_1d` applied to the real and imaginary parts of `f`."""
    re = integrate_1d(lambda x: f(x).real, a, b, settings, points)
    im = integrate_1d(lambda x: f(x).imag, a, b, settings, points)
    return complex(re, im)


def gamma_fn(x: float) -> float:
    """Gamma function on the real line, poles excluded.

    Raises:
        DomainError: At x = 0, -1, -2, ... or if the result overflows.
    """
    if x <= 0 and float(x).is_integer():
        raise DomainError(f"Gamma function has a pole at x={x}.")
    value = float(special.gamma(x))
    if not math.isfinite(value):
        raise DomainError(f"Gamma function overflows at x={x}.")
    return value


def _circle_values(
    f: Callable[[complex], complex], center: complex, radius: float, nodes: int
) -> np.ndarray:
    omega = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    values = np.array([complex(f(center + radius * w)) for w in omega])
    if not np.all(np.isfinite(values)):
        raise DomainError(
            f"Function is not finite on the circle |u - {center}| = {radius}."
        )
    return values


def _taylor_coefficients(values: np.ndarray, radius: float) -> np.ndarray:
    """Taylor coefficients a_0..a_{N-1} from N equispaced circle values."""
    nodes = len(values)
    # fft computes sum_j f_j omega_j^{-k}
    coeffs = np.fft.fft(values) / nodes
    return coeffs / radius ** np.arange(nodes)


def cauchy_derivatives(
    f: Callable[[ComplexValue], ComplexValue],
    center: ComplexValue,
    n_max: int,
    settings: Optional[CauchySettings] = None,
) -> List[ComplexValue]:
    """Derivatives f^(0)..f^(n_max) at `center` from Cauchy's integral formula.

    The circle integral is evaluated with the trapezoid rule on
    `settings.nodes` and on twice as many nodes. A disagreement above 1e-9
    is logged as a warning; above 1e-6 it is an error.

    Args:
        f (Callable[[complex], complex]): Function analytic on the closed disk.
        center (complex): Expansion point.
        n_max (int): Highest derivative order.
        settings (CauchySettings, optional): Radius and nodes.

    Returns:
        List[complex]: [f(center), f'(center), ..., f^(n_max)(center)].

    Raises:
        ConvergenceError: If the two node counts disagree beyond 1e-6.
        DomainError: If n_max is negative or too large for the node count.
    """
    derivatives, _ = cauchy_derivatives_with_error(f, center, n_max, settings)
    return derivatives


@dataclass(frozen=True)
class CauchyExpansion:
    """Derivatives from one Cauchy circle and the circle's accuracy data.

    Attributes:
        derivatives: f^(0)..f^(n_max) at the center.
        disagreement: Relative disagreement between N and 2N nodes.
        f_max: Largest |f| on the circle.
        radius: Circle radius.
        nodes: Node count N of the coarse rule.
    """

    derivatives: List[ComplexValue]
    disagreement: float
    f_max: float
    radius: float
    nodes: int

    def noise_floor(self, k: int, round_off: float = CAUCHY_ROUND_OFF) -> float:
        """Size of f^(k) that the circle sum cannot resolve from round-off."""
        return round_off * math.factorial(k) * self.f_max / self.radius**k


def cauchy_expansion(
    f: Callable[[ComplexValue], ComplexValue],
    center: ComplexValue,
    n_max: int,
    settings: Optional[CauchySettings] = None,
) -> CauchyExpansion:
    """As `cauchy_derivatives`, keeping the node disagreement and max |f|."""
    settings = settings or DEFAULT_CAUCHY
    if n_max < 0:
        raise DomainError(f"Derivative order must be non-negative, got {n_max}.")
    if n_max >= settings.nodes // 2:
        raise DomainError(
            f"{settings.nodes} nodes cannot resolve derivatives up to order "
            f"{n_max}; use at least {2 * (n_max + 1)} nodes."
        )
    center = complex(center)
    r = settings.radius
    values = _circle_values(f, center, r, 2 * settings.nodes)
    # even nodes of the fine circle form the coarse one
    coarse = _taylor_coefficients(values[::2], r)
    fine = _taylor_coefficients(values, r)
    f_max = float(np.max(np.abs(values)))

    derivatives = []
    disagreement = 0.0
    for k in range(n_max + 1):
        d_coarse = math.factorial(k) * coarse[k]
        d_fine = math.factorial(k) * fine[k]
        # Values below the round-off level of the circle sum are compared absolutely
        scale = max(abs(d_fine), 1e-6 * math.factorial(k) * f_max / r**k)
        if scale > 0:
            disagreement = max(disagreement, abs(d_fine - d_coarse) / scale)
        derivatives.append(complex(d_fine))

    if disagreement > CAUCHY_FAIL_TOL:
        raise ConvergenceError(
            f"Cauchy derivatives at {center} (radius {r}) disagree by "
            f"{disagreement:.2e} between {settings.nodes} and "
            f"{2 * settings.nodes} nodes.",
            estimate=derivatives,
            error_bound=disagreement,
        )
    if disagreement > CAUCHY_WARN_TOL:
        logger.warning(
            f"Cauchy derivatives at {center} agree only to {disagreement:.2e} "
            "between node counts."
        )
    return CauchyExpansion(derivatives, disagreement, f_max, r, settings.nodes)


def cauchy_derivatives_with_error(
    f: Callable[[ComplexValue], ComplexValue],
    center: ComplexValue,
    n_max: int,
    settings: Optional[CauchySettings] = None,
) -> Tuple[List[ComplexValue], float]:
    """As `cauchy_derivatives`, also returning the node-doubling disagreement."""
    expansion = cauchy_expansion(f, center, n_max, settings)
    return expansion.derivatives, expansion.disagreement


def nodes_for_ratio(ratio: float, n_max: int, minimum: int = 64) -> int:
    """Power-of-two node count whose aliasing error ratio**N is below 1e-16.

    `ratio` is the circle radius over the distance to the nearest
    singularity.
    """
    if not 0 < ratio < 1:
        raise DomainError(f"Circle must lie inside the disk of analyticity (ratio {ratio}).")
    needed = max(minimum, 2 * (n_max + 2), math.ceil(math.log(1e-16) / math.log(ratio)))
    return 1 << (needed - 1).bit_length()


if __name__ == "__main__":
    print(integrate_1d(lambda x: x**3, 0, 2))
    print(cauchy_derivatives(np.exp, 0, 4))
