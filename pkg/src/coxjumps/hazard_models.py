"""Hazard process models and their conditional cumulant generating functions.

Every model exposes Psi(u; t, T) = log E[exp(iu Lambda_T) | F_t], the radius
of a disk around u = i on which Psi is analytic, and the real-normalised
derivatives c_k = Psi^(k)(i) / i^k consumed by the survival formulas.

Models:
    CIR: Lambda integrates a square-root diffusion.
    GammaOU, IGOU: Lambda integrates an OU process driven by a Gamma or an
        inverse Gaussian subordinator.
    LevyKernel: Lambda_T - Lambda_t = int int sigma(s, z) (N - ds nu(dz)),
        or the integral against N itself when `compensated` is False.
    CMY: LevyKernel with sigma(s, z) = sigma(s) z and a CMY Levy density,
        for which the z-integrals are Gamma functions.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, ClassVar, List, Optional, Tuple, Union

import numpy as np
from scipy import optimize

from coxjumps.errors import (
    AccuracyError,
    ConvergenceError,
    DomainError,
)
from coxjumps.kernels import CmyDensity, SeparableKernel
from coxjumps.numerics import (
    CAUCHY_ROUND_OFF,
    DEFAULT_CAUCHY,
    DEFAULT_QUADRATURE,
    CauchySettings,
    QuadratureSettings,
    cauchy_expansion,
    ensure_finite,
    gamma_fn,
    integrate_1d,
    integrate_complex,
    integrate_levy,
    nodes_for_ratio,
)

logger = logging.getLogger(__name__)

# |Im c_k| allowed relative to max(1, |Re c_k|)
IMAG_RESIDUE_TOL = 1e-8
BRANCH_PATH_POINTS = 32
BRANCH_JUMP_TOL = 0.5
# Default circle radius as a fraction of the distance to the nearest singularity
WIDE_CIRCLE_FRACTION = 0.8
# Psi of the IG-OU model on the default circle comes from quadrature
CIRCLE_QUADRATURE = QuadratureSettings(rel_tol=1e-11, abs_tol=1e-12)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise DomainError(message)


@dataclass(frozen=True)
class CIR:
    """Integrated square-root (CIR) intensity.

    Attributes:
        theta: Mean-reversion speed.
        kappa: Long-run level.
        sigma: Volatility.
        lambda_t: Intensity at the conditioning time t.
        hazard_t: Accumulated hazard Lambda_t.
    """

    tag: ClassVar[str] = "cir"

    theta: float
    kappa: float
    sigma: float
    lambda_t: float
    hazard_t: float = 0.0

    def __post_init__(self):
        _require(
            self.theta > 0 and self.kappa > 0 and self.sigma > 0,
            f"CIR needs theta, kappa, sigma > 0 (got {self.theta}, {self.kappa}, {self.sigma}).",
        )
        _require(self.lambda_t >= 0, f"CIR needs lambda_t >= 0, got {self.lambda_t}.")
        _require(
            self.theta * self.kappa >= self.sigma**2,
            "CIR positivity condition theta*kappa >= sigma**2 violated "
            f"({self.theta * self.kappa} < {self.sigma**2}).",
        )

    @property
    def accumulated_hazard(self) -> float:
        return self.hazard_t


@dataclass(frozen=True)
class GammaOU:
    """Integrated Gamma(a, b)-OU intensity.

    The driving subordinator L has jumps at rate a per unit of its own
    time with Exp(b) sizes; the intensity is driven by L at time theta*s.
    """

    tag: ClassVar[str] = "gamma_ou"

    theta: float
    a: float
    b: float
    lambda0: float
    hazard_t: float = 0.0

    def __post_init__(self):
        _require(
            self.theta > 0 and self.a > 0 and self.b > 0,
            f"GammaOU needs theta, a, b > 0 (got {self.theta}, {self.a}, {self.b}).",
        )
        _require(self.lambda0 >= 0, f"GammaOU needs lambda0 >= 0, got {self.lambda0}.")

    @property
    def accumulated_hazard(self) -> float:
        return self.hazard_t

    def levy_exponent(self, x: complex) -> complex:
        """Cumulant k_L(x) of the driving subordinator at unit time."""
        return 1j * x * self.a / (self.b - 1j * x)


@dataclass(frozen=True)
class IGOU:
    """Integrated IG(a, b)-OU intensity."""

    tag: ClassVar[str] = "ig_ou"

    theta: float
    a: float
    b: float
    lambda0: float
    hazard_t: float = 0.0

    def __post_init__(self):
        _require(
            self.theta > 0 and self.a > 0 and self.b > 0,
            f"IGOU needs theta, a, b > 0 (got {self.theta}, {self.a}, {self.b}).",
        )
        _require(self.lambda0 >= 0, f"IGOU needs lambda0 >= 0, got {self.lambda0}.")

    @property
    def accumulated_hazard(self) -> float:
        return self.hazard_t

    def levy_exponent(self, x: complex) -> complex:
        return 1j * x * self.a / cmath.sqrt(self.b**2 - 2j * x)


@dataclass(frozen=True)
class LevyKernel:
    """Hazard driven by a Poisson random measure through a kernel sigma(s, z).

    Attributes:
        sigma_fn: Kernel sigma(s, z); must accept numpy arrays.
        levy_density: Density of the Levy measure on `z_domain`.
        z_domain: Support (z_lo, z_hi) of the density, z_lo >= 0.
        lambda_t: Accumulated hazard Lambda_t.
        compensated: Integrate against the compensated measure.
    """

    tag: ClassVar[str] = "levy_kernel"

    sigma_fn: Callable
    levy_density: Callable
    z_domain: Tuple[float, float]
    lambda_t: float = 0.0
    compensated: bool = True

    def __post_init__(self):
        z_lo, z_hi = self.z_domain
        _require(0 <= z_lo < z_hi, f"LevyKernel needs 0 <= z_lo < z_hi, got {self.z_domain}.")
        grid = np.geomspace(max(z_lo, 1e-6 * z_hi), z_hi, 64)
        _require(
            bool(np.all(density_values(self.levy_density, grid) >= 0)),
            "LevyKernel density must be non-negative on its domain.",
        )

    @property
    def accumulated_hazard(self) -> float:
        return self.lambda_t


@dataclass(frozen=True)
class CMY:
    """CMY-driven hazard with kernel sigma(s, z) = sigma(s) z."""

    tag: ClassVar[str] = "cmy"

    C: float
    M: float
    Y: float
    sigma_fn: Callable
    lambda_t: float = 0.0
    compensated: bool = True

    def __post_init__(self):
        _require(self.C > 0 and self.M > 0, f"CMY needs C, M > 0 (got {self.C}, {self.M}).")
        _require(self.Y < 1, f"CMY needs Y < 1, got Y={self.Y}.")

    @property
    def accumulated_hazard(self) -> float:
        return self.lambda_t

    @property
    def density(self) -> CmyDensity:
        return CmyDensity(self.C, self.M, self.Y)


def density_values(density: Callable, z: np.ndarray) -> np.ndarray:
    """Evaluate a Levy density on an array, element-wise if it does not vectorise."""
    try:
        values = np.asarray(density(z), dtype=float)
        if values.shape == np.shape(z):
            return values
    except TypeError:
        pass
    return np.array([float(density(x)) for x in np.ravel(z)]).reshape(np.shape(z))


HazardModelSpec = Union[CIR, GammaOU, IGOU, LevyKernel, CMY]
OU_MODELS = (GammaOU, IGOU)
LEVY_MODELS = (LevyKernel, CMY)


@dataclass(frozen=True)
class CgfQuery:
    """Point u and conditioning window [t, T] at which Psi is evaluated."""

    u: complex
    t: float
    T: float

    def __post_init__(self):
        ensure_finite(self.u, "CGF argument")
        _require(
            math.isfinite(self.t) and math.isfinite(self.T),
            f"CGF window must be finite, got [{self.t}, {self.T}].",
        )
        _require(self.T >= self.t, f"CGF window is reversed: t={self.t} > T={self.T}.")


@dataclass(frozen=True)
class CumulantDerivatives:
    """c0 = Psi(i) and c_k = Psi^(k)(i) / i^k for k = 1..n-1.

    `n` is the jump index served by these derivatives.
    """

    c0: float
    c: Tuple[float, ...]
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.c) + 1


@dataclass(frozen=True)
class KernelIntegrals:
    """Double integrals of a Levy-driven hazard over [t, T].

    Attributes:
        log_m0: int int (e^-sigma - 1 + sigma), without the + sigma when
            uncompensated.
        first: int int (e^-sigma - 1) sigma, or int int e^-sigma sigma when
            uncompensated.
        powers: powers[k - 2] = int int e^-sigma sigma^k for k = 2, 3, ...
    """

    log_m0: float
    first: float
    powers: Tuple[float, ...]

    def power(self, k: int) -> float:
        assert k >= 2, "powers start at k=2"
        return self.powers[k - 2]


def as_levy_kernel(model: CMY) -> LevyKernel:
    """Express a CMY hazard as a generic LevyKernel with the same law."""
    density = model.density
    return LevyKernel(
        sigma_fn=SeparableKernel(model.sigma_fn, 1.0),
        levy_density=density,
        z_domain=density.z_domain,
        lambda_t=model.lambda_t,
        compensated=model.compensated,
    )


def _time_points(sigma_fn) -> Optional[Tuple[float, ...]]:
    breakpoints = getattr(sigma_fn, "breakpoints", None)
    return breakpoints() if callable(breakpoints) else None


def _exp_remainder(w: complex, order: int) -> complex:
    """e^w - sum_{j < order} w^j / j!, accurate for small |w|."""
    if abs(w) < 1e-3:
        term = w**order / math.factorial(order)
        total = term
        for j in range(order + 1, order + 6):
            term = term * w / j
            total += term
        return total
    value = cmath.exp(w)
    term = 1.0
    for j in range(order):
        value -= term
        term = term * w / (j + 1)
    return value


# Psi increments of the absolutely continuous models over a window of length tau


def _cir_increment(model: CIR, u: complex, tau: float) -> complex:
    if tau == 0 or u == 0:
        return 0j
    th, kp, sg = model.theta, model.kappa, model.sigma
    gamma = cmath.sqrt(th**2 - 2j * u * sg**2)
    decay = cmath.exp(-gamma * tau)
    # Re gamma > 0 gives |ratio * decay| < 1, so both logs stay on the principal branch
    ratio = (th - gamma) / (th + gamma)
    tail = 1 - ratio * decay
    B = 2j * u * (1 - decay) / ((gamma + th) * tail)
    log_denom = cmath.log((gamma + th) / (2 * gamma)) + cmath.log(tail)
    A = (2 * th * kp / sg**2) * ((th - gamma) * tau / 2 - log_denom)
    return A + model.lambda_t * B


def _ou_quadrature_increment(
    model: Union[GammaOU, IGOU], u: complex, tau: float, settings: QuadratureSettings
) -> complex:
    th = model.theta
    weight = -math.expm1(-th * tau) / th

    def integrand(r: float) -> complex:
        return model.levy_exponent(u * (-math.expm1(-th * r)) / th)

    return 1j * u * model.lambda0 * weight + th * integrate_complex(integrand, 0.0, tau, settings)


def _gamma_ou_increment(model: GammaOU, u: complex, tau: float, settings) -> complex:
    if tau == 0 or u == 0:
        return 0j
    th, a, b = model.theta, model.a, model.b
    weight = -math.expm1(-th * tau) / th
    iu = 1j * u
    denom = iu - th * b
    if abs(denom) < 1e-8 * (1 + th * b):
        # removable singularity of the closed form
        return _ou_quadrature_increment(model, u, tau, settings)
    return iu * model.lambda0 * weight + th * a / denom * (
        b * cmath.log(b / (b - iu * weight)) - iu * tau
    )


def _ig_ou_increment(model: IGOU, u: complex, tau: float, settings) -> complex:
    if tau == 0 or u == 0:
        return 0j
    th, a, b = model.theta, model.a, model.b
    c = -2j * u / (b**2 * th)
    if abs(c) < 1e-8:
        return _ou_quadrature_increment(model, u, tau, settings)
    decayed = -math.expm1(-th * tau)
    s = cmath.sqrt(1 + c * decayed)
    q = cmath.sqrt(1 + c)
    area = (1 - s) / c + (cmath.atanh(s / q) - cmath.atanh(1 / q)) / q
    return 1j * u * model.lambda0 * decayed / th + (2 * a * 1j * u / (b * th)) * area


def _cmy_time_integrand(model: CMY, u: complex, sigma: float) -> complex:
    """int (e^{iu sigma z} - 1 [- iu sigma z]) nu(dz) for the CMY density."""
    C, M, Y = model.C, model.M, model.Y
    base = M - 1j * u * sigma
    _require(base.real > 0, f"CMY transform undefined: Re(M - iu sigma) = {base.real} <= 0.")
    if Y == 0:
        value = -C * cmath.log(base / M)
        if model.compensated:
            value -= C * 1j * u * sigma / M
        return value
    value = C * gamma_fn(-Y) * M**Y * _exp_remainder(Y * cmath.log(base / M), 1)
    if model.compensated:
        value -= C * gamma_fn(1 - Y) * M ** (Y - 1) * 1j * u * sigma
    return value


def _levy_cgf(model, u: complex, t: float, T: float, settings: QuadratureSettings) -> complex:
    value = 1j * u * model.lambda_t
    if T == t or u == 0:
        return value
    if isinstance(model, CMY):
        return value + integrate_complex(
            lambda s: _cmy_time_integrand(model, u, model.sigma_fn(s)),
            t,
            T,
            settings,
            points=_time_points(model.sigma_fn),
        )
    order = 2 if model.compensated else 1

    def part(s: float, z: float, imag: bool) -> float:
        w = _exp_remainder(1j * u * model.sigma_fn(s, z), order)
        return w.imag if imag else w.real

    points = _time_points(model.sigma_fn)
    re = integrate_levy(
        lambda s, z: part(s, z, False), t, T, model.levy_density, model.z_domain,
        settings, time_points=points,
    )
    im = integrate_levy(
        lambda s, z: part(s, z, True), t, T, model.levy_density, model.z_domain,
        settings, time_points=points,
    )
    return value + complex(re, im)


def _increment(model, u: complex, tau: float, settings: QuadratureSettings) -> complex:
    if isinstance(model, CIR):
        return _cir_increment(model, u, tau)
    if isinstance(model, GammaOU):
        return _gamma_ou_increment(model, u, tau, settings)
    if isinstance(model, IGOU):
        return _ig_ou_increment(model, u, tau, settings)
    raise DomainError(f"Unsupported hazard model {type(model).__name__}.")


def _check_branch_path(fn: Callable[[complex], complex], u: complex) -> None:
    """Reject evaluations whose path 0 -> u crosses a branch cut."""
    path = [fn(u * j / BRANCH_PATH_POINTS) for j in range(BRANCH_PATH_POINTS + 1)]
    steps = np.abs(np.diff(np.array(path)))
    jumps = np.abs(np.diff(np.imag(path)))
    limit = max(BRANCH_JUMP_TOL, 10 * float(np.median(steps)))
    if np.any(jumps > limit):
        raise DomainError(
            f"CGF path from 0 to u={u} crosses a branch cut "
            f"(imaginary jump {jumps.max():.3g})."
        )


def cgf(
    model: HazardModelSpec,
    q: CgfQuery,
    settings: Optional[QuadratureSettings] = None,
    check_branch: bool = True,
) -> complex:
    """Conditional cumulant generating function Psi(u; t, T).

    Args:
        model (HazardModelSpec): Hazard model.
        q (CgfQuery): Argument u and window [t, T].
        settings (QuadratureSettings, optional): Tolerances for the
            quadrature-based branches.
        check_branch (bool): Verify continuity along the segment 0 -> u for
            the closed-form branches. Defaults to True.

    Returns:
        complex: Psi(u; t, T).

    Raises:
        DomainError: On a branch-cut crossing or an undefined transform.
        ConvergenceError: Propagated from the quadrature.
    """
    settings = settings or DEFAULT_QUADRATURE
    u = complex(q.u)
    if isinstance(model, LEVY_MODELS):
        return ensure_finite(_levy_cgf(model, u, q.t, q.T, settings), "CGF value")
    tau = q.T - q.t
    if check_branch and u != 0 and tau > 0:
        _check_branch_path(lambda v: _increment(model, v, tau, settings), u)
    value = 1j * u * model.hazard_t + _increment(model, u, tau, settings)
    return ensure_finite(value, "CGF value")


def cgf_by_quadrature(
    model: Union[GammaOU, IGOU], q: CgfQuery, settings: Optional[QuadratureSettings] = None
) -> complex:
    """Psi of an OU model from the time integral of the driving Levy exponent.

    Independent of the closed forms used by `cgf`.
    """
    if not isinstance(model, OU_MODELS):
        raise DomainError(f"{type(model).__name__} is not an OU model.")
    settings = settings or DEFAULT_QUADRATURE
    u = complex(q.u)
    return 1j * u * model.hazard_t + _ou_quadrature_increment(model, u, q.T - q.t, settings)


def _singularities(model, t: float, T: float) -> List[complex]:
    tau = T - t
    if isinstance(model, CIR):
        th, sg = model.theta, model.sigma
        points = [-1j * th**2 / (2 * sg**2)]
        if tau > 0:
            omega = optimize.brentq(
                lambda w: w * math.cos(w * tau / 2) + th * math.sin(w * tau / 2),
                math.pi / tau,
                2 * math.pi / tau,
            )
            points.append(-1j * (omega**2 + th**2) / (2 * sg**2))
        return points
    if isinstance(model, GammaOU):
        points = [-1j * model.theta * model.b]
        if tau > 0:
            weight = -math.expm1(-model.theta * tau) / model.theta
            points.append(-1j * model.b / weight)
        return points
    if isinstance(model, IGOU):
        scale = model.b**2 * model.theta / 2
        points = [0j, -1j * scale]
        if tau > 0:
            points.append(-1j * scale / -math.expm1(-model.theta * tau))
        return points
    if isinstance(model, CMY):
        top = model.sigma_fn.sup_abs(t, T) if hasattr(model.sigma_fn, "sup_abs") else None
        return [-1j * model.M / top] if top else []
    return []


def analyticity_radius(
    model: HazardModelSpec, t: float, T: float, cap: float = DEFAULT_CAUCHY.radius
) -> float:
    """Radius of a disk around u = i on which Psi is analytic.

    Returns 0.9 times the distance from i to the nearest singular point,
    capped at `cap`.
    """
    distances = [abs(p - 1j) for p in _singularities(model, t, T)]
    if not distances:
        return cap
    return min(cap, 0.9 * min(distances))


def _wide_circle(
    model: Union[CIR, GammaOU, IGOU], t: float, T: float, n: int, quad: QuadratureSettings
) -> Tuple[Callable[[complex], complex], CauchySettings, float]:
    """Psi, circle settings and round-off level for high-order derivatives at i.

    The radius is a fixed fraction of the distance to the nearest point where
    the evaluated form of Psi is singular, so that round-off in c_k does not
    grow like k!/r^k on a small circle. The IG-OU closed form has removable
    points at u = 0 and on its branch cuts; on this circle Psi is computed
    from the time integral, which is singular only where Psi itself is.
    """
    if isinstance(model, IGOU):
        points = _singularities(model, t, T)[-1:]

        def psi(u: complex) -> complex:
            return cgf_by_quadrature(model, CgfQuery(u, t, T), CIRCLE_QUADRATURE)

        round_off = 100 * CIRCLE_QUADRATURE.rel_tol
    else:
        points = _singularities(model, t, T)

        def psi(u: complex) -> complex:
            return cgf(model, CgfQuery(u, t, T), quad, check_branch=False)

        round_off = CAUCHY_ROUND_OFF
    radius = WIDE_CIRCLE_FRACTION * min(abs(p - 1j) for p in points)
    nodes = nodes_for_ratio(WIDE_CIRCLE_FRACTION, n, DEFAULT_CAUCHY.nodes)
    return psi, CauchySettings(radius=radius, nodes=nodes), round_off


def _levy_small_z_bound(model: LevyKernel, t: float, T: float, order: int, settings):
    """Bound on the [0, eps) strip of int int |g| for |g| <= |sigma|^order e^|sigma|.

    Only available for separable kernels sigma(s, z) = sigma(s) z**p.
    """
    kernel = model.sigma_fn
    if not isinstance(kernel, SeparableKernel) or not hasattr(kernel.time, "sup_abs"):
        return None
    top = kernel.time.sup_abs(t, T)
    p = kernel.power

    def bound(eps: float) -> float:
        moment = integrate_1d(
            lambda z: z ** (order * p) * model.levy_density(z), 0.0, eps, settings
        )
        return (T - t) * top**order * math.exp(top * eps**p) * moment

    return bound


def _levy_double(model: LevyKernel, g, order: int, t: float, T: float, settings) -> float:
    try:
        return integrate_levy(
            lambda s, z: g(model.sigma_fn(s, z)),
            t,
            T,
            model.levy_density,
            model.z_domain,
            settings,
            small_z_bound=_levy_small_z_bound(model, t, T, order, settings),
            time_points=_time_points(model.sigma_fn),
        )
    except ConvergenceError as err:
        raise DomainError(
            f"Kernel integral of order {order} does not converge; the moment "
            f"condition on sigma may fail: {err}"
        ) from err


def kernel_integrals(
    model: Union[LevyKernel, CMY],
    t: float,
    T: float,
    max_power: int,
    settings: Optional[QuadratureSettings] = None,
) -> KernelIntegrals:
    """Double integrals shared by both survival formulas.

    Args:
        model (Union[LevyKernel, CMY]): Levy-driven hazard.
        t (float): Conditioning time.
        T (float): Horizon.
        max_power (int): Highest k of int int e^-sigma sigma^k needed.
        settings (QuadratureSettings, optional): Tolerances.

    Returns:
        KernelIntegrals: The integrals.
    """
    if not isinstance(model, LEVY_MODELS):
        raise DomainError(f"{type(model).__name__} is not a Levy-driven hazard.")
    _require(T >= t, f"Window is reversed: t={t} > T={T}.")
    settings = settings or DEFAULT_QUADRATURE
    powers = range(2, max_power + 1)
    if T == t:
        return KernelIntegrals(0.0, 0.0, tuple(0.0 for _ in powers))

    if isinstance(model, CMY):
        C, M, Y = model.C, model.M, model.Y
        comp = model.compensated
        points = _time_points(model.sigma_fn)

        def time_integral(h):
            def integrand(s: float) -> float:
                sigma = model.sigma_fn(s)
                _require(M + sigma > 0, f"CMY needs M + sigma(s) > 0, got {M + sigma} at s={s}.")
                return h(sigma)

            return integrate_1d(integrand, t, T, settings, points=points)

        def h_log_m0(sigma):
            if Y == 0:
                value = -C * math.log1p(sigma / M)
                return value + C * sigma / M if comp else value
            value = C * gamma_fn(-Y) * M**Y * math.expm1(Y * math.log1p(sigma / M))
            return value + C * gamma_fn(1 - Y) * M ** (Y - 1) * sigma if comp else value

        def h_first(sigma):
            tilted = (M + sigma) ** (Y - 1)
            return C * gamma_fn(1 - Y) * sigma * (tilted - M ** (Y - 1) if comp else tilted)

        def h_power(k):
            return lambda sigma: C * gamma_fn(k - Y) * sigma**k * (M + sigma) ** (Y - k)

        return KernelIntegrals(
            log_m0=time_integral(h_log_m0),
            first=time_integral(h_first),
            powers=tuple(time_integral(h_power(k)) for k in powers),
        )

    if model.compensated:
        log_m0 = _levy_double(model, lambda x: math.expm1(-x) + x, 2, t, T, settings)
        first = _levy_double(model, lambda x: math.expm1(-x) * x, 2, t, T, settings)
    else:
        log_m0 = _levy_double(model, lambda x: math.expm1(-x), 1, t, T, settings)
        first = _levy_double(model, lambda x: math.exp(-x) * x, 1, t, T, settings)
    return KernelIntegrals(
        log_m0=log_m0,
        first=first,
        powers=tuple(
            _levy_double(model, lambda x, k=k: math.exp(-x) * x**k, k, t, T, settings)
            for k in powers
        ),
    )


def cgf_derivatives_at_i(
    model: HazardModelSpec,
    t: float,
    T: float,
    n: int,
    quad: Optional[QuadratureSettings] = None,
    cauchy: Optional[CauchySettings] = None,
) -> CumulantDerivatives:
    """Psi(i) and the normalised derivatives c_k = Psi^(k)(i) / i^k, k = 1..n.

    Levy-driven models use the kernel integrals directly; the other models
    differentiate Psi numerically on a circle around i.

    Args:
        model (HazardModelSpec): Hazard model.
        t (float): Conditioning time.
        T (float): Horizon.
        n (int): Number of derivatives.
        quad (QuadratureSettings, optional): Quadrature tolerances.
        cauchy (CauchySettings, optional): Fixed circle settings; the radius
            is reduced to the model's analyticity radius when needed. By
            default the circle is sized to the nearest singularity and the
            node count to n.

    Returns:
        CumulantDerivatives: c0 and c_1..c_n.

    Raises:
        AccuracyError: If a numerically differentiated c_k keeps an
            imaginary part above 1e-8 and above the round-off floor of the
            circle.
        DomainError: On branch problems or failing moment conditions.
    """
    _require(n >= 0, f"Number of derivatives must be non-negative, got {n}.")
    _require(T >= t, f"Window is reversed: t={t} > T={T}.")
    quad = quad or DEFAULT_QUADRATURE

    if isinstance(model, LEVY_MODELS):
        integrals = kernel_integrals(model, t, T, n, quad)
        c = []
        if n >= 1:
            c.append(model.lambda_t + integrals.first)
            c.extend(integrals.powers)
        return CumulantDerivatives(
            c0=-model.lambda_t + integrals.log_m0,
            c=tuple(c),
            diagnostics={"route": "kernel_integrals"},
        )

    c0 = cgf(model, CgfQuery(1j, t, T), quad).real
    if n == 0 or T == t:
        c = [model.hazard_t] + [0.0] * (n - 1) if n else []
        return CumulantDerivatives(c0=c0, c=tuple(c), diagnostics={"route": "closed_form"})

    if cauchy is None:
        psi, settings, round_off = _wide_circle(model, t, T, n, quad)
    else:
        radius = analyticity_radius(model, t, T, cap=cauchy.radius)
        if radius < cauchy.radius:
            logger.info(f"Cauchy radius reduced to {radius:.4g} for {model.tag}.")
        settings = replace(cauchy, radius=radius)
        round_off = CAUCHY_ROUND_OFF

        def psi(u: complex) -> complex:
            return cgf(model, CgfQuery(u, t, T), quad, check_branch=False)

    expansion = cauchy_expansion(psi, 1j, n, settings)
    c = []
    for k in range(1, n + 1):
        value = expansion.derivatives[k] / 1j**k
        limit = max(IMAG_RESIDUE_TOL * max(1.0, abs(value.real)), expansion.noise_floor(k, round_off))
        if abs(value.imag) > limit:
            raise AccuracyError(
                f"c_{k} of {model.tag} has imaginary residue {value.imag:.3e} "
                f"(real part {value.real:.6g}); radius {settings.radius} may be too large."
            )
        c.append(value.real)
    return CumulantDerivatives(
        c0=c0,
        c=tuple(c),
        diagnostics={
            "route": "cauchy",
            "radius": settings.radius,
            "nodes": settings.nodes,
            "disagreement": expansion.disagreement,
        },
    )


if __name__ == "__main__":
    model = CIR(theta=2.0, kappa=1.0, sigma=0.5, lambda_t=1.0)
    print(cgf(model, CgfQuery(1j, 0.0, 1.0)))
    print(cgf_derivatives_at_i(model, 0.0, 1.0, 3))
