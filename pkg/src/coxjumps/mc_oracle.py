"""Monte Carlo reference values for the hazard models.

Paths are generated in fixed-size blocks. Block b draws from its own Philox
stream seeded with SeedSequence(seed, spawn_key=(b,)), and block statistics
are merged in block order, so estimates do not depend on the number of
worker processes.
"""

import hashlib
import logging
import math
from dataclasses import asdict, dataclass
from functools import partial
from multiprocessing import Pool
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from tqdm import tqdm

from coxjumps.errors import ConfigurationError, DomainError
from coxjumps.hazard_models import (
    CIR,
    CMY,
    IGOU,
    GammaOU,
    HazardModelSpec,
    LevyKernel,
    as_levy_kernel,
    density_values,
)
from coxjumps.numerics import integrate_levy
from coxjumps.survival_bell import check_jump_index
from coxjumps.utils.timer import timeit

logger = logging.getLogger(__name__)

# Dropped small jumps may carry at most this fraction of the kernel moment
REMAINDER_TOL = 1e-4
# Grid size of the tabulated jump-size distribution (log z)
JUMP_TABLE_SIZE = 8192
# Expected jumps held in memory at once
JUMPS_PER_CHUNK = 4_000_000
# Time intervals of the tabulated compensator of a jump-driven path
COMPENSATOR_GRID = 64


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    Attributes:
        n_paths: Number of simulated paths.
        seed: Root seed (64-bit unsigned).
        time_step: Euler step of the CIR and IG-OU grids.
        jump_trunc_eps: Jumps of size below this are dropped (infinite
            activity Levy measures).
        workers: Number of worker processes.
        block_size: Paths per random stream.
        progress: Show a tqdm progress bar.
    """

    n_paths: int = 1_000_000
    seed: int = 0
    time_step: float = 1e-3
    jump_trunc_eps: float = 1e-8
    workers: int = 1
    block_size: int = 10_000
    progress: bool = False

    def __post_init__(self):
        if int(self.n_paths) < 100:
            raise ConfigurationError(f"n_paths must be at least 100, got {self.n_paths}.")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}.")
        if not self.time_step > 0:
            raise ConfigurationError(f"time_step must be positive, got {self.time_step}.")
        if not self.jump_trunc_eps > 0:
            raise ConfigurationError(
                f"jump_trunc_eps must be positive, got {self.jump_trunc_eps}."
            )
        if int(self.workers) < 1 or int(self.block_size) < 1:
            raise ConfigurationError("workers and block_size must be positive.")

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def n_blocks(self) -> int:
        return -(-self.n_paths // self.block_size)

    def block_length(self, block: int) -> int:
        return min(self.block_size, self.n_paths - block * self.block_size)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int
    seed: int
    model_digest: str


@dataclass(frozen=True)
class CharacteristicEstimate:
    """Empirical E[exp(iu Lambda_T)] with the standard errors of both parts."""

    u: complex
    value: complex
    std_error_re: float
    std_error_im: float


@dataclass(frozen=True)
class _JumpPlan:
    """Precomputed jump-size table and compensator of a Levy-driven hazard."""

    kernel: LevyKernel
    rate: float
    log_z: np.ndarray
    cdf: np.ndarray
    compensator: float
    compensator_times: Optional[np.ndarray] = None
    compensator_path: Optional[np.ndarray] = None

    def compensator_at(self, s: np.ndarray) -> np.ndarray:
        """Compensator accrued from t up to each time in `s`."""
        if self.compensator_path is None:
            return np.zeros_like(s)
        return np.interp(s, self.compensator_times, self.compensator_path)


def model_digest(model: HazardModelSpec) -> str:
    return hashlib.sha1(repr(model).encode()).hexdigest()[:16]


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,)))
    )


def _kernel_values(fn: Callable, s: np.ndarray, z: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(fn(s, z), dtype=float)
        if values.shape == s.shape:
            return values
    except TypeError:
        pass
    return np.array([float(fn(a, b)) for a, b in zip(s, z)])


def _compensator_profile(kernel: LevyKernel, t: float, T: float, z_range) -> Tuple[np.ndarray, np.ndarray]:
    """Compensator accrued on [t, s] for s on a time grid that holds the kernel breakpoints."""
    breaks = getattr(kernel.sigma_fn, "breakpoints", lambda: ())()
    times = np.union1d(
        np.linspace(t, T, COMPENSATOR_GRID + 1), [b for b in breaks if t < b < T]
    )
    pieces = [
        integrate_levy(lambda s, z: kernel.sigma_fn(s, z), a, b, kernel.levy_density, z_range)
        for a, b in zip(times[:-1], times[1:])
    ]
    return times, np.concatenate([[0.0], np.cumsum(pieces)])


def _jump_plan(model, t: float, T: float, config: McConfig, track_peak: bool = False) -> _JumpPlan:
    kernel = as_levy_kernel(model) if isinstance(model, CMY) else model
    z_min, z_hi = kernel.z_domain
    eps = config.jump_trunc_eps
    z_lo = max(z_min, eps)
    if z_lo >= z_hi:
        raise ConfigurationError(f"jump_trunc_eps={eps} removes the whole Levy measure.")

    if z_min < eps and T > t:
        order = 2 if kernel.compensated else 1
        factor = 0.5 if kernel.compensated else 1.0

        def moment(lo, hi):
            return integrate_levy(
                lambda s, z: abs(kernel.sigma_fn(s, z)) ** order,
                t, T, kernel.levy_density, (lo, hi),
            )

        total = moment(z_min, z_hi)
        dropped = factor * moment(z_min, eps)
        if total > 0 and dropped > REMAINDER_TOL * total:
            raise ConfigurationError(
                f"Jumps below eps={eps} carry {dropped / total:.2e} of the kernel "
                f"moment (limit {REMAINDER_TOL}); use a smaller jump_trunc_eps."
            )

    log_z = np.linspace(math.log(z_lo), math.log(z_hi), JUMP_TABLE_SIZE + 1)
    z = np.exp(log_z)
    cdf = cumulative_trapezoid(density_values(kernel.levy_density, z) * z, log_z, initial=0.0)
    if not (kernel.compensated and T > t):
        return _JumpPlan(kernel, float(cdf[-1]), log_z, cdf, 0.0)
    if track_peak:
        times, path = _compensator_profile(kernel, t, T, (z_lo, z_hi))
        return _JumpPlan(kernel, float(cdf[-1]), log_z, cdf, float(path[-1]), times, path)
    compensator = integrate_levy(
        lambda s, z: kernel.sigma_fn(s, z), t, T, kernel.levy_density, (z_lo, z_hi)
    )
    return _JumpPlan(kernel, float(cdf[-1]), log_z, cdf, compensator)


def _prepare(
    model, t: float, T: float, config: McConfig, track_peak: bool = False
) -> Optional[_JumpPlan]:
    if T < t:
        raise DomainError(f"Horizon T={T} precedes conditioning time t={t}.")
    if isinstance(model, (LevyKernel, CMY)):
        return _jump_plan(model, t, T, config, track_peak)
    return None


def _grid(tau: float, time_step: float) -> Tuple[int, float]:
    if tau == 0:
        return 0, 0.0
    steps = max(1, math.ceil(tau / time_step))
    return steps, tau / steps


def _cir_increments(model: CIR, tau: float, config: McConfig, rng, size: int) -> np.ndarray:
    steps, h = _grid(tau, config.time_step)
    th, kp, sg = model.theta, model.kappa, model.sigma
    lam = np.full(size, float(model.lambda_t))
    acc = np.zeros(size)
    for _ in range(steps):
        # full truncation: negative excursions enter drift and diffusion as 0
        pos = np.maximum(lam, 0.0)
        nxt = lam + th * (kp - pos) * h + sg * np.sqrt(pos * h) * rng.standard_normal(size)
        acc += 0.5 * (pos + np.maximum(nxt, 0.0)) * h
        lam = nxt
    return acc


def _compound_ou(th: float, tau: float, rate: float, sizes: Callable, rng, size: int) -> np.ndarray:
    """Sum of jumps weighted by (1 - e^{-th (tau - r)}) / th, jumps at `rate` per unit r."""
    counts = rng.poisson(rate * tau, size=size)
    total = int(counts.sum())
    epochs = tau * rng.random(total)
    weights = -np.expm1(-th * (tau - epochs)) / th
    owner = np.repeat(np.arange(size), counts)
    return np.bincount(owner, weights=weights * sizes(total), minlength=size)


def _gamma_ou_increments(model: GammaOU, tau: float, rng, size: int) -> np.ndarray:
    th = model.theta
    base = model.lambda0 * -math.expm1(-th * tau) / th
    jumps = _compound_ou(
        th, tau, model.a * th, lambda k: rng.exponential(1.0 / model.b, k), rng, size
    )
    return base + jumps


def _ig_ou_increments(model: IGOU, tau: float, config: McConfig, rng, size: int) -> np.ndarray:
    th, a, b = model.theta, model.a, model.b
    acc = np.full(size, model.lambda0 * -math.expm1(-th * tau) / th)
    steps, h = _grid(tau, config.time_step)
    # IG(a/2, b) part of the driving process over driving time th*h
    shape = 0.5 * a * th * h
    for j in range(steps):
        weight = -math.expm1(-th * (tau - (j + 0.5) * h)) / th
        acc += weight * rng.wald(shape / b, shape**2, size)
    # compound Poisson part: jumps x^2 / b^2 at rate a b / 2 per unit driving time
    acc += _compound_ou(
        th, tau, 0.5 * a * b * th, lambda k: rng.standard_normal(k) ** 2 / b**2, rng, size
    )
    return acc


def _jump_path_peaks(
    plan: _JumpPlan, epochs: np.ndarray, jumps: np.ndarray, owner: np.ndarray, size: int
) -> np.ndarray:
    """Largest value of each path just before and just after its jumps, starting from 0."""
    peak = np.zeros(size)
    if len(epochs) == 0:
        return peak
    order = np.lexsort((epochs, owner))
    epochs, jumps, owner = epochs[order], jumps[order], owner[order]
    running = np.cumsum(jumps)
    first = np.r_[0, np.flatnonzero(np.diff(owner)) + 1]
    lengths = np.diff(np.r_[first, len(owner)])
    # restart the cumulative sum at the first jump of each path
    running -= np.repeat(running[first] - jumps[first], lengths)
    after = running - plan.compensator_at(epochs)
    np.maximum.at(peak, owner, np.maximum(after - jumps, after))
    return peak


def _levy_paths(
    plan: _JumpPlan, t: float, tau: float, rng, size: int, track_peak: bool = False
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    out = np.empty(size)
    peak = np.empty(size) if track_peak else None
    expected = plan.rate * tau
    chunk = max(1, int(JUMPS_PER_CHUNK // max(expected, 1.0)))
    for start in range(0, size, chunk):
        stop = min(size, start + chunk)
        counts = rng.poisson(expected, size=stop - start)
        total = int(counts.sum())
        epochs = t + tau * rng.random(total)
        z = np.exp(np.interp(rng.random(total) * plan.rate, plan.cdf, plan.log_z))
        owner = np.repeat(np.arange(stop - start), counts)
        jumps = _kernel_values(plan.kernel.sigma_fn, epochs, z) if total else np.zeros(0)
        out[start:stop] = np.bincount(owner, weights=jumps, minlength=stop - start)
        if track_peak:
            peak[start:stop] = _jump_path_peaks(plan, epochs, jumps, owner, stop - start)
    out -= plan.compensator
    if track_peak:
        peak = np.maximum(peak, out)
    return out, peak


def _levy_increments(plan: _JumpPlan, t: float, tau: float, rng, size: int) -> np.ndarray:
    return _levy_paths(plan, t, tau, rng, size)[0]


def sample_increments(
    model: HazardModelSpec,
    t: float,
    T: float,
    config: McConfig,
    rng: np.random.Generator,
    size: int,
    plan: Optional[_JumpPlan] = None,
) -> np.ndarray:
    """Draw `size` samples of Lambda_T - Lambda_t."""
    tau = T - t
    if isinstance(model, CIR):
        return _cir_increments(model, tau, config, rng, size)
    if isinstance(model, GammaOU):
        return _gamma_ou_increments(model, tau, rng, size)
    if isinstance(model, IGOU):
        return _ig_ou_increments(model, tau, config, rng, size)
    if isinstance(model, (LevyKernel, CMY)):
        plan = plan or _jump_plan(model, t, T, config)
        return _levy_increments(plan, t, tau, rng, size)
    raise DomainError(f"Unsupported hazard model {type(model).__name__}.")


def sample_peaks(
    model: HazardModelSpec,
    t: float,
    T: float,
    config: McConfig,
    rng: np.random.Generator,
    size: int,
    plan: Optional[_JumpPlan] = None,
) -> np.ndarray:
    """Draw `size` samples of max over [t, T] of Lambda_s - Lambda_t on the simulation grid.

    The CIR and OU hazards accumulate non-negative intensities, so their peak
    is the terminal increment. Jump-driven paths are evaluated just before and
    just after every jump epoch and at T.
    """
    if isinstance(model, (LevyKernel, CMY)):
        plan = plan or _jump_plan(model, t, T, config, track_peak=True)
        return _levy_paths(plan, t, T - t, rng, size, track_peak=True)[1]
    return sample_increments(model, t, T, config, rng, size, plan)


def is_compensated(model: HazardModelSpec) -> bool:
    """True for jump-driven hazards that drift down between jumps."""
    return isinstance(model, (LevyKernel, CMY)) and model.compensated


def simulate_lambda(
    model: HazardModelSpec, t: float, T: float, config: McConfig
) -> Iterator[np.ndarray]:
    """Stream samples of Lambda_T - Lambda_t, one array per block.

    Raises:
        ConfigurationError: If the small-jump truncation is too coarse.
    """
    plan = _prepare(model, t, T, config)
    for block in range(config.n_blocks):
        rng = block_rng(config.seed, block)
        yield sample_increments(model, t, T, config, rng, config.block_length(block), plan)


# Statistics evaluated on the simulated increments; each returns (paths, columns)


def poisson_tail(lam: np.ndarray, n: int) -> np.ndarray:
    """e^{-lam} sum_{j<n} lam^j / j!, also for negative lam."""
    term = np.ones_like(lam)
    acc = np.ones_like(lam)
    for j in range(1, n):
        term = term * lam / j
        acc = acc + term
    return np.exp(-lam) * acc


def _survival_statistic(delta, rng, lambda_t: float, ns: Sequence[int]) -> np.ndarray:
    lam = lambda_t + delta
    return np.column_stack([poisson_tail(lam, n) for n in ns])


def _jump_time_statistic(peak, rng, lambda_t: float, ns: Sequence[int]) -> np.ndarray:
    # tau_n > T iff the running maximum of Lambda stays below eta_1 + ... + eta_n
    lam = lambda_t + peak
    thresholds = np.cumsum(rng.exponential(size=(len(peak), max(ns))), axis=1)
    return np.column_stack([(lam < thresholds[:, n - 1]).astype(float) for n in ns])


def _characteristic_statistic(delta, rng, lambda_t: float, us: Sequence[complex]) -> np.ndarray:
    lam = lambda_t + delta
    columns = []
    for u in us:
        value = np.exp(1j * complex(u) * lam)
        columns.extend([value.real, value.imag])
    return np.column_stack(columns)


def _increment_statistic(delta, rng) -> np.ndarray:
    return delta[:, None]


def _block_moments(block: int, model, t, T, config, plan, statistic, track_peak=False):
    rng = block_rng(config.seed, block)
    size = config.block_length(block)
    sampler = sample_peaks if track_peak else sample_increments
    delta = sampler(model, t, T, config, rng, size, plan)
    values = statistic(delta, rng)
    mean = values.mean(axis=0)
    return size, mean, ((values - mean) ** 2).sum(axis=0)


@timeit
def _estimate(
    model, t: float, T: float, config: McConfig, statistic, track_peak: bool = False
) -> Tuple[np.ndarray, np.ndarray]:
    """Means and standard errors of `statistic` over all paths.

    With `track_peak` the statistic receives the running maximum of
    Lambda_s - Lambda_t instead of the terminal increment.
    """
    plan = _prepare(model, t, T, config, track_peak)
    task = partial(
        _block_moments,
        model=model,
        t=t,
        T=T,
        config=config,
        plan=plan,
        statistic=statistic,
        track_peak=track_peak,
    )
    blocks = range(config.n_blocks)
    desc = f"{model.tag} paths"
    count, mean, m2 = 0, 0.0, 0.0
    if config.workers > 1:
        with Pool(processes=config.workers) as pool:
            for size, b_mean, b_m2 in tqdm(
                pool.imap(task, blocks), total=len(blocks), desc=desc, disable=not config.progress
            ):
                count, mean, m2 = _merge(count, mean, m2, size, b_mean, b_m2)
    else:
        for block in tqdm(blocks, desc=desc, disable=not config.progress):
            size, b_mean, b_m2 = task(block)
            count, mean, m2 = _merge(count, mean, m2, size, b_mean, b_m2)
    std_error = np.sqrt(m2 / (count - 1) / count)
    return np.asarray(mean), std_error


def _merge(count, mean, m2, size, b_mean, b_m2):
    """Pairwise update of (count, mean, sum of squared deviations)."""
    total = count + size
    diff = b_mean - mean
    return total, mean + diff * size / total, m2 + b_m2 + diff**2 * count * size / total


def _estimates(model, config: McConfig, means, errors) -> List[McEstimate]:
    digest = model_digest(model)
    return [
        McEstimate(float(m), float(e), config.n_paths, config.seed, digest)
        for m, e in zip(means, errors)
    ]


def mc_survival_many(
    model: HazardModelSpec,
    t: float,
    T: float,
    ns: Sequence[int],
    lambda_t: Optional[float] = None,
    config: Optional[McConfig] = None,
) -> List[McEstimate]:
    """`mc_survival` for several jump indices on the same paths."""
    for n in ns:
        check_jump_index(n)
    config = config or McConfig()
    lambda_t = model.accumulated_hazard if lambda_t is None else lambda_t
    statistic = partial(_survival_statistic, lambda_t=lambda_t, ns=tuple(ns))
    means, errors = _estimate(model, t, T, config, statistic)
    return _estimates(model, config, means, errors)


def mc_survival(
    model: HazardModelSpec,
    t: float,
    T: float,
    n: int,
    lambda_t: Optional[float] = None,
    config: Optional[McConfig] = None,
) -> McEstimate:
    """P(tau_n > T | F_t) averaged over simulated Lambda_T.

    Each path contributes e^{-Lambda_T} sum_{j<n} Lambda_T^j / j!.

    Args:
        model (HazardModelSpec): Hazard model.
        t (float): Conditioning time.
        T (float): Horizon.
        n (int): Jump index.
        lambda_t (float, optional): Lambda_t. Defaults to the model's
            accumulated hazard.
        config (McConfig, optional): Simulation settings.

    Returns:
        McEstimate: Estimate and standard error.
    """
    return mc_survival_many(model, t, T, [n], lambda_t, config)[0]


def mc_jump_times(
    model: HazardModelSpec, T: float, n: int, config: Optional[McConfig] = None
) -> McEstimate:
    """P(tau_n > T) from t = 0 by drawing the unit-exponential thresholds.

    A path survives when Lambda stays below eta_1 + ... + eta_n on the whole
    simulation grid: the time_step grid for CIR and IG-OU, the jump epochs for
    jump-driven hazards. For non-decreasing hazards this matches
    `mc_survival`. A compensated hazard falls between jumps, and its first
    passage probability is then below the Poisson-mixture value.
    """
    check_jump_index(n)
    config = config or McConfig()
    if is_compensated(model):
        logger.warning(
            f"{model.tag} hazard is compensated and not monotone: mc_jump_times "
            "estimates the first passage of the running maximum, which differs from mc_survival."
        )
    statistic = partial(_jump_time_statistic, lambda_t=model.accumulated_hazard, ns=(n,))
    means, errors = _estimate(model, 0.0, T, config, statistic, track_peak=True)
    return _estimates(model, config, means, errors)[0]


def mc_characteristic_function(
    model: HazardModelSpec,
    t: float,
    T: float,
    us: Sequence[complex],
    config: Optional[McConfig] = None,
) -> List[CharacteristicEstimate]:
    """Empirical E[exp(iu Lambda_T) | F_t] for each u in `us`."""
    config = config or McConfig()
    statistic = partial(_characteristic_statistic, lambda_t=model.accumulated_hazard, us=tuple(us))
    means, errors = _estimate(model, t, T, config, statistic)
    return [
        CharacteristicEstimate(
            complex(u), complex(means[2 * j], means[2 * j + 1]), float(errors[2 * j]), float(errors[2 * j + 1])
        )
        for j, u in enumerate(us)
    ]


def mc_mean_increment(
    model: HazardModelSpec, t: float, T: float, config: Optional[McConfig] = None
) -> McEstimate:
    """Sample mean of Lambda_T - Lambda_t."""
    config = config or McConfig()
    means, errors = _estimate(model, t, T, config, _increment_statistic)
    return _estimates(model, config, means, errors)[0]
