"""Deterministic kernels and Levy densities.

Time kernels sigma(s), separable jump kernels sigma(s, z) = sigma(s) * z**p
and the CMY (tempered stable) Levy density. All of them are frozen
dataclasses: hashable, picklable for Monte Carlo workers, and serialisable
to the dictionaries used in run configurations.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from coxjumps.errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

# Tail cut of the CMY density: e^{-M z} below this value is dropped
TAIL_EPS = 1e-16


@dataclass(frozen=True)
class ConstantKernel:
    """sigma(s) = value."""

    value: float

    def __call__(self, s):
        if np.ndim(s):
            return np.full(np.shape(s), float(self.value))
        return float(self.value)

    def sup_abs(self, t: float, T: float) -> float:
        return abs(self.value)

    def breakpoints(self) -> Tuple[float, ...]:
        return ()

    def to_dict(self) -> dict:
        return {"type": "constant", "value": self.value}


@dataclass(frozen=True)
class ExponentialKernel:
    """sigma(s) = value * exp(-alpha * s)."""

    value: float
    alpha: float

    def __call__(self, s):
        if np.ndim(s):
            return self.value * np.exp(-self.alpha * np.asarray(s, dtype=float))
        return self.value * math.exp(-self.alpha * s)

    def sup_abs(self, t: float, T: float) -> float:
        return abs(self.value) * max(math.exp(-self.alpha * t), math.exp(-self.alpha * T))

    def breakpoints(self) -> Tuple[float, ...]:
        return ()

    def to_dict(self) -> dict:
        return {"type": "exponential", "value": self.value, "alpha": self.alpha}


@dataclass(frozen=True)
class PiecewiseKernel:
    """Piecewise-constant sigma(s).

    `values[i]` holds on [breakpoints[i-1], breakpoints[i]) with the first
    value extending to -inf and the last one to +inf, so
    len(values) == len(breakpoints) + 1.
    """

    edges: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.edges) + 1:
            raise DomainError("Piecewise kernel needs one more value than breakpoints.")
        if any(b >= c for b, c in zip(self.edges, self.edges[1:])):
            raise DomainError("Piecewise kernel breakpoints must be strictly increasing.")

    def __call__(self, s):
        idx = np.searchsorted(self.edges, s, side="right")
        out = np.asarray(self.values, dtype=float)[idx]
        return out if np.ndim(s) else float(out)

    def sup_abs(self, t: float, T: float) -> float:
        lo = np.searchsorted(self.edges, t, side="right")
        hi = np.searchsorted(self.edges, T, side="right")
        return float(np.max(np.abs(self.values[lo : hi + 1])))

    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(self.edges)

    def to_dict(self) -> dict:
        return {
            "type": "piecewise",
            "breakpoints": list(self.edges),
            "values": list(self.values),
        }


TimeKernel = Union[ConstantKernel, ExponentialKernel, PiecewiseKernel]


@dataclass(frozen=True)
class SeparableKernel:
    """Jump kernel sigma(s, z) = time(s) * z**power."""

    time: TimeKernel
    power: float = 1.0

    def __call__(self, s, z):
        return self.time(s) * np.power(z, self.power)

    def breakpoints(self) -> Tuple[float, ...]:
        return self.time.breakpoints()

    def to_dict(self) -> dict:
        return {"time": self.time.to_dict(), "power": self.power}


@dataclass(frozen=True)
class CmyDensity:
    """CMY Levy density nu(z) = C exp(-M z) z^(-1-Y) on z > 0."""

    C: float
    M: float
    Y: float

    def __post_init__(self):
        if not (self.C > 0 and self.M > 0):
            raise DomainError(f"CMY density needs C > 0 and M > 0, got C={self.C}, M={self.M}.")
        if not self.Y < 1:
            raise DomainError(f"CMY density needs Y < 1, got Y={self.Y}.")

    def __call__(self, z):
        return self.C * np.exp(-self.M * z) * np.power(z, -1.0 - self.Y)

    @property
    def z_domain(self) -> Tuple[float, float]:
        return (0.0, -math.log(TAIL_EPS) / self.M)

    def to_dict(self) -> dict:
        return {"type": "cmy", "C": self.C, "M": self.M, "Y": self.Y}


def kernel_from_dict(data: dict) -> TimeKernel:
    """Build a time kernel from its configuration dictionary.

    Raises:
        ConfigurationError: On unknown types or missing fields.
    """
    kind = data.get("type") if isinstance(data, dict) else None
    try:
        if kind == "constant":
            return ConstantKernel(float(data["value"]))
        if kind == "exponential":
            return ExponentialKernel(float(data["value"]), float(data["alpha"]))
        if kind == "piecewise":
            return PiecewiseKernel(
                tuple(float(b) for b in data["breakpoints"]),
                tuple(float(v) for v in data["values"]),
            )
    except KeyError as err:
        raise ConfigurationError(f"Kernel '{kind}' is missing field {err}.") from err
    raise ConfigurationError(
        f"Unknown kernel type '{kind}' (expected constant, exponential or piecewise)."
    )


def density_from_dict(data: dict) -> CmyDensity:
    """Build a Levy density ('cmy' or 'gamma') from its configuration dictionary."""
    kind = data.get("type") if isinstance(data, dict) else None
    try:
        if kind == "cmy":
            return CmyDensity(float(data["C"]), float(data["M"]), float(data["Y"]))
        if kind == "gamma":
            return CmyDensity(float(data["C"]), float(data["M"]), 0.0)
    except KeyError as err:
        raise ConfigurationError(f"Density '{kind}' is missing field {err}.") from err
    raise ConfigurationError(f"Unknown Levy density type '{kind}' (expected cmy or gamma).")
