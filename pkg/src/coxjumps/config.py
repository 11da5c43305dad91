"""Run configurations.

A run configuration is a YAML or JSON document::

    {
      "model": {"type": "cmy", "C": 1, "M": 2, "Y": 0.5,
                "sigma": {"type": "constant", "value": 1}},
      "t": 0,
      "horizons": [0.5, 1],
      "jump_indices": [1, 2, 3],
      "routes": ["bell", "malliavin", "monte_carlo"],
      "mc": {"n_paths": 100000, "seed": 7, "jump_trunc_eps": 0.001},
      "assert_alive": true
    }

Errors point at the line of the offending entry.
"""

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import yaml

from coxjumps.bell import MAX_JUMPS
from coxjumps.errors import ConfigurationError, DomainError
from coxjumps.hazard_models import CIR, CMY, IGOU, LEVY_MODELS, GammaOU, HazardModelSpec, LevyKernel
from coxjumps.kernels import CmyDensity, SeparableKernel, density_from_dict, kernel_from_dict
from coxjumps.mc_oracle import McConfig

logger = logging.getLogger(__name__)

ROUTES = ("bell", "malliavin", "monte_carlo")

ConfigPath = Tuple[Union[str, int], ...]

_MODEL_FIELDS = {
    "cir": (CIR, ("theta", "kappa", "sigma", "lambda_t"), ("hazard_t",)),
    "gamma_ou": (GammaOU, ("theta", "a", "b", "lambda0"), ("hazard_t",)),
    "ig_ou": (IGOU, ("theta", "a", "b", "lambda0"), ("hazard_t",)),
}


def _missing(what: str, key: str) -> ConfigurationError:
    return ConfigurationError(f"{what} is missing required field '{key}'.")


def _check_keys(data: dict, allowed, what: str) -> None:
    if not isinstance(data, dict):
        raise ConfigurationError(f"{what} must be a mapping, got {type(data).__name__}.")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigurationError(f"{what} has unknown field(s): {', '.join(map(str, unknown))}.")


def model_from_dict(data: dict) -> HazardModelSpec:
    """Build a hazard model from its configuration mapping.

    Raises:
        ConfigurationError: On unknown types, unknown or missing fields.
        DomainError: If the parameters violate a model invariant.
    """
    if not isinstance(data, dict) or "type" not in data:
        raise _missing("model", "type")
    kind = data["type"]
    if kind in _MODEL_FIELDS:
        cls, required, optional = _MODEL_FIELDS[kind]
        _check_keys(data, ("type",) + required + optional, f"model '{kind}'")
        for key in required:
            if key not in data:
                raise _missing(f"model '{kind}'", key)
        return cls(**{k: float(data[k]) for k in required + optional if k in data})

    if kind == "cmy":
        _check_keys(data, ("type", "C", "M", "Y", "sigma", "lambda_t", "compensated"), "model 'cmy'")
        for key in ("C", "M", "Y", "sigma"):
            if key not in data:
                raise _missing("model 'cmy'", key)
        return CMY(
            C=float(data["C"]),
            M=float(data["M"]),
            Y=float(data["Y"]),
            sigma_fn=kernel_from_dict(data["sigma"]),
            lambda_t=float(data.get("lambda_t", 0.0)),
            compensated=bool(data.get("compensated", True)),
        )

    if kind == "levy_kernel":
        _check_keys(
            data,
            ("type", "sigma", "z_power", "density", "z_domain", "lambda_t", "compensated"),
            "model 'levy_kernel'",
        )
        for key in ("sigma", "density"):
            if key not in data:
                raise _missing("model 'levy_kernel'", key)
        density = density_from_dict(data["density"])
        z_domain = tuple(float(z) for z in data.get("z_domain", density.z_domain))
        if len(z_domain) != 2:
            raise ConfigurationError("z_domain must hold two values [z_lo, z_hi].")
        return LevyKernel(
            sigma_fn=SeparableKernel(kernel_from_dict(data["sigma"]), float(data.get("z_power", 1.0))),
            levy_density=density,
            z_domain=z_domain,
            lambda_t=float(data.get("lambda_t", 0.0)),
            compensated=bool(data.get("compensated", True)),
        )
    raise ConfigurationError(
        f"Unknown model type '{kind}' (expected cir, gamma_ou, ig_ou, levy_kernel or cmy)."
    )


def model_to_dict(model: HazardModelSpec) -> dict:
    """Inverse of `model_from_dict`."""
    if isinstance(model, (CIR, GammaOU, IGOU)):
        cls, required, optional = _MODEL_FIELDS[model.tag]
        return {"type": model.tag, **{k: getattr(model, k) for k in required + optional}}
    if isinstance(model, CMY):
        return {
            "type": "cmy",
            "C": model.C,
            "M": model.M,
            "Y": model.Y,
            "sigma": model.sigma_fn.to_dict(),
            "lambda_t": model.lambda_t,
            "compensated": model.compensated,
        }
    if isinstance(model.sigma_fn, SeparableKernel) and isinstance(model.levy_density, CmyDensity):
        return {
            "type": "levy_kernel",
            "sigma": model.sigma_fn.time.to_dict(),
            "z_power": model.sigma_fn.power,
            "density": model.levy_density.to_dict(),
            "z_domain": list(model.z_domain),
            "lambda_t": model.lambda_t,
            "compensated": model.compensated,
        }
    raise ConfigurationError("Only kernels and densities from the configuration vocabulary serialise.")


@dataclass
class RunConfig:
    """Parsed run configuration.

    Attributes:
        model: Hazard model.
        t: Conditioning time.
        horizons: Strictly increasing horizons T >= t.
        jump_indices: Jump indices n in [1, 32].
        routes: Subset of bell, malliavin, monte_carlo.
        mc: Monte Carlo settings, required by the monte_carlo route.
        assert_alive: The n-th jump is known not to have occurred by t.
            Defaults to False; survival output for t > 0 is then flagged.
        label: Name used in validation reports.
    """

    model: HazardModelSpec
    t: float
    horizons: List[float]
    jump_indices: List[int]
    routes: List[str] = field(default_factory=lambda: ["bell"])
    mc: Optional[McConfig] = None
    assert_alive: bool = False
    label: str = ""

    def __post_init__(self):
        if not self.horizons:
            raise ConfigurationError("horizons must not be empty.")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ConfigurationError(f"horizons must be strictly increasing, got {self.horizons}.")
        if self.horizons[0] < self.t:
            raise ConfigurationError(f"horizons must not precede t={self.t}.")
        if not self.jump_indices:
            raise ConfigurationError("jump_indices must not be empty.")
        bad = [n for n in self.jump_indices if not 1 <= n <= MAX_JUMPS]
        if bad:
            raise ConfigurationError(f"jump_indices must lie in [1, {MAX_JUMPS}], got {bad}.")
        unknown = [r for r in self.routes if r not in ROUTES]
        if unknown or not self.routes:
            raise ConfigurationError(f"routes must be a non-empty subset of {ROUTES}, got {self.routes}.")
        if "malliavin" in self.routes and not isinstance(self.model, LEVY_MODELS):
            raise ConfigurationError(
                f"route 'malliavin' needs a levy_kernel or cmy model, not {self.model.tag}."
            )
        if "monte_carlo" in self.routes and self.mc is None:
            self.mc = McConfig()

    def to_dict(self) -> dict:
        data = {
            "model": model_to_dict(self.model),
            "t": self.t,
            "horizons": list(self.horizons),
            "jump_indices": list(self.jump_indices),
            "routes": list(self.routes),
            "assert_alive": self.assert_alive,
        }
        if self.mc is not None:
            data["mc"] = self.mc.to_dict()
        if self.label:
            data["label"] = self.label
        return data

    @classmethod
    def from_dict(cls, data: dict, lines: Optional[Dict[ConfigPath, int]] = None) -> "RunConfig":
        """Validate a configuration mapping.

        Args:
            data (dict): Parsed document.
            lines (Dict[ConfigPath, int], optional): Line of each entry, used
                in error messages.

        Raises:
            ConfigurationError: With the line of the offending entry.
        """
        lines = lines or {}
        allowed = ("model", "t", "horizons", "jump_indices", "routes", "mc", "assert_alive", "label")
        with _located(lines, ()):
            _check_keys(data, allowed, "configuration")
            for key in ("model", "horizons", "jump_indices"):
                if key not in data:
                    raise _missing("configuration", key)
        with _located(lines, ("model",)):
            model = model_from_dict(data["model"])
        with _located(lines, ("mc",)):
            mc = None
            if data.get("mc") is not None:
                mc = mc_from_dict(data["mc"])
        with _located(lines, ()):
            return cls(
                model=model,
                t=float(data.get("t", 0.0)),
                horizons=[float(h) for h in _as_list(data["horizons"], "horizons")],
                jump_indices=[_as_int(n) for n in _as_list(data["jump_indices"], "jump_indices")],
                routes=list(_as_list(data.get("routes", ["bell"]), "routes")),
                mc=mc,
                assert_alive=bool(data.get("assert_alive", False)),
                label=str(data.get("label", "")),
            )


def mc_from_dict(data: dict) -> McConfig:
    """Monte Carlo settings with numeric fields coerced (YAML reads 1e5 as text)."""
    _check_keys(data, [f.name for f in fields(McConfig)], "mc")
    casts = {"n_paths": int, "seed": int, "workers": int, "block_size": int}
    values = {}
    for key, value in data.items():
        if key == "progress":
            values[key] = bool(value)
        elif key in casts:
            values[key] = int(float(value)) if not isinstance(value, int) else value
        else:
            values[key] = float(value)
    return McConfig(**values)


def _as_list(value, what: str) -> list:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    if not isinstance(value, (list, tuple)):
        raise ConfigurationError(f"{what} must be a list.")
    return list(value)


def _as_int(value) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ConfigurationError(f"jump index must be an integer, got {value!r}.")
    return int(value)


class _located:
    """Context manager re-raising configuration errors with a line number."""

    def __init__(self, lines: Dict[ConfigPath, int], path: ConfigPath):
        self.lines = lines
        self.path = path

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, ConfigurationError) and exc.line is not None:
            return False
        if isinstance(exc, (ConfigurationError, DomainError, TypeError, ValueError)):
            line = line_of(self.lines, self.path)
            where = ".".join(map(str, self.path)) or "configuration"
            prefix = f"line {line}: " if line is not None else ""
            raise ConfigurationError(f"{prefix}{where}: {exc}", line=line) from exc
        return False


def _line_index(node, path: ConfigPath = (), lines=None) -> Dict[ConfigPath, int]:
    lines = {} if lines is None else lines
    lines.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            child = path + (key_node.value,)
            lines[child] = key_node.start_mark.line + 1
            _line_index(value_node, child, lines)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _line_index(item, path + (i,), lines)
    return lines


def line_of(lines: Dict[ConfigPath, int], path: ConfigPath) -> Optional[int]:
    """Line of `path`, or of its closest recorded ancestor."""
    for cut in range(len(path), -1, -1):
        if path[:cut] in lines:
            return lines[path[:cut]]
    return None


def load_document(path: Union[str, Path]) -> Tuple[dict, Dict[ConfigPath, int]]:
    """Read a YAML/JSON document and the line of each of its entries.

    Raises:
        ConfigurationError: If the file cannot be read or parsed.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigurationError(f"Cannot read configuration {path}: {err}") from err
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigurationError(f"{path}: invalid document: {err}", line=line) from err
    if node is None or not isinstance(data, dict):
        raise ConfigurationError(f"{path}: configuration must be a mapping.", line=1)
    return data, _line_index(node)


def load_run_config(path: Union[str, Path]) -> RunConfig:
    data, lines = load_document(path)
    try:
        return RunConfig.from_dict(data, lines)
    except ConfigurationError as err:
        raise ConfigurationError(f"{path}: {err}", line=err.line) from err
