"""Strict experiment configuration (YAML or JSON) with dotted-key overrides."""

import copy
import hashlib
import json
import re
from pathlib import Path
from typing import Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .spectral import GridSpec, ScalarField
from .solvers import StepPolicy
from .state import ParamSet

class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads ``1e3``-style literals as floats (YAML 1.2 behaviour)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def load_yaml(text):
    return yaml.load(text, Loader=_Loader)


EXPERIMENTS = ("convergence_lambda", "preparedness_sweep", "benchmark_cost", "toy_demo", "single_run")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True, validate_assignment=True)


class GridConfig(_Strict):
    domain_length: float = Field(2.0 * np.pi, gt=0)
    n_points: int = Field(256, ge=8)

    @field_validator("n_points")
    @classmethod
    def _even(cls, v):
        if v % 2:
            raise ValueError("n_points must be even")
        return v

    def build(self):
        return GridSpec(self.domain_length, self.n_points)


class ParamsConfig(_Strict):
    lam: float = Field(1.0e3, gt=0)
    mu: float = Field(0.1, gt=0)
    nu: float = Field(1.0, gt=0)
    h_star: float = Field(0.1, gt=0)
    lam_sweep: list[float] = Field(default_factory=lambda: [1.0e3, 1.0e4, 1.0e5], min_length=1)

    @field_validator("lam_sweep")
    @classmethod
    def _positive(cls, v):
        if any(not x > 0 for x in v):
            raise ValueError("lam_sweep entries must be positive")
        return v

    def build(self, lam=None):
        return ParamSet(lam=self.lam if lam is None else lam, mu=self.mu, nu=self.nu, h_star=self.h_star)


class InitialDataConfig(_Strict):
    family: Literal["sine_wave", "traveling_sine", "gaussian_hump", "rest"] = "sine_wave"
    amplitude: float = 0.1
    wavenumber: int = Field(1, ge=1)
    width: float = Field(0.5, gt=0)

    def build(self, grid):
        """``(zeta0, u0)`` on ``grid``."""
        x = grid.x
        L = grid.domain_length
        a = self.amplitude
        kx = 2.0 * np.pi * self.wavenumber * x / L
        zero = np.zeros_like(x)
        if self.family == "rest":
            z, u = zero, zero
        elif self.family == "sine_wave":
            z, u = a * np.sin(kx), zero
        elif self.family == "traveling_sine":
            z, u = a * np.sin(kx), a * np.sin(kx)
        else:
            # Smooth periodic bump centred at L/2.
            s = np.sin(np.pi * (x - 0.5 * L) / L)
            z, u = a * np.exp(-(s**2) / self.width**2), zero
        return ScalarField(grid, z), ScalarField(grid, u)


class PolicyConfig(_Strict):
    scheme: Literal["rk4_explicit", "strang_split"] = "strang_split"
    cfl_number: float = Field(0.5, gt=0, le=1)
    stiff_safety: float = Field(0.5, gt=0)
    t_end: float = Field(1.0, ge=0)
    snapshot_interval: float | None = Field(None, gt=0)
    fixed_dt: float | None = Field(None, gt=0)

    def build(self, **changes):
        kw = self.model_dump()
        kw.update(changes)
        return StepPolicy(**kw)


class ReferenceConfig(_Strict):
    """Reference solution for the convergence study; ``system="fg"`` is a harness self-check (error identically 0)."""

    system: Literal["gn", "fg"] = "gn"
    cfl_number: float = Field(0.1, gt=0, le=1)


class ToyConfig(_Strict):
    models: list[Literal["transport", "oscillator", "combined"]] = Field(
        default_factory=lambda: ["transport", "oscillator", "combined"], min_length=1
    )
    epsilon: float = Field(0.01, gt=0)
    delta: float = Field(0.2, gt=0, lt=1)
    mu_values: list[float] = Field(default_factory=lambda: [1.0, 0.1, 0.01], min_length=1)
    m_values: list[int] = Field(default_factory=lambda: [1, 2], min_length=1)
    n_times: int = Field(101, ge=2)


class BenchmarkConfig(_Strict):
    n_steps: int = Field(20, ge=1)
    repeats: int = Field(3, ge=1)


class ExperimentConfig(_Strict):
    experiment: Literal[EXPERIMENTS]
    grid: GridConfig = Field(default_factory=GridConfig)
    params: ParamsConfig = Field(default_factory=ParamsConfig)
    initial_data: InitialDataConfig = Field(default_factory=InitialDataConfig)
    prep_order: int = Field(2, ge=0, le=2)
    prep_orders: list[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    system: Literal["fg", "gn"] = "fg"
    policy: PolicyConfig = Field(default_factory=PolicyConfig)
    reference: ReferenceConfig = Field(default_factory=ReferenceConfig)
    toy: ToyConfig = Field(default_factory=ToyConfig)
    benchmark: BenchmarkConfig = Field(default_factory=BenchmarkConfig)
    output_dir: str = "results"
    save_snapshots: bool = False

    @field_validator("prep_orders")
    @classmethod
    def _orders(cls, v):
        if any(m not in (0, 1, 2) for m in v):
            raise ValueError("prep_orders entries must be 0, 1 or 2")
        return v

    @model_validator(mode="after")
    def _depth_floor(self):
        grid = self.grid.build()
        zeta0, _ = self.initial_data.build(grid)
        if 1.0 + zeta0.min() < self.params.h_star:
            raise ValueError(
                f"initial_data.amplitude={self.initial_data.amplitude} violates the depth floor "
                f"h_star={self.params.h_star}"
            )
        return self

    def config_hash(self):
        blob = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _format_errors(err):
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        if e["type"] == "extra_forbidden":
            lines.append(f"{loc}: unknown key")
        elif e["type"] == "missing":
            lines.append(f"{loc}: missing required key")
        else:
            lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def _set_dotted(data, key, value):
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = node[part] = {}
        elif not isinstance(nxt, dict):
            raise ConfigError(f"{key}: cannot descend into non-mapping {part!r}")
        node = nxt
    node[parts[-1]] = value


def apply_overrides(data, overrides):
    """Apply ``key.sub=value`` strings; values are parsed as YAML scalars/lists."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"override {item!r} has an empty key")
        _set_dotted(data, key, load_yaml(raw))
    return data


def config_from_dict(data, overrides=None):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>: config must be a mapping")
    data = apply_overrides(data, overrides)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def parse_config(path, overrides=None):
    """Read a YAML/JSON config file; unknown or mistyped keys raise :class:`ConfigError`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    try:
        data = load_yaml(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: malformed YAML/JSON: {err}") from None
    return config_from_dict(data, overrides)
