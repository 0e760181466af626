"""Strict scenario configuration."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .exponents import ExponentSet, derive_exponents
from .grid import RadialGrid
from .measures import RadialMeasure, from_components

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists ``(location, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{loc}: {msg}" for loc, msg in errors))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ExponentSpec(_Strict):
    n: int
    alpha: float
    q1: float
    q2: float

    @model_validator(mode="after")
    def _domain(self):
        derive_exponents(self.n, self.alpha, self.q1, self.q2)
        return self


class PowerSpec(_Strict):
    c: float = Field(ge=0)
    beta: float
    a: float = Field(default=0.0, ge=0)
    b: Union[Literal["inf"], float] = "inf"

    @model_validator(mode="after")
    def _order(self):
        if self.b != "inf" and not self.b > self.a:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        return self


class ShellSpec(_Strict):
    rho: float = Field(gt=0)
    m: float = Field(ge=0)


class OriginSpec(_Strict):
    m0: float = Field(ge=0)


class LacunarySpec(_Strict):
    s: float = Field(gt=0)
    levels: int = Field(ge=1, le=500)
    base: float = Field(default=2.0, gt=1)


class Component(_Strict):
    power: Optional[PowerSpec] = None
    shell: Optional[ShellSpec] = None
    origin: Optional[OriginSpec] = None
    lacunary: Optional[LacunarySpec] = None

    @model_validator(mode="after")
    def _one_kind(self):
        kinds = [k for k in ("power", "shell", "origin", "lacunary") if getattr(self, k) is not None]
        if len(kinds) != 1:
            raise ValueError(f"exactly one of power/shell/origin/lacunary per component, got {kinds or 'none'}")
        return self

    def as_dict(self) -> dict:
        return self.model_dump(exclude_none=True)


class GridSpec(_Strict):
    r_min: float = Field(default=1e-3, gt=0)
    r_max: float = 1e3
    points: int = Field(default=97, ge=8)

    @model_validator(mode="after")
    def _range(self):
        if not self.r_max > self.r_min:
            raise ValueError(f"need r_min < r_max, got {self.r_min}, {self.r_max}")
        RadialGrid.logspace(self.r_min, self.r_max, self.points)
        return self


class SolveSpec(_Strict):
    tol: float = Field(default=1e-8, gt=0)
    max_iter: int = Field(default=200, ge=1)
    kernel: Literal["comparable", "exact"] = "comparable"


class VerifySpec(_Strict):
    kappa_r: float = Field(default=0.5, gt=0)
    energy_s: float = Field(default=1.0, gt=0)
    radii: list[float] = Field(default_factory=lambda: [10.0**k for k in range(-3, 2)], min_length=1)
    centers: list[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0], min_length=1)


class SweepSpec(_Strict):
    path: str
    command: Literal["check", "solve", "verify"] = "check"
    values: Optional[list[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    step: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _points(self):
        ranged = (self.start, self.stop, self.step)
        if self.values is None and None in ranged:
            raise ValueError("give either values or start/stop/step")
        if self.values is not None and any(v is not None for v in ranged):
            raise ValueError("values and start/stop/step are exclusive")
        return self

    def points(self) -> list[float]:
        if self.values is not None:
            return list(self.values)
        count = int(round((self.stop - self.start) / self.step)) + 1
        return [round(self.start + k * self.step, 12) for k in range(count)]


class ScenarioConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    name: str = ""
    exponents: ExponentSpec
    sigma: list[Component]
    mu1: Optional[list[Component]] = None
    mu2: Optional[list[Component]] = None
    grid: GridSpec = GridSpec()
    solve: SolveSpec = SolveSpec()
    verify: VerifySpec = VerifySpec()
    limc_levels: int = Field(default=40, ge=12)
    sweep: Optional[SweepSpec] = None

    @model_validator(mode="after")
    def _measures(self):
        for name in ("sigma", "mu1", "mu2"):
            comps = getattr(self, name)
            if comps is not None:
                from_components([c.as_dict() for c in comps]).check_dimension(self.exponents.n)
        return self

    def exps(self) -> ExponentSet:
        e = self.exponents
        return derive_exponents(e.n, e.alpha, e.q1, e.q2)

    def measure(self, name: str = "sigma") -> RadialMeasure:
        comps = getattr(self, name) or []
        return from_components([c.as_dict() for c in comps])

    def radial_grid(self) -> RadialGrid:
        return RadialGrid.logspace(self.grid.r_min, self.grid.r_max, self.grid.points)

    @property
    def inhomogeneous(self) -> bool:
        return bool(self.mu1) or bool(self.mu2)


def validate_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(
            [(".".join(str(p) for p in err["loc"]) or "<root>", err["msg"]) for err in exc.errors()]
        ) from None


def parse_config(path) -> ScenarioConfig:
    return validate_config(read_config_data(path))


def read_config_data(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError([(str(path), exc.strerror or str(exc))]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([(str(path), f"not valid JSON: {exc}")]) from None
    if not isinstance(data, dict):
        raise ConfigError([(str(path), "top level must be an object")])
    return data


def config_dict(cfg: ScenarioConfig) -> dict:
    """Plain-data echo of a config, accepted back by :func:`validate_config`."""
    return cfg.model_dump(exclude_none=True)
