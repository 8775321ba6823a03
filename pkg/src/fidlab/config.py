"""Run configuration: named tolerances, seed and budgets.

Configuration is a single flat JSON object. Values are resolved in the
order: compiled-in defaults, the file named by ``FIDLAB_CONFIG`` (or an
explicit path), then keyword overrides.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import ParseError, ValidationError

ENV_VAR = "FIDLAB_CONFIG"

DEFAULT_TOLERANCES: dict[str, float] = {
    "psd_tol": 1e-10,
    "trace_tol": 1e-9,
    "sqrt_tol": 1e-9,
    "tp_tol": 1e-10,
    "opt_tol": 1e-6,
    "margin_tol": 1e-9,
    "metric_tol": 1e-10,
    "classify_tol": 1e-8,
    "y_floor": 1e-12,
    "var_epsilon": 1e-8,
}


@dataclass(frozen=True)
class RunConfig:
    tolerances: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    max_iterations: int = 500
    car_max_level: int = 10
    n_contractions: int = 64

    def __post_init__(self):
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances)
        for name, value in merged.items():
            if not (isinstance(value, (int, float)) and value > 0):
                raise ValidationError(
                    f"tolerance {name!r} must be a positive number, got {value!r}")
        object.__setattr__(self, "tolerances", merged)
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not 1 <= self.car_max_level <= 14:
            raise ValidationError("car_max_level must lie in [1, 14]")
        if self.n_contractions < 1:
            raise ValidationError("n_contractions must be >= 1")

    def __getattr__(self, name: str) -> float:
        # tolerances double as attributes: cfg.psd_tol
        tolerances = self.__dict__.get("tolerances", {})
        if name in tolerances:
            return tolerances[name]
        raise AttributeError(name)

    def replace(self, **overrides: Any) -> "RunConfig":
        return from_mapping({**self.to_dict(), **overrides})

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = dict(self.tolerances)
        out.update(seed=self.seed, max_iterations=self.max_iterations,
                   car_max_level=self.car_max_level,
                   n_contractions=self.n_contractions)
        return out


_SCALAR_FIELDS = {f.name for f in dataclasses.fields(RunConfig)} - {"tolerances"}


def from_mapping(values: Mapping[str, Any]) -> RunConfig:
    """Build a config from one flat mapping of tolerance names and fields."""
    tolerances = {}
    scalars = {}
    for key, value in values.items():
        if key in _SCALAR_FIELDS:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValidationError(f"config field {key!r} must be an integer")
            scalars[key] = value
        elif key in DEFAULT_TOLERANCES:
            tolerances[key] = value
        else:
            raise ValidationError(f"unknown config key {key!r}")
    return RunConfig(tolerances=tolerances, **scalars)


def load(path: str | os.PathLike | None = None, **overrides: Any) -> RunConfig:
    """Load configuration from *path* or ``$FIDLAB_CONFIG``, then apply overrides."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    values: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read config {os.fspath(path)!r}: {exc}") from exc
        if not isinstance(values, dict):
            raise ParseError("config file must hold a flat JSON object")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return from_mapping(values)
