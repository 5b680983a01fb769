"""Experiment configuration: flat ``key = value`` files plus command-line overrides."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .params import NetworkParams, ParameterError

__all__ = ["ConfigError", "Sweep", "ExperimentConfig", "parse_config_text", "load_config_file", "parse_sweep"]

SWEEPABLE = ("lambda_s_ratio", "p_s_dbm", "alpha")
MIN_SAMPLES = 10**4
_PARAM_KEYS = {f.name for f in fields(NetworkParams)}
_RUN_KEYS = {"samples", "seed", "out", "format", "workers", "sweep", "lambda_s_ratio"}


class ConfigError(ValueError):
    """Malformed or out-of-range experiment configuration."""


@dataclass(frozen=True)
class Sweep:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ConfigError(f"sweep parameter must be one of {SWEEPABLE}, got {self.name!r}")
        if not self.values:
            raise ConfigError("sweep has no values")


def parse_sweep(text: str) -> Sweep:
    """``name=start:stop:steps`` with ``steps`` evenly spaced points, both ends included."""
    try:
        name, rng = text.split("=", 1)
        start, stop, steps = rng.split(":")
        start, stop, steps = float(start), float(stop), int(steps)
    except ValueError:
        raise ConfigError(f"sweep must look like name=start:stop:steps, got {text!r}") from None
    if steps < 1:
        raise ConfigError("sweep needs at least one step")
    return Sweep(name.strip(), tuple(float(v) for v in np.linspace(start, stop, steps)))


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARAM_KEYS and key not in _RUN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config_file(path) -> dict:
    try:
        return parse_config_text(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None


def _number(key, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    return v


def _integer(key, value):
    v = _number(key, value)
    if v != int(v):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return int(v)


@dataclass(frozen=True)
class ExperimentConfig:
    params: NetworkParams = field(default_factory=NetworkParams.reference)
    sweep: Sweep | None = None
    samples: int = 10**5
    seed: int = 0
    out: Path = Path("out")
    format: str = "csv"
    workers: int = 1
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples < MIN_SAMPLES:
            raise ConfigError(f"samples must be at least {MIN_SAMPLES}, got {self.samples}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.format != "csv":
            raise ConfigError(f"only the csv output format is supported, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @classmethod
    def build(cls, file_values: dict | None = None, overrides: dict | None = None) -> "ExperimentConfig":
        """Merge file values and overrides (overrides win) into a validated config.

        Parameter errors propagate as :class:`ParameterError`.
        """
        merged = dict(file_values or {})
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        param_kw = {}
        for key in _PARAM_KEYS:
            if key in merged:
                param_kw[key] = _number(key, merged[key])
        ratio = _number("lambda_s_ratio", merged["lambda_s_ratio"]) if "lambda_s_ratio" in merged else None
        if "lambda_s" in param_kw and ratio is not None:
            raise ConfigError("give either lambda_s or lambda_s_ratio, not both")
        if "lambda_s" not in param_kw:
            param_kw["lambda_s"] = (5.0 if ratio is None else ratio) * param_kw.get(
                "lambda_m", NetworkParams.reference().lambda_m
            )
        param_kw.setdefault("lambda_m", NetworkParams.reference().lambda_m)
        params = NetworkParams(**param_kw)
        run = {}
        if "samples" in merged:
            run["samples"] = _integer("samples", merged["samples"])
        if "seed" in merged:
            run["seed"] = _integer("seed", merged["seed"])
        if "workers" in merged:
            run["workers"] = _integer("workers", merged["workers"])
        if "out" in merged:
            run["out"] = Path(merged["out"])
        if "format" in merged:
            run["format"] = str(merged["format"])
        if "tolerances" in merged:
            run["tolerances"] = dict(merged["tolerances"])
        sweep = merged.get("sweep")
        if isinstance(sweep, str):
            sweep = parse_sweep(sweep)
        return cls(params=params, sweep=sweep, **run)

    def points(self, default: Sweep | None = None):
        """``(sweep value, params)`` pairs; a single point when nothing is swept."""
        sweep = self.sweep or default
        if sweep is None:
            return [(self.params.lambda_s_ratio, self.params)]
        out = []
        for v in sweep.values:
            try:
                out.append((v, self.params.with_updates(**{sweep.name: v})))
            except ParameterError as exc:
                raise ConfigError(f"sweep value {sweep.name}={v}: {exc}") from None
        return out

    def provenance(self) -> dict:
        return {
            "seed": self.seed,
            "samples": self.samples,
            "sweep": f"{self.sweep.name}={list(self.sweep.values)}" if self.sweep else "none",
            **{f"param.{k}": v for k, v in self.params.as_dict().items()},
        }
