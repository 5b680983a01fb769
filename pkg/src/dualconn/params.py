"""Model constants for the two-tier uplink/downlink association model.

All powers are carried in dBm and converted to milliwatts once, on first
access. Intensities are per square meter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from functools import cached_property

import numpy as np

__all__ = [
    "NetworkParams",
    "ParameterError",
    "IntensityError",
    "PowerOrderingError",
    "PathLossExponentError",
    "CompensationFactorError",
    "WindowError",
    "NonFiniteError",
    "dbm_to_linear",
    "linear_to_dbm",
    "eta",
    "eta_from_powers",
    "validate",
]

# Evaluation settings used for the reference figures.
REFERENCE_LAMBDA_M = 1.47e-5
REFERENCE_LAMBDA_D = 0.037


class ParameterError(ValueError):
    """A model constant violates one of its invariants."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class IntensityError(ParameterError):
    pass


class PowerOrderingError(ParameterError):
    pass


class PathLossExponentError(ParameterError):
    pass


class CompensationFactorError(ParameterError):
    pass


class WindowError(ParameterError):
    pass


class NonFiniteError(ParameterError):
    pass


def dbm_to_linear(p_dbm):
    """Convert dBm to milliwatts. Works elementwise on arrays."""
    return 10.0 ** (p_dbm / 10.0)


def linear_to_dbm(p_mw):
    return 10.0 * np.log10(p_mw)


@dataclass(frozen=True)
class NetworkParams:
    """Densities, powers and propagation constants of the network.

    Instances are validated on construction and immutable afterwards, so a
    single object can be shared freely between workers.
    """

    lambda_m: float
    lambda_s: float
    lambda_d: float = REFERENCE_LAMBDA_D
    p_m_dbm: float = 43.0
    p_s_dbm: float = 30.0
    p_d_dbm: float = 23.0
    p0_dbm: float = 23.0  # carried only; unused while gamma == 0
    gamma: float = 0.0
    alpha: float = 4.0
    bandwidth_hz: float = 20e6
    window_side_m: float = 1650.0

    def __post_init__(self):
        validate(self)

    @classmethod
    def reference(cls, lambda_s_ratio: float = 5.0, **overrides) -> "NetworkParams":
        """Reference parameterization; ``lambda_s`` is set from the SCell/MCell ratio."""
        lambda_m = overrides.pop("lambda_m", REFERENCE_LAMBDA_M)
        return cls(lambda_m=lambda_m, lambda_s=lambda_s_ratio * lambda_m, **overrides)

    @property
    def lambda_s_ratio(self) -> float:
        return self.lambda_s / self.lambda_m

    @cached_property
    def p_m_mw(self) -> float:
        return dbm_to_linear(self.p_m_dbm)

    @cached_property
    def p_s_mw(self) -> float:
        return dbm_to_linear(self.p_s_dbm)

    @cached_property
    def p_d_mw(self) -> float:
        return dbm_to_linear(self.p_d_dbm)

    @cached_property
    def eta(self) -> float:
        return eta_from_powers(self.p_m_dbm, self.p_s_dbm, self.alpha)

    @property
    def root_eta(self) -> float:
        """Distance scaling (P_m/P_s)^(1/alpha) between UL and DL rankings."""
        return math.sqrt(self.eta)

    def with_updates(self, **changes) -> "NetworkParams":
        """Copy with some fields replaced; ``lambda_s_ratio`` is accepted as a key."""
        ratio = changes.pop("lambda_s_ratio", None)
        if ratio is not None:
            changes["lambda_s"] = ratio * changes.get("lambda_m", self.lambda_m)
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate(params: NetworkParams) -> NetworkParams:
    """Check every invariant; raise a field-named :class:`ParameterError` subclass."""
    for f in fields(params):
        value = getattr(params, f.name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise NonFiniteError(f.name, f"must be a finite number, got {value!r}")
    for name in ("lambda_m", "lambda_s", "lambda_d"):
        if getattr(params, name) <= 0:
            raise IntensityError(name, f"intensity must be positive, got {getattr(params, name)}")
    if not params.p_d_dbm < params.p_s_dbm:
        raise PowerOrderingError(
            "p_d_dbm", f"UE power {params.p_d_dbm} dBm must be below SCell power {params.p_s_dbm} dBm"
        )
    # equality is the degenerate eta == 1 configuration; it empties the decoupled cases
    if not params.p_s_dbm <= params.p_m_dbm:
        raise PowerOrderingError(
            "p_s_dbm", f"SCell power {params.p_s_dbm} dBm must not exceed MCell power {params.p_m_dbm} dBm"
        )
    if not params.alpha > 2:
        raise PathLossExponentError("alpha", f"path-loss exponent must exceed 2, got {params.alpha}")
    if params.gamma != 0:
        raise CompensationFactorError(
            "gamma", "fractional path-loss compensation is not modeled; gamma must be 0"
        )
    if params.window_side_m <= 0:
        raise WindowError("window_side_m", f"window side must be positive, got {params.window_side_m}")
    if params.bandwidth_hz <= 0:
        raise ParameterError("bandwidth_hz", f"bandwidth must be positive, got {params.bandwidth_hz}")
    return params


def eta_from_powers(p_m_dbm: float, p_s_dbm: float, alpha: float) -> float:
    return (dbm_to_linear(p_m_dbm) / dbm_to_linear(p_s_dbm)) ** (2.0 / alpha)


def eta(params: NetworkParams) -> float:
    """Power-imbalance constant (P_m/P_s)^(2/alpha), powers in linear scale."""
    return params.eta
