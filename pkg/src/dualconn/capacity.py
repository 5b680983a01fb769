"""Uplink SIR distribution and spectral efficiency for a given serving-distance law.

With Rayleigh fading and a PPP of interferers of intensity ``lambda_id``,

    P(SIR > theta | x) = exp(-pi * lambda_id * K(alpha) * theta**(2/alpha) * x**2)

and the spectral efficiency is ``(1/ln 2) * integral_0^inf P(ln(1+SIR) > t) dt``.
The transmit power cancels from the SIR, so it never enters here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate

from .association import Cell
from .distance import ConditionalDistanceDist, DegenerateRegionError, RayleighDist
from .params import NetworkParams

__all__ = [
    "interference_exponent_constant",
    "interference_exponent_quadrature",
    "InterferenceField",
    "LinkSpec",
    "CapacityResult",
    "CapacityDivergenceError",
    "sir_ccdf",
    "sir_ccdf_threshold",
    "link_capacity",
    "mean_sir_db",
    "dude_case_capacity",
    "baseline_capacity",
    "sir_gain_db",
    "DUDE_ROLES",
    "BASELINE_ROLES",
    "DECOUPLED_ROLE",
]

LN2 = math.log(2.0)
_CCDF_FLOOR = 1e-10
_SE_EPSABS = 1e-9
_INNER_EPSABS = 1e-13
_T_MAX = 512.0

#: UL serving cells of each decoupled case.
DUDE_ROLES = {
    3: (Cell.SCELL1, Cell.SCELL2),
    4: (Cell.SCELL1, Cell.SCELL2),
    5: (Cell.SCELL1, Cell.MCELL),
}

#: Serving cells of the three reference schemes inside each region.
BASELINE_ROLES = {
    "BL1": {3: (Cell.SCELL1, Cell.MCELL), 4: (Cell.MCELL, Cell.SCELL1)},
    "BL2": {3: (Cell.SCELL1,), 4: (Cell.SCELL1,), 5: (Cell.SCELL1,)},
    "BL3": {3: (Cell.SCELL1, Cell.SCELL1), 4: (Cell.MCELL, Cell.MCELL), 5: (Cell.MCELL, Cell.MCELL)},
}

#: The UL link that departs from the DL ranking, compared against the MCell link.
DECOUPLED_ROLE = {3: Cell.SCELL2, 4: Cell.SCELL1, 5: Cell.SCELL1}


class CapacityDivergenceError(RuntimeError):
    """The SIR tail did not decay inside the integration range."""


def interference_exponent_constant(alpha: float) -> float:
    """``integral_0^inf dv / (1 + v**(alpha/2))`` in closed form."""
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2 for a finite interference integral, got {alpha}")
    return 2.0 * math.pi / (alpha * math.sin(2.0 * math.pi / alpha))


def interference_exponent_quadrature(alpha: float, epsabs: float = 1e-12) -> tuple:
    """Same integral by adaptive quadrature; returns ``(value, abs error)``."""
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2 for a finite interference integral, got {alpha}")
    h = alpha / 2.0
    # split at 1 and map the tail through v -> 1/u to keep both pieces finite
    head, e1 = integrate.quad(lambda v: 1.0 / (1.0 + v**h), 0.0, 1.0, epsabs=epsabs, epsrel=1e-13)
    tail, e2 = integrate.quad(lambda u: u ** (h - 2.0) / (u**h + 1.0), 0.0, 1.0, epsabs=epsabs, epsrel=1e-13, limit=200)
    return head + tail, e1 + e2


@dataclass(frozen=True)
class InterferenceField:
    intensity_id: float
    alpha: float

    def __post_init__(self):
        if not (self.intensity_id > 0 and math.isfinite(self.intensity_id)):
            raise ValueError(f"interferer intensity must be positive, got {self.intensity_id}")
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")

    @classmethod
    def from_params(cls, params: NetworkParams) -> "InterferenceField":
        # one interfering user per cell
        return cls(params.lambda_m + params.lambda_s, params.alpha)

    def scaled(self, factor: float) -> "InterferenceField":
        return InterferenceField(self.intensity_id * factor, self.alpha)

    def rate(self, theta):
        """Per-area exponent ``lambda_id * K(alpha) * theta**(2/alpha)``."""
        return self.intensity_id * interference_exponent_constant(self.alpha) * np.power(theta, 2.0 / self.alpha)


DistanceLaw = Union[ConditionalDistanceDist, RayleighDist]


@dataclass(frozen=True)
class LinkSpec:
    distance_dist: DistanceLaw
    field: InterferenceField
    bandwidth_hz: float = 20e6

    def __post_init__(self):
        params = getattr(self.distance_dist, "params", None)
        if params is not None and params.alpha != self.field.alpha:
            raise ValueError(f"alpha mismatch: distance law {params.alpha}, interference {self.field.alpha}")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth must be positive")

    @classmethod
    def for_role(cls, case_id: int, role: Cell, params: NetworkParams) -> "LinkSpec":
        return cls(
            ConditionalDistanceDist(case_id, role, params),
            InterferenceField.from_params(params),
            params.bandwidth_hz,
        )


@dataclass(frozen=True)
class CapacityResult:
    capacity_bps: float
    spectral_efficiency: float
    quadrature_abs_err: float
    per_link: tuple
    labels: tuple = ()

    def __post_init__(self):
        if self.spectral_efficiency < 0 or any(v < 0 for v in self.per_link):
            raise ValueError("spectral efficiency must be nonnegative")


def _cutoff(law) -> float:
    if isinstance(law, RayleighDist):
        return math.sqrt(math.log(1e16) / (math.pi * law.intensity))
    return law.support_cutoff


def _laplace(law, c: float, complement: bool = False) -> float:
    """``integral f(x) exp(-pi c x^2) dx``, or one minus it when ``complement``."""
    terms = law.terms
    two_pi = 2.0 * math.pi

    if complement:
        def g(x):
            s = 0.0
            damp = -math.expm1(-math.pi * c * x * x)
            for w, k in terms:
                s += w * two_pi * x * math.exp(-math.pi * k * x * x)
            return s * damp
    else:
        def g(x):
            s = 0.0
            for w, k in terms:
                s += w * two_pi * x * math.exp(-math.pi * (k + c) * x * x)
            return s

    upper = _cutoff(law)
    if not complement and c > 0:
        # the integrand is negligible past the combined decay length
        upper = min(upper, math.sqrt(math.log(1e16) / (math.pi * (law.rate_min + c))))
    val, _ = integrate.quad(g, 0.0, upper, epsabs=_INNER_EPSABS, epsrel=1e-12, limit=200)
    return min(max(val, 0.0), 1.0)


def sir_ccdf_threshold(theta: float, link: LinkSpec) -> float:
    """``P(SIR > theta)`` for the link's distance law and interference field."""
    if theta < 0:
        raise ValueError("SIR threshold must be nonnegative")
    if theta == 0:
        return 1.0
    return _laplace(link.distance_dist, float(link.field.rate(theta)))


def sir_ccdf(t: float, link: LinkSpec) -> float:
    """``P(ln(1 + SIR) > t)``; exactly 1 at ``t = 0``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 1.0
    return sir_ccdf_threshold(math.expm1(t), link)


def _truncation_point(link: LinkSpec) -> float:
    t = 1.0
    while t <= _T_MAX:
        if sir_ccdf(t, link) < _CCDF_FLOOR:
            return t
        t *= 2.0
    raise CapacityDivergenceError(
        f"P(ln(1+SIR) > t) is still {sir_ccdf(_T_MAX, link):.3g} at t = {_T_MAX}; "
        "the capacity integral has not decayed"
    )


def _link_se(link: LinkSpec) -> tuple:
    t_star = _truncation_point(link)
    val, err = integrate.quad(lambda t: sir_ccdf(t, link), 0.0, t_star, epsabs=_SE_EPSABS * LN2, epsrel=1e-10, limit=200)
    return val / LN2, err / LN2


def link_capacity(link: LinkSpec) -> CapacityResult:
    se, err = _link_se(link)
    return CapacityResult(se * link.bandwidth_hz, se, err, (se,))


def mean_sir_db(link: LinkSpec) -> float:
    """``E[10 log10 SIR]`` from the SIR distribution.

    Uses ``E[Y] = int_0^inf P(Y > y) dy - int_-inf^0 P(Y < y) dy``.
    """
    law = link.distance_dist

    def upper(y):
        return _laplace(law, float(link.field.rate(10.0 ** (min(y, 3000.0) / 10.0))))

    def lower(y):
        return _laplace(law, float(link.field.rate(10.0 ** (y / 10.0))), complement=True)

    pos, _ = integrate.quad(upper, 0.0, np.inf, epsabs=1e-10, epsrel=1e-10, limit=200)
    neg, _ = integrate.quad(lower, -np.inf, 0.0, epsabs=1e-10, epsrel=1e-10, limit=200)
    return pos - neg


def _compose(roles, case_id: int, params: NetworkParams) -> CapacityResult:
    cache = {}
    per_link, errs = [], []
    for role in roles:
        if role not in cache:
            cache[role] = _link_se(LinkSpec.for_role(case_id, role, params))
        se, err = cache[role]
        per_link.append(se)
        errs.append(err)
    total = math.fsum(per_link)
    return CapacityResult(
        total * params.bandwidth_hz, total, math.fsum(errs), tuple(per_link), tuple(r.label for r in roles)
    )


def dude_case_capacity(case_id: int, params: NetworkParams) -> CapacityResult:
    """Two decoupled UL links of the case; the aggregate is their sum."""
    if case_id not in DUDE_ROLES:
        raise ValueError(f"case {case_id} is not a decoupled case (expected 3, 4 or 5)")
    return _compose(DUDE_ROLES[case_id], case_id, params)


def baseline_capacity(baseline: str, case_id: int, params: NetworkParams) -> CapacityResult:
    """BL1 coupled dual connectivity, BL2 one decoupled link, BL3 both links to the DL-best cell."""
    table = BASELINE_ROLES.get(baseline)
    if table is None:
        raise ValueError(f"unknown baseline {baseline!r}; expected one of {sorted(BASELINE_ROLES)}")
    if case_id not in table:
        raise ValueError(f"{baseline} is not defined for case {case_id}")
    return _compose(table[case_id], case_id, params)


def sir_gain_db(case_id: int, params: NetworkParams) -> float:
    """Mean SIR (dB) of the decoupled link minus that of the MCell link, same region."""
    if case_id not in DECOUPLED_ROLE:
        raise ValueError(f"case {case_id} is not a decoupled case (expected 3, 4 or 5)")
    if params.eta <= 1.0:
        raise DegenerateRegionError("SIR gain is undefined when eta = 1; the decoupled regions are empty")
    gained = mean_sir_db(LinkSpec.for_role(case_id, DECOUPLED_ROLE[case_id], params))
    reference = mean_sir_db(LinkSpec.for_role(case_id, Cell.MCELL, params))
    return gained - reference
