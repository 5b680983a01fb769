"""Distance laws: the Rayleigh nearest-point law and the conditional laws of
the serving distances inside the decoupled association regions.

Every conditional density here is a finite signed mixture

    f(x) = sum_i w_i * 2*pi*x * exp(-pi * k_i * x**2)

whose weights ``w_i`` already include the normalizing ``2 / P_case``. Each
term integrates to ``w_i / k_i``, which makes normalization, means and the
SIR Laplace integral available term by term.

The SCell 1 role is the nearer of the two SCells and SCell 2 the farther,
in both mirror subcases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .association import Cell, case_of_codes, case_probability, classify_array
from .params import NetworkParams
from .streams import as_generator

__all__ = [
    "RayleighDist",
    "ConditionalDistanceDist",
    "UndefinedRoleError",
    "DegenerateRegionError",
    "DEFINED_PAIRS",
    "rayleigh_pdf",
    "rayleigh_cdf",
    "rayleigh_quantile",
    "rayleigh_sample",
    "conditional_pdf",
    "conditional_cdf",
    "sample_conditional",
    "sample_case_distances",
    "RejectionSample",
]

DEFINED_PAIRS = (
    (3, Cell.SCELL1),
    (3, Cell.SCELL2),
    (3, Cell.MCELL),
    (4, Cell.SCELL1),
    (4, Cell.SCELL2),
    (4, Cell.MCELL),
    (5, Cell.SCELL1),
    (5, Cell.MCELL),
)

_CDF_EPSABS = 1e-9
_CDF_EPSREL = 1e-11
_TAIL_LOG = math.log(1e16)


class UndefinedRoleError(ValueError):
    pass


class DegenerateRegionError(ValueError):
    """The association region has probability zero, so no conditional law exists."""


def _check_x(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("distance must be nonnegative")
    return x


def _mixture_pdf(terms, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for w, k in terms:
        out += w * 2.0 * np.pi * x * np.exp(-np.pi * k * x * x)
    return out


@dataclass(frozen=True)
class RayleighDist:
    """Distance from the origin to the nearest point of a PPP of intensity ``intensity``."""

    intensity: float

    def __post_init__(self):
        if not (self.intensity > 0 and math.isfinite(self.intensity)):
            raise ValueError(f"intensity must be positive and finite, got {self.intensity}")

    @property
    def terms(self):
        return ((self.intensity, self.intensity),)

    @property
    def rate_min(self) -> float:
        return self.intensity

    def pdf(self, x):
        x = _check_x(x)
        lam = self.intensity
        return 2.0 * np.pi * lam * x * np.exp(-np.pi * lam * x * x)

    def cdf(self, x):
        x = _check_x(x)
        return -np.expm1(-np.pi * self.intensity * x * x)

    def quantile(self, u):
        u = np.asarray(u, dtype=np.float64)
        if np.any((u <= 0) | (u >= 1)) or np.any(np.isnan(u)):
            raise ValueError("quantile level must lie in (0, 1)")
        return np.sqrt(-np.log1p(-u) / (np.pi * self.intensity))

    def sample(self, rng, size=None):
        g = as_generator(rng)
        # 1 - random() lies in (0, 1]; log of it is finite
        return np.sqrt(-np.log(1.0 - g.random(size)) / (np.pi * self.intensity))

    def mean(self) -> float:
        return 0.5 / math.sqrt(self.intensity)


def rayleigh_pdf(d: RayleighDist, x):
    return d.pdf(x)


def rayleigh_cdf(d: RayleighDist, x):
    return d.cdf(x)


def rayleigh_quantile(d: RayleighDist, u):
    return d.quantile(u)


def rayleigh_sample(d: RayleighDist, rng, size=None):
    return d.sample(rng, size)


# --- conditional laws -----------------------------------------------------------


def _region_terms(case_id: int, role: Cell, lm: float, ls: float, eta: float):
    """Unnormalized ``(weight, rate)`` pairs for one (case, role) density.

    Built from the inner integrals of the region's triple integral; the outer
    base density contributes its own intensity to every rate.
    """
    ie = 1.0 / eta
    if role is Cell.SCELL1:
        base = ls
        if case_id == 3:
            inner = [
                (lm / (lm + ls * ie), lm * eta + ls),
                (-lm / (lm + ls), (lm + ls) * eta),
            ]
        elif case_id == 4:
            b = ls / (lm + ls)
            inner = [
                (b, lm + ls),
                (-b, (lm + ls) * eta),
                (-1.0, lm * eta + ls),
                (1.0, (lm + ls) * eta),
            ]
        else:
            a = lm / (lm + ls)
            inner = [(a, lm + ls), (-a, (lm + ls) * eta)]
    elif role is Cell.SCELL2:
        base = ls
        if case_id == 3:
            a = lm * eta / (ls + lm * eta)
            inner = [
                (1.0, lm),
                (-1.0, lm * eta),
                (-a, ls * ie + lm),
                (a, ls + lm * eta),
            ]
        else:
            c = ls / (ls + lm * eta)
            inner = [
                (1.0, lm + ls * ie),
                (-1.0, lm + ls),
                (c, ls + lm * eta),
                (-c, ls * ie + lm),
            ]
    else:
        base = lm
        if case_id == 3:
            # (e^{-s/eta} - e^{-s})(1 - e^{-s/eta}) expanded
            inner = [
                (1.0, ls * ie),
                (-1.0, ls),
                (-1.0, 2 * ls * ie),
                (1.0, ls * (1 + ie)),
            ]
        elif case_id == 4:
            inner = [
                (0.5, 2 * ls * ie),
                (0.5, 2 * ls),
                (-1.0, ls * (1 + ie)),
            ]
        else:
            inner = [(1.0, ls * (1 + ie)), (-1.0, 2 * ls)]
    return [(base * w, base + k) for w, k in inner]


@dataclass(frozen=True)
class ConditionalDistanceDist:
    """Law of the distance to ``role`` given that the user lies in case ``case_id``."""

    case_id: int
    role: Cell
    params: NetworkParams
    terms: tuple = field(init=False, repr=False, compare=False)
    case_prob: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        role = Cell(self.role)
        object.__setattr__(self, "role", role)
        if (self.case_id, role) not in DEFINED_PAIRS:
            raise UndefinedRoleError(f"no conditional law for case {self.case_id} / {role.label}")
        p = self.params
        if p.eta <= 1.0:
            raise DegenerateRegionError(f"case {self.case_id} is empty when eta = {p.eta}")
        prob = case_probability(self.case_id, p.lambda_m, p.lambda_s, p.eta)
        if not prob > 0:
            raise DegenerateRegionError(f"case {self.case_id} has probability {prob}")
        raw = _region_terms(self.case_id, role, p.lambda_m, p.lambda_s, p.eta)
        scale = 2.0 / prob
        object.__setattr__(self, "terms", tuple((scale * w, k) for w, k in raw))
        object.__setattr__(self, "case_prob", prob)

    @property
    def rate_min(self) -> float:
        return min(k for _, k in self.terms)

    @property
    def support_cutoff(self) -> float:
        """Distance beyond which every exponential factor is below 1e-16."""
        return math.sqrt(_TAIL_LOG / (math.pi * self.rate_min))

    def pdf(self, x):
        x = _check_x(x)
        # cancellation near the origin can leave -1 ulp-sized values
        return np.maximum(_mixture_pdf(self.terms, x), 0.0)

    def _pdf_scalar(self, x: float) -> float:
        s = 0.0
        for w, k in self.terms:
            s += w * 2.0 * math.pi * x * math.exp(-math.pi * k * x * x)
        return s

    def cdf(self, x):
        x = _check_x(x)
        flat = np.atleast_1d(x).ravel()
        out = np.array([self._cdf_scalar(float(v)) for v in flat])
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def _cdf_scalar(self, x: float) -> float:
        upper = min(x, self.support_cutoff)
        if upper <= 0:
            return 0.0
        val, _ = integrate.quad(self._pdf_scalar, 0.0, upper, epsabs=_CDF_EPSABS, epsrel=_CDF_EPSREL, limit=200)
        return min(max(val, 0.0), 1.0)

    def total_mass(self) -> tuple:
        """``(integral of pdf over [0, inf), abs error)`` by adaptive quadrature."""
        return integrate.quad(
            self._pdf_scalar, 0.0, self.support_cutoff, epsabs=1e-12, epsrel=1e-12, limit=200
        )

    def mean(self) -> float:
        return math.fsum(w / (2.0 * k**1.5) for w, k in self.terms)


def conditional_pdf(d: ConditionalDistanceDist, x):
    return d.pdf(x)


def conditional_cdf(d: ConditionalDistanceDist, x):
    return d.cdf(x)


# --- rejection sampling through the classifier -----------------------------------


@dataclass(frozen=True)
class RejectionSample:
    """Accepted distances per role plus the acceptance bookkeeping."""

    case_id: int
    values: dict  # Cell -> ndarray
    drawn: int
    accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.drawn

    def acceptance_sigma(self, p: float) -> float:
        return math.sqrt(p * (1 - p) / self.drawn)


def _draw_model_triples(params: NetworkParams, g: np.random.Generator, n: int):
    xm = RayleighDist(params.lambda_m).sample(g, n)
    x1 = RayleighDist(params.lambda_s).sample(g, n)
    x2 = RayleighDist(params.lambda_s).sample(g, n)
    return xm, x1, x2


def sample_case_distances(case_id: int, params: NetworkParams, rng, n_accepted: int,
                          max_draws: int = 10**9) -> RejectionSample:
    """Draw model triples until ``n_accepted`` fall in ``case_id``; keep every role."""
    if case_id not in (3, 4, 5):
        raise UndefinedRoleError(f"conditional sampling is defined for cases 3, 4, 5, not {case_id}")
    g = as_generator(rng)
    prob = case_probability(case_id, params.lambda_m, params.lambda_s, params.eta)
    if not prob > 0:
        raise DegenerateRegionError(f"case {case_id} has probability {prob}")
    chunks = {Cell.MCELL: [], Cell.SCELL1: [], Cell.SCELL2: []}
    drawn = accepted = 0
    while accepted < n_accepted:
        need = n_accepted - accepted
        batch = int(min(max(4096, 1.2 * need / prob), 2_000_000))
        if drawn + batch > max_draws:
            raise RuntimeError(f"rejection sampler exceeded {max_draws} draws")
        xm, x1, x2 = _draw_model_triples(params, g, batch)
        hit = case_of_codes(classify_array(xm, x1, x2, params.root_eta)) == case_id
        drawn += batch
        # keep draws up to and including the n-th acceptance so the rate is unbiased
        idx = np.flatnonzero(hit)
        if idx.size > need:
            cut = idx[need - 1] + 1
            drawn -= batch - cut
            idx = idx[:need]
        accepted += idx.size
        chunks[Cell.MCELL].append(xm[idx])
        chunks[Cell.SCELL1].append(np.minimum(x1[idx], x2[idx]))
        chunks[Cell.SCELL2].append(np.maximum(x1[idx], x2[idx]))
    values = {role: np.concatenate(v) for role, v in chunks.items()}
    if case_id == 5:
        del values[Cell.SCELL2]
    return RejectionSample(case_id, values, drawn, accepted)


def sample_conditional(d: ConditionalDistanceDist, rng, n: int = 1):
    """``n`` draws from ``d`` by rejection; returns ``(values, RejectionSample)``."""
    s = sample_case_distances(d.case_id, d.params, rng, n)
    return s.values[d.role], s
