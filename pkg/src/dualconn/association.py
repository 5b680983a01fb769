"""Association of a tagged user with two of three candidate cells.

The candidates are the nearest MCell and two SCells. Uplink ranking is by
distance alone (the UE power is common to all cells). Downlink ranking
compares ``P_m x_m^-alpha`` against ``P_s x_i^-alpha``, which is the same as
ranking ``x_m / sqrt(eta)`` against ``x_i``. Each user falls into one of
twelve subcases, grouped into six cases of two mirror-image subcases.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .params import NetworkParams

__all__ = [
    "Cell",
    "DistanceTriple",
    "AssociationSubcase",
    "CaseProbabilities",
    "SUBCASES",
    "UnclassifiableTripleError",
    "AssociationConsistencyError",
    "classify_by_inequalities",
    "classify_by_orderings",
    "classify_array",
    "classify_orderings_array",
    "case_of_codes",
    "case_probability",
    "case5_probability_unrestricted",
    "all_case_probabilities",
    "single_connectivity_probabilities",
    "classify_two_cell_array",
]


class Cell(enum.IntEnum):
    """Candidate serving cells; the integer value is the tie-break precedence."""

    MCELL = 0
    SCELL1 = 1
    SCELL2 = 2

    @property
    def label(self) -> str:
        return ("MCell", "SCell 1", "SCell 2")[self.value]


M, S1, S2 = Cell.MCELL, Cell.SCELL1, Cell.SCELL2


class UnclassifiableTripleError(RuntimeError):
    """No subcase matched a triple. The subcases partition the space, so this is a bug."""


class AssociationConsistencyError(RuntimeError):
    """First DL link to an SCell together with first UL link to the MCell.

    That combination is impossible while ``P_m >= P_s``.
    """


@dataclass(frozen=True)
class DistanceTriple:
    x_m: float
    x_1: float
    x_2: float

    def __post_init__(self):
        for name in ("x_m", "x_1", "x_2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class AssociationSubcase:
    case_id: int
    subcase_id: int
    roles: tuple  # (UL 1st, DL 1st, UL 2nd, DL 2nd)

    @property
    def code(self) -> int:
        return 2 * (self.case_id - 1) + (self.subcase_id - 1)

    @property
    def name(self) -> str:
        return f"{self.case_id}.{self.subcase_id}"

    @property
    def decoupled(self) -> bool:
        ul1, dl1, ul2, dl2 = self.roles
        return ul1 != dl1 or ul2 != dl2


_TABLE = [
    (1, 1, (M, M, S1, S1)),
    (1, 2, (M, M, S2, S2)),
    (2, 1, (S1, S1, M, M)),
    (2, 2, (S2, S2, M, M)),
    (3, 1, (S1, S1, S2, M)),
    (3, 2, (S2, S2, S1, M)),
    (4, 1, (S1, M, S2, S1)),
    (4, 2, (S2, M, S1, S2)),
    (5, 1, (S1, M, M, S1)),
    (5, 2, (S2, M, M, S2)),
    (6, 1, (S1, S1, S2, S2)),
    (6, 2, (S2, S2, S1, S1)),
]

#: All twelve subcases indexed by code (0 = 1.1, ..., 11 = 6.2).
SUBCASES = tuple(AssociationSubcase(c, s, r) for c, s, r in _TABLE)
_BY_ROLES = {sc.roles: sc for sc in SUBCASES}


def _root_eta(params_or_root_eta) -> float:
    if isinstance(params_or_root_eta, NetworkParams):
        return params_or_root_eta.root_eta
    return float(params_or_root_eta)


def _before(da, ca, db, cb) -> bool:
    # strict order on (distance, precedence)
    return da < db or (da == db and ca < cb)


def classify_by_inequalities(t: DistanceTriple, params) -> AssociationSubcase:
    """Match ``t`` against the restricting-inequality rows of the subcase table.

    ``params`` is a :class:`NetworkParams` or the distance scaling
    ``sqrt(eta)`` directly.
    """
    r = _root_eta(params)
    xm, x1, x2 = t.x_m, t.x_1, t.x_2
    md = xm / r  # MCell position on the downlink scale

    def lt(da, ca, db, cb):
        return _before(da, ca, db, cb)

    s12 = lt(x1, S1, x2, S2)
    rows = (
        lt(xm, M, x1, S1) and s12,
        lt(xm, M, x2, S2) and not s12,
        lt(x1, S1, md, M) and lt(xm, M, x2, S2),
        lt(x2, S2, md, M) and lt(xm, M, x1, S1),
        lt(x1, S1, md, M) and lt(md, M, x2, S2) and lt(x2, S2, xm, M),
        lt(x2, S2, md, M) and lt(md, M, x1, S1) and lt(x1, S1, xm, M),
        s12 and lt(x2, S2, xm, M) and lt(md, M, x1, S1),
        not s12 and lt(x1, S1, xm, M) and lt(md, M, x2, S2),
        lt(xm, M, x2, S2) and lt(x1, S1, xm, M) and lt(md, M, x1, S1),
        lt(xm, M, x1, S1) and lt(x2, S2, xm, M) and lt(md, M, x2, S2),
        s12 and lt(x2, S2, md, M),
        not s12 and lt(x1, S1, md, M),
    )
    hits = [i for i, ok in enumerate(rows) if ok]
    if len(hits) != 1:
        raise UnclassifiableTripleError(f"{t} matched subcase rows {hits}")
    return SUBCASES[hits[0]]


def classify_by_orderings(t: DistanceTriple, params) -> AssociationSubcase:
    """Rank the cells per link and read the subcase off the (1st, 2nd) pairs."""
    r = _root_eta(params)
    ul_key = {M: t.x_m, S1: t.x_1, S2: t.x_2}
    dl_key = {M: t.x_m / r, S1: t.x_1, S2: t.x_2}
    ul = sorted(Cell, key=lambda c: (ul_key[c], c))
    dl = sorted(Cell, key=lambda c: (dl_key[c], c))
    if ul[0] is M and dl[0] is not M:
        raise AssociationConsistencyError(f"{t}: UL 1st is the MCell but DL 1st is {dl[0].label}")
    roles = (ul[0], dl[0], ul[1], dl[1])
    try:
        return _BY_ROLES[roles]
    except KeyError:
        raise UnclassifiableTripleError(f"{t}: roles {[c.label for c in roles]} are not a table row") from None


def classify_array(xm, x1, x2, root_eta: float) -> np.ndarray:
    """Vectorized inequality classifier returning int8 subcase codes."""
    return _kernels.classify_codes(xm, x1, x2, root_eta)


# Lookup from (ul1, dl1, ul2, dl2) packed base-3 to subcase code.
_ROLE_LUT = np.full(81, -1, dtype=np.int8)
for _sc in SUBCASES:
    a, b, c, d = (int(x) for x in _sc.roles)
    _ROLE_LUT[27 * a + 9 * b + 3 * c + d] = _sc.code


def classify_orderings_array(xm, x1, x2, root_eta: float):
    """Vectorized ordering classifier.

    Returns ``(codes, impossible)`` where ``impossible`` flags triples whose
    first UL link is the MCell while the first DL link is an SCell.
    """
    xm, x1, x2 = (np.asarray(a, dtype=np.float64) for a in (xm, x1, x2))
    ul = np.stack([xm, x1, x2])
    dl = np.stack([xm / root_eta, x1, x2])
    first_ul, second_ul = _first_two(ul)
    first_dl, second_dl = _first_two(dl)
    impossible = (first_ul == 0) & (first_dl != 0)
    codes = _ROLE_LUT[27 * first_ul + 9 * first_dl + 3 * second_ul + second_dl]
    return codes, impossible


def _first_two(keys):
    # rank of each cell = number of cells strictly before it under the tie rule
    rank = np.zeros(keys.shape, dtype=np.int64)
    for a in range(3):
        for b in range(3):
            if a != b:
                before = keys[b] <= keys[a] if b < a else keys[b] < keys[a]
                rank[a] += before
    first = np.argmin(rank, axis=0)
    second = np.argmax(rank == 1, axis=0)
    return first, second


def case_of_codes(codes: np.ndarray) -> np.ndarray:
    """Subcase codes to case ids 1..6."""
    return codes // 2 + 1


# --- closed forms ---------------------------------------------------------------


def case_probability(case_id: int, lambda_m: float, lambda_s: float, eta: float) -> float:
    """Probability of association case ``case_id`` (both mirror subcases).

    Cases 3, 4 and 5 are written with the factor ``eta - 1`` pulled out, so
    they are nonnegative by construction and exactly zero at ``eta == 1``.
    """
    if eta < 1:
        raise ValueError(f"eta must be >= 1 (P_m >= P_s), got {eta}")
    if lambda_m <= 0 or lambda_s <= 0:
        raise ValueError("intensities must be positive")
    lm, ls = lambda_m, lambda_s
    gap = eta - 1.0
    if case_id == 1:
        return lm / (2 * ls + lm)
    if case_id == 2:
        return 2 * ls * lm / ((ls + lm) * (ls + eta * ls + eta * lm))
    if case_id == 3:
        a = (lm + ls / eta) * (lm * eta + 2 * ls)
        b = (lm + ls) * ((lm + ls) * eta + ls)
        return 2 * lm * ls * gap * (2 * lm * ls + ls * ls * (eta + 2) / eta) / (a * b)
    near = lm + 2 * ls
    far = (lm + ls) * eta + ls
    if case_id == 4:
        mid = lm * eta + 2 * ls
        return 2 * lm * ls * ls * gap * gap / (near * mid * far)
    if case_id == 5:
        # region x_1 < x_m < sqrt(eta) x_1, x_m < x_2 and its mirror
        return 2 * lm * ls * gap / (near * far)
    if case_id == 6:
        return 2 * ls * ls / ((lm * eta + ls) * (lm * eta + 2 * ls))
    raise ValueError(f"case_id must be in 1..6, got {case_id}")


def case5_probability_unrestricted(lambda_m: float, lambda_s: float, eta: float) -> float:
    """Alternative case 5 closed form, kept for discrepancy reports.

    It counts ``Pr(x_1 < x_m < sqrt(eta) x_1)`` over both mirror images and
    subtracts Case 4, but that event also contains ``x_2 < x_1 < x_m``
    configurations belonging to subcases 3.2 and 4.2, so it overstates the
    probability and the six cases no longer sum to one.
    """
    lm, ls = lambda_m, lambda_s
    return 2 * (ls / (ls + lm) - ls / (lm * eta + ls)) - case_probability(4, lm, ls, eta)


@dataclass(frozen=True)
class CaseProbabilities:
    p: tuple  # six entries, index 0 is case 1

    def __getitem__(self, case_id: int) -> float:
        return self.p[case_id - 1]

    @property
    def dualconn(self) -> float:
        """Coupled MCell/SCell dual connectivity (cases 1 and 2)."""
        return self.p[0] + self.p[1]

    @property
    def dude(self) -> float:
        """Any decoupled association (cases 3, 4, 5)."""
        return self.p[2] + self.p[3] + self.p[4]

    @property
    def scell(self) -> float:
        return self.p[5]

    @property
    def total(self) -> float:
        return math.fsum(self.p)


def all_case_probabilities(params: NetworkParams) -> CaseProbabilities:
    return CaseProbabilities(
        tuple(case_probability(c, params.lambda_m, params.lambda_s, params.eta) for c in range(1, 7))
    )


# --- single connectivity (one MCell, one SCell) -----------------------------------


def single_connectivity_probabilities(lambda_m: float, lambda_s: float, eta: float):
    """``(coupled MCell, decoupled, coupled SCell)`` for one link to the better of two cells.

    Decoupled means UL to the SCell and DL to the MCell: ``x_1 < x_m < sqrt(eta) x_1``.
    """
    lm, ls = lambda_m, lambda_s
    mcell = lm / (lm + ls)
    scell = ls / (ls + lm * eta)
    decoupled = ls / (ls + lm) - scell
    return mcell, decoupled, scell


def classify_two_cell_array(xm, x1, root_eta: float) -> np.ndarray:
    """0 = coupled MCell, 1 = decoupled, 2 = coupled SCell (same tie rule)."""
    xm = np.asarray(xm, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    ul_mcell = xm <= x1
    dl_mcell = (xm / root_eta) <= x1
    out = np.full(xm.shape, 1, dtype=np.int8)
    out[ul_mcell] = 0
    out[~dl_mcell] = 2
    return out
