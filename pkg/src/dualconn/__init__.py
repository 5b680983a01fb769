"""Decoupled uplink/downlink association under dual connectivity in two-tier networks."""
__version__ = "0.1.0"

from .association import (
    AssociationSubcase,
    CaseProbabilities,
    Cell,
    DistanceTriple,
    SUBCASES,
    all_case_probabilities,
    case_probability,
    classify_by_inequalities,
    classify_by_orderings,
)
from .capacity import (
    CapacityResult,
    InterferenceField,
    LinkSpec,
    baseline_capacity,
    dude_case_capacity,
    interference_exponent_constant,
    link_capacity,
    sir_ccdf,
    sir_gain_db,
)
from .distance import ConditionalDistanceDist, RayleighDist
from .params import NetworkParams, ParameterError, dbm_to_linear, eta, linear_to_dbm, validate
from .streams import RandomStream

__all__ = [
    "AssociationSubcase",
    "CapacityResult",
    "CaseProbabilities",
    "Cell",
    "ConditionalDistanceDist",
    "DistanceTriple",
    "InterferenceField",
    "LinkSpec",
    "NetworkParams",
    "ParameterError",
    "RandomStream",
    "RayleighDist",
    "SUBCASES",
    "all_case_probabilities",
    "baseline_capacity",
    "case_probability",
    "classify_by_inequalities",
    "classify_by_orderings",
    "dbm_to_linear",
    "dude_case_capacity",
    "eta",
    "interference_exponent_constant",
    "linear_to_dbm",
    "link_capacity",
    "sir_ccdf",
    "sir_gain_db",
    "validate",
]
