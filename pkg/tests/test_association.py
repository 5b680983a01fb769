import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualconn.association import (
    SUBCASES,
    AssociationConsistencyError,
    Cell,
    DistanceTriple,
    all_case_probabilities,
    case5_probability_unrestricted,
    case_of_codes,
    case_probability,
    classify_array,
    classify_by_inequalities,
    classify_by_orderings,
    classify_orderings_array,
    classify_two_cell_array,
    single_connectivity_probabilities,
)
from dualconn.params import NetworkParams

import oracles

M, S1, S2 = Cell.MCELL, Cell.SCELL1, Cell.SCELL2
ETA_T2 = 10**0.65

EXAMPLES = [
    ((1, 2, 3), 2.0, "1.1"),
    ((2.5, 1, 3), 2.0, "2.1"),
    ((4, 1, 3), 2.0, "3.1"),
    ((2, 1, 1.5), 3.0, "4.1"),
    ((1.5, 1, 2), 2.0, "5.1"),
    ((4, 1, 1.5), 2.0, "6.1"),
    ((2, 1, 3), 1.0, "2.1"),
]


@pytest.mark.parametrize("xyz, root_eta, name", EXAMPLES)
def test_worked_examples(xyz, root_eta, name):
    t = DistanceTriple(*xyz)
    assert classify_by_inequalities(t, root_eta).name == name
    assert classify_by_orderings(t, root_eta).name == name


@pytest.mark.parametrize("xyz, root_eta, name", EXAMPLES)
def test_mirror_examples(xyz, root_eta, name):
    xm, x1, x2 = xyz
    mirrored = classify_by_inequalities(DistanceTriple(xm, x2, x1), root_eta)
    assert mirrored.name == name[:-1] + "2"


def test_params_accepted_in_place_of_root_eta():
    p = NetworkParams.reference(p_m_dbm=30.0 + 40 * math.log10(2.0))
    assert classify_by_inequalities(DistanceTriple(4, 1, 3), p).name == "3.1"


def test_table_roles():
    by_name = {s.name: s.roles for s in SUBCASES}
    assert by_name["1.1"] == (M, M, S1, S1)
    assert by_name["3.1"] == (S1, S1, S2, M)
    assert by_name["4.2"] == (S2, M, S1, S2)
    assert by_name["5.1"] == (S1, M, M, S1)
    assert by_name["6.2"] == (S2, S2, S1, S1)
    assert [s.code for s in SUBCASES] == list(range(12))
    assert {s.case_id for s in SUBCASES if s.decoupled} == {3, 4, 5}


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 1), (1, 1, math.inf), (math.nan, 1, 1)])
def test_triple_rejects_nonpositive_or_nonfinite(bad):
    with pytest.raises(ValueError):
        DistanceTriple(*bad)


dist = st.floats(1e-3, 1e4, allow_nan=False)


@given(dist, dist, dist, st.sampled_from([1.0, 1.5, 2.0, math.sqrt(ETA_T2), 3.0]))
def test_classifiers_agree(xm, x1, x2, root_eta):
    t = DistanceTriple(xm, x1, x2)
    a = classify_by_inequalities(t, root_eta)
    assert a == classify_by_orderings(t, root_eta)
    assert classify_array([xm], [x1], [x2], root_eta)[0] == a.code


@given(dist, st.sampled_from(["m1", "m2", "12", "dm1", "all"]), st.sampled_from([1.0, 2.0, 3.0]))
def test_classifiers_agree_on_ties(x, pattern, root_eta):
    xm = x1 = x2 = x
    if pattern == "m1":
        x2 = 2 * x
    elif pattern == "m2":
        x1 = 2 * x
    elif pattern == "12":
        xm = 3 * x
    elif pattern == "dm1":
        xm = root_eta * x
        x2 = 5 * x
    t = DistanceTriple(xm, x1, x2)
    a = classify_by_inequalities(t, root_eta)
    assert a == classify_by_orderings(t, root_eta)
    codes, impossible = classify_orderings_array([xm], [x1], [x2], root_eta)
    assert codes[0] == a.code and not impossible[0]


def test_tie_precedence_mcell_first():
    # x_m == x_1 < x_2: the MCell wins the uplink tie
    assert classify_by_inequalities(DistanceTriple(1, 1, 2), 2.0).name == "1.1"
    # x_1 == x_2: SCell 1 outranks SCell 2
    assert classify_by_inequalities(DistanceTriple(5, 1, 1), 2.0).name == "6.1"


def test_impossibility_guard_fires_below_unit_eta():
    # P_m < P_s lets the MCell win the uplink but lose the downlink
    with pytest.raises(AssociationConsistencyError):
        classify_by_orderings(DistanceTriple(1.0, 1.2, 3.0), 0.5)


def test_vectorized_classifiers_cover_all_codes():
    rng = np.random.default_rng(0)
    lm, ls = 1.47e-5, 5 * 1.47e-5
    n = 200_000
    xm = np.sqrt(rng.exponential(size=n) / (math.pi * lm))
    x1 = np.sqrt(rng.exponential(size=n) / (math.pi * ls))
    x2 = np.sqrt(rng.exponential(size=n) / (math.pi * ls))
    a = classify_array(xm, x1, x2, math.sqrt(ETA_T2))
    b, impossible = classify_orderings_array(xm, x1, x2, math.sqrt(ETA_T2))
    assert np.array_equal(a, b)
    assert not impossible.any()
    assert set(np.unique(a)) == set(range(12))
    counts = np.bincount(a, minlength=12).reshape(6, 2)
    # mirror subcases are equally likely
    diff = np.abs(counts[:, 0] - counts[:, 1])
    assert np.all(diff <= 3 * np.sqrt(counts.sum(axis=1)))


# --- closed forms ---------------------------------------------------------------


@pytest.mark.parametrize("case_id", range(1, 7))
@pytest.mark.parametrize("ratio, eta", [(5, ETA_T2), (2, ETA_T2), (1, 2.0), (10, 10.0), (3, 1.5)])
def test_closed_form_matches_region_quadrature(case_id, ratio, eta):
    lm = 1.47e-5
    expected = oracles.region_probability(case_id, lm, ratio * lm, eta)
    assert case_probability(case_id, lm, ratio * lm, eta) == pytest.approx(expected, abs=1e-10)


def test_alternative_case5_form_overstates_the_region():
    lm, ls = 1.47e-5, 5 * 1.47e-5
    region = oracles.region_probability(5, lm, ls, ETA_T2)
    stated = case5_probability_unrestricted(lm, ls, ETA_T2)
    assert stated == pytest.approx(oracles.stated_case_probability(5, lm, ls, ETA_T2), rel=1e-14)
    assert stated - region == pytest.approx(0.392492767786, abs=1e-9)


def test_case_one_limit_without_scells():
    assert case_probability(1, 1.0, 1e-12, 4.0) == pytest.approx(1.0, abs=1e-11)


def test_case_six_limit_without_mcells():
    assert case_probability(6, 1e-12, 1.0, 4.0) == pytest.approx(1.0, abs=1e-11)


def test_case_one_equal_intensities():
    for e in (1.0, 2.0, ETA_T2):
        assert case_probability(1, 2e-5, 2e-5, e) == pytest.approx(1 / 3, rel=1e-15)


def test_equal_powers_and_intensities():
    p = all_case_probabilities(NetworkParams.reference(1.0, p_s_dbm=43.0))
    assert p.p == pytest.approx((1 / 3, 1 / 3, 0, 0, 0, 1 / 3), abs=1e-15)


@pytest.mark.parametrize("ratio", range(1, 11))
def test_decoupled_cases_vanish_exactly_at_unit_eta(ratio):
    lm = 1.47e-5
    for c in (3, 4, 5):
        assert case_probability(c, lm, ratio * lm, 1.0) == 0.0


def test_eta_below_one_rejected():
    with pytest.raises(ValueError):
        case_probability(3, 1.0, 1.0, 0.99)
    with pytest.raises(ValueError):
        case_probability(7, 1.0, 1.0, 2.0)


@given(st.floats(1.0, 10.0), st.one_of(st.floats(1.0, 50.0), st.floats(1.0, 1.0 + 1e-9)))
def test_simplex(ratio, eta):
    lm = 1.47e-5
    ps = [case_probability(c, lm, ratio * lm, eta) for c in range(1, 7)]
    assert all(0.0 <= p <= 1.0 for p in ps)
    assert math.fsum(ps) == pytest.approx(1.0, abs=1e-9)


@given(st.floats(1.0, 10.0), st.floats(1.0, 50.0), st.floats(1e-3, 1e3))
def test_scale_invariance(ratio, eta, c):
    lm = 1.47e-5
    for case_id in range(1, 7):
        a = case_probability(case_id, lm, ratio * lm, eta)
        b = case_probability(case_id, c * lm, c * ratio * lm, eta)
        assert b == pytest.approx(a, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("eta", [1.0, 2.0, ETA_T2, 10.0])
def test_case_six_nondecreasing_in_density_ratio(eta):
    lm = 1.47e-5
    p6 = [case_probability(6, lm, r * lm, eta) for r in range(1, 11)]
    assert all(a <= b for a, b in zip(p6, p6[1:]))


def test_aggregates():
    p = all_case_probabilities(NetworkParams.reference(5.0))
    assert p.dualconn == pytest.approx(p[1] + p[2])
    assert p.dude == pytest.approx(p[3] + p[4] + p[5])
    assert p.scell == p[6]
    assert p.total == pytest.approx(1.0, abs=1e-15)


def test_single_connectivity_closed_form_against_classifier():
    lm, ls = 1.47e-5, 5 * 1.47e-5
    rng = np.random.default_rng(3)
    n = 400_000
    xm = np.sqrt(rng.exponential(size=n) / (math.pi * lm))
    x1 = np.sqrt(rng.exponential(size=n) / (math.pi * ls))
    codes = classify_two_cell_array(xm, x1, math.sqrt(ETA_T2))
    freq = np.bincount(codes, minlength=3) / n
    exact = np.array(single_connectivity_probabilities(lm, ls, ETA_T2))
    assert exact.sum() == pytest.approx(1.0)
    assert np.all(np.abs(freq - exact) <= 4 * np.sqrt(exact * (1 - exact) / n))


def test_case_of_codes():
    assert list(case_of_codes(np.arange(12))) == [1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6]
