from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bootperc.exceptions import FamilyLiteralError, InvalidDirectionError, InvalidSpecError, NotApplicableError
from bootperc.family import (
    Criticality,
    ExplicitFamily,
    NeighborhoodSpec,
    OrderStatus,
    RationalDirection,
    StableCase,
    ThresholdFamily,
    classify,
    format_family,
    is_stable_direction,
    load_explicit_family,
    neighborhood_vectors,
    parse_family,
    predicted_log_lc_order,
    predicted_log_lc_order_2d,
    predicted_order,
    probe_directions,
    stable_set_symbolic,
)

CRITICAL_RANGE = [
    (a, b, c, r)
    for a, b, c in product(range(1, 5), repeat=3)
    if a <= b <= c
    for r in range(c + 1, a + b + c + 1)
]


def _expected_case(a, b, c, r):
    if r <= a + b:
        return StableCase.AXES_ONLY
    if r <= a + c:
        return StableCase.E3_PLUS_CIRCLE3
    if r <= b + c:
        return StableCase.CIRCLES_23
    return StableCase.CIRCLES_123


# ---------------------------------------------------------------------------
# Neighbourhoods and literals
# ---------------------------------------------------------------------------

def test_neighbourhood_vectors_anisotropic():
    vectors = neighborhood_vectors(NeighborhoodSpec((1, 2, 4)))
    assert len(vectors) == 14
    along_e3 = {v for v in vectors if v[0] == 0 and v[1] == 0}
    assert along_e3 == {(0, 0, k) for k in (-4, -3, -2, -1, 1, 2, 3, 4)}


def test_neighbourhood_vectors_nearest():
    assert neighborhood_vectors(NeighborhoodSpec((1, 1))) == {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_neighbourhood_symmetric_under_permutation():
    vectors = neighborhood_vectors(NeighborhoodSpec((2, 2, 2)))
    assert len(vectors) == 12
    assert {(z, x, y) for x, y, z in vectors} == vectors


@pytest.mark.parametrize("radii", [(), (0, 1), (2, 1), (1, -1)])
def test_invalid_specs(radii):
    with pytest.raises(InvalidSpecError):
        NeighborhoodSpec(radii)


def test_threshold_out_of_range():
    with pytest.raises(InvalidSpecError):
        ThresholdFamily.of(1, 1, r=5)


def test_parse_and_format():
    family = parse_family(" N[1, 2,4] r=6 ")
    assert family.radii == (1, 2, 4)
    assert family.r == 6
    assert family.s == 2
    assert family.m == 4
    assert format_family(family) == "N[1,2,4]r=6"
    assert parse_family(str(family)) == family


@pytest.mark.parametrize("literal", ["", "N[1,2]", "M[1,2]r=3", "N[1,,2]r=3", "N[a]r=1"])
def test_malformed_literal(literal):
    with pytest.raises(FamilyLiteralError):
        parse_family(literal)


def test_explicit_family_rejects_origin():
    with pytest.raises(InvalidSpecError):
        ExplicitFamily((frozenset({(0, 0)}),))


def test_load_explicit_family(tmp_path):
    path = tmp_path / "rules.yaml"
    path.write_text("rules:\n  - [[1, 0], [0, 1]]\n  - [[-1, 0], [0, -1]]\n", encoding="utf-8")
    family = load_explicit_family(path)
    assert family.dims == 2
    assert len(family.rules) == 2
    assert frozenset({(1, 0), (0, 1)}) in family.rules


# ---------------------------------------------------------------------------
# Stable directions
# ---------------------------------------------------------------------------

def test_zero_direction_rejected():
    with pytest.raises(InvalidDirectionError):
        RationalDirection.of(0, 0, 0)


def test_direction_is_reduced():
    assert RationalDirection.of(0, 3, -6).components == (0, 1, -2)


def test_stable_direction_examples():
    family = ThresholdFamily.of(1, 2, 4, r=5)
    assert is_stable_direction(family, RationalDirection.of(0, 0, 1))
    assert not is_stable_direction(family, RationalDirection.of(0, 1, 1))


def test_direction_dimension_mismatch():
    with pytest.raises(InvalidDirectionError):
        is_stable_direction(ThresholdFamily.of(1, 1, r=2), RationalDirection.of(1, 0, 0))


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(-3, 3), min_size=3, max_size=3).filter(any),
    st.integers(1, 5),
    st.sampled_from([(1, 1, 1, 2), (1, 2, 4, 5), (2, 2, 3, 6), (1, 1, 2, 3)]),
)
def test_scale_invariance(components, k, params):
    family = ThresholdFamily.of(*params[:3], r=params[3])
    u = RationalDirection(tuple(components))
    scaled = RationalDirection(tuple(k * x for x in components))
    assert is_stable_direction(family, u) == is_stable_direction(family, scaled)


@pytest.mark.parametrize("params", [(1, 1, 1, 2), (1, 1, 1, 3), (1, 1, 2, 3), (1, 1, 2, 4)])
def test_threshold_matches_explicit(params):
    family = ThresholdFamily.of(*params[:3], r=params[3])
    explicit = family.to_explicit()
    for u in probe_directions(3):
        assert is_stable_direction(family, u) == is_stable_direction(explicit, u)


@pytest.mark.parametrize("a,b,c,r", CRITICAL_RANGE)
def test_stable_set_table(a, b, c, r):
    description = stable_set_symbolic(a, b, c, r)
    assert description.case is _expected_case(a, b, c, r)
    assert description.criticality is Criticality.CRITICAL
    family = ThresholdFamily.of(a, b, c, r=r)
    for u in probe_directions(3):
        if sum(1 for x in u.components if x) > 2:
            continue
        assert is_stable_direction(family, u) == description.contains(u), (a, b, c, r, u)


@pytest.mark.parametrize(
    "params,case",
    [
        ((1, 2, 4, 5), StableCase.E3_PLUS_CIRCLE3),
        ((1, 2, 4, 6), StableCase.CIRCLES_23),
        ((2, 3, 4, 5), StableCase.AXES_ONLY),
    ],
)
def test_stable_set_examples(params, case):
    assert stable_set_symbolic(*params).case is case


def test_subcritical_sphere():
    description = stable_set_symbolic(1, 1, 1, 4)
    assert description.case is StableCase.ALL_SPHERE
    assert description.criticality is Criticality.SUBCRITICAL


@pytest.mark.parametrize("a,b,c", [(a, b, c) for a, b, c in product(range(1, 4), repeat=3) if a <= b <= c])
def test_critical_iff_in_range(a, b, c):
    for r in range(1, 2 * (a + b + c) + 1):
        critical = stable_set_symbolic(a, b, c, r).criticality is Criticality.CRITICAL
        assert critical == (c + 1 <= r <= a + b + c)


def test_supercritical_is_probed():
    description = stable_set_symbolic(1, 2, 4, 3)
    assert description.criticality is Criticality.SUPERCRITICAL
    assert description.case is StableCase.PROBED
    family = ThresholdFamily.of(1, 2, 4, r=3)
    for u in probe_directions(3):
        assert description.contains(u) == is_stable_direction(family, u)
    assert stable_set_symbolic(2, 2, 2, 1).case is StableCase.EMPTY


def test_unsorted_radii_rejected():
    with pytest.raises(InvalidSpecError):
        stable_set_symbolic(2, 1, 4, 5)


def test_classify_label():
    description = classify(parse_family("N[1,2,4]r=6"))
    assert description.label == "S1_2 ∪ S1_3"
    assert description.is_critical


def test_classify_rejects_other_dimensions():
    with pytest.raises(NotApplicableError):
        classify(ThresholdFamily.of(1, 1, 1, 1, r=5))
    with pytest.raises(NotApplicableError):
        classify(ThresholdFamily.of(1, 1, r=2).to_explicit())


# ---------------------------------------------------------------------------
# Predicted orders
# ---------------------------------------------------------------------------

def test_order_balanced():
    order = predicted_log_lc_order(1, 2, 3, 5)
    assert (order.exponent, order.log_power, order.level) == (2, 0, 1)
    assert order.status is OrderStatus.THEOREM


def test_order_long_axis():
    order = predicted_log_lc_order(1, 2, 4, 6)
    assert (order.exponent, order.log_power) == (2, 2)
    assert order.status is OrderStatus.THEOREM


def test_order_isotropic_upper_bound():
    order = predicted_log_lc_order(3, 3, 3, 6)
    assert order.exponent == Fraction(5, 3)
    assert order.log_power == 0
    assert order.status is OrderStatus.UPPER_BOUND_ONLY


def test_order_second_level():
    order = predicted_log_lc_order(1, 2, 3, 6)
    assert order.level == 2
    assert order.exponent == 1


def test_order_rejects_non_critical():
    with pytest.raises(NotApplicableError):
        predicted_log_lc_order(1, 1, 1, 4)
    with pytest.raises(NotApplicableError):
        predicted_log_lc_order(1, 2, 4, 3)


def test_order_2d():
    assert predicted_log_lc_order_2d(1, 1, 2).log_power == 0
    assert predicted_log_lc_order_2d(1, 2, 3).log_power == 2
    assert predicted_order(ThresholdFamily.of(1, 1, r=2)).exponent == 1
