import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from weylvd.halfplane import (
    HalfPlanePoint,
    IntervalUnion,
    InvalidInterval,
    OutsideHalfPlane,
    gamma_separation,
    hyperbolic_distance,
    quasi_triangle_bound,
    theta_angle,
    theta_boundary,
    theta_xy,
)

reals = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
heights = st.floats(min_value=0.1, max_value=10.0, allow_nan=False)
points = st.builds(complex, reals, heights)


def interval_st() -> st.SearchStrategy[IntervalUnion]:
    pairs = st.lists(st.tuples(reals, st.floats(min_value=0.01, max_value=5.0)), max_size=4)
    return pairs.map(lambda items: IntervalUnion.build((lo, lo + width) for lo, width in items))


def test_point_rejects_lower_half_plane():
    with pytest.raises(OutsideHalfPlane):
        HalfPlanePoint(re=1.0, im=0.0)
    with pytest.raises(OutsideHalfPlane):
        HalfPlanePoint.from_complex(complex(0.0, -1.0))
    with pytest.raises(OutsideHalfPlane):
        HalfPlanePoint(re=math.inf, im=1.0)


def test_coerce_keeps_points():
    p = HalfPlanePoint(re=1.0, im=2.0)
    assert HalfPlanePoint.coerce(p) is p
    assert complex(HalfPlanePoint.coerce(1 + 2j)) == 1 + 2j


@given(points, points)
def test_gamma_symmetric(z1, z2):
    assert gamma_separation(z1, z2) == pytest.approx(gamma_separation(z2, z1), rel=1e-12)
    assert gamma_separation(z1, z1) == 0.0


@given(points, points, st.floats(min_value=0.1, max_value=10.0), reals)
def test_gamma_invariant_under_affine_maps(z1, z2, scale, shift):
    moved = gamma_separation(scale * z1 + shift, scale * z2 + shift)
    assert moved == pytest.approx(gamma_separation(z1, z2), rel=1e-9, abs=1e-12)


@given(points, points)
def test_gamma_invariant_under_inversion(z1, z2):
    moved = gamma_separation(-1.0 / z1, -1.0 / z2)
    assert moved == pytest.approx(gamma_separation(z1, z2), rel=1e-9, abs=1e-12)


@given(points, points)
def test_gamma_and_hyperbolic_distance(z1, z2):
    d = hyperbolic_distance(z1, z2)
    assert 2.0 * math.sinh(d / 2.0) == pytest.approx(gamma_separation(z1, z2), rel=1e-9, abs=1e-12)


def test_gamma_known_value():
    # |i - 2i| / sqrt(1 * 2)
    assert gamma_separation(1j, 2j) == pytest.approx(1.0 / math.sqrt(2.0))


def test_theta_reference_values():
    assert theta_angle(1j, IntervalUnion.real_line()) == pytest.approx(math.pi)
    assert theta_angle(1j, IntervalUnion.positive_half()) == pytest.approx(math.pi / 2.0)
    assert theta_angle(1j, IntervalUnion(((-1.0, 1.0),))) == pytest.approx(math.pi / 2.0)
    assert theta_angle(1j, IntervalUnion.empty()) == 0.0


@given(points, interval_st())
def test_theta_complement(z, s):
    total = theta_angle(z, s) + theta_angle(z, s.complement())
    assert total == pytest.approx(math.pi, abs=1e-9)


@given(points, interval_st(), interval_st())
def test_theta_additive_on_disjoint_sets(z, s1, s2):
    only_second = s2.intersect(s1.complement())
    union = IntervalUnion.build((*s1, *only_second))
    combined = theta_angle(z, s1) + theta_angle(z, only_second)
    assert theta_angle(z, union) == pytest.approx(combined, abs=1e-9)


@given(points, interval_st())
def test_theta_in_range(z, s):
    assert 0.0 <= theta_angle(z, s) <= math.pi


def test_theta_boundary_convention():
    s = IntervalUnion(((1.0, 2.0),))
    assert theta_boundary(1.5, s) == math.pi
    assert theta_boundary(3.0, s) == 0.0
    assert theta_xy(1.5, 0.0, s) == math.pi
    assert theta_xy(1.5, -1.0, s) == math.pi


def test_theta_approaches_boundary_value():
    s = IntervalUnion(((1.0, 2.0),))
    assert theta_xy(1.5, 1e-9, s) == pytest.approx(math.pi, abs=1e-6)
    assert theta_xy(3.0, 1e-9, s) == pytest.approx(0.0, abs=1e-6)


def test_interval_parse():
    s = IntervalUnion.parse("[1, 2] + (3, inf)")
    assert s.intervals == ((1.0, 2.0), (3.0, math.inf))
    assert IntervalUnion.parse("(-inf, 0)") == IntervalUnion.negative_half()
    assert IntervalUnion.parse("empty").is_empty
    assert str(IntervalUnion(((1.0, 2.0),))) == "[1, 2]"


@pytest.mark.parametrize("text", ["[2, 1]", "1, 2", "[a, 2]", "[1, 2] + "])
def test_interval_parse_rejects(text):
    with pytest.raises(InvalidInterval):
        IntervalUnion.parse(text)


def test_interval_build_merges():
    s = IntervalUnion.build([(3.0, 4.0), (0.0, 1.0), (0.5, 2.0), (5.0, 5.0)])
    assert s.intervals == ((0.0, 2.0), (3.0, 4.0))
    assert s.measure == pytest.approx(3.0)
    assert s.lower == 0.0
    assert s.upper == 4.0


def test_interval_constructor_validates():
    with pytest.raises(InvalidInterval):
        IntervalUnion(((0.0, 2.0), (1.0, 3.0)))
    with pytest.raises(InvalidInterval):
        IntervalUnion(((0.0, math.inf), (1.0, 3.0)))


def test_interval_set_operations():
    s = IntervalUnion(((-3.0, -1.0), (2.0, 5.0)))
    assert s.negate().intervals == ((-5.0, -2.0), (1.0, 3.0))
    assert s.intersect(IntervalUnion.positive_half()).intervals == ((2.0, 5.0),)
    assert s.truncate(2.5).intervals == ((-2.5, -1.0), (2.0, 2.5))
    assert s.contains(-2.0)
    assert not s.contains(0.0)
    assert IntervalUnion.positive_half().measure == math.inf


@given(interval_st())
def test_interval_negation_is_involution(s):
    assert s.negate().negate() == s
    assert s.negate().measure == pytest.approx(s.measure)


def test_quasi_triangle_bound():
    assert quasi_triangle_bound(1.0, 0.5) == pytest.approx(math.sqrt(2.0) * 1.5)
    with pytest.raises(ValueError):
        quasi_triangle_bound(2.5, 0.5)


@given(points, points, points)
def test_quasi_triangle_holds(z1, z2, z3):
    g12 = gamma_separation(z1, z2)
    g23 = gamma_separation(z2, z3)
    if 0.0 < g12 <= 2.0 and 0.0 < g23 <= 2.0:
        assert gamma_separation(z1, z3) <= quasi_triangle_bound(g12, g23) * (1.0 + 1e-12)


def test_infinity_tails():
    assert IntervalUnion.negative_half().contains_minus_infinity_tail
    assert not IntervalUnion.negative_half().contains_plus_infinity_tail
    assert IntervalUnion.positive_half().contains_plus_infinity_tail
    assert not IntervalUnion(((1.0, 2.0),)).contains_plus_infinity_tail
    assert not IntervalUnion(()).contains_minus_infinity_tail
    assert IntervalUnion.positive_half().complement() == IntervalUnion(((-math.inf, 0.0),))
