import math

import numpy as np
import pytest

from weylvd.halfplane import IntervalUnion
from weylvd.value_distribution import (
    QuadratureError,
    SamplingPolicy,
    compare_value_distributions,
    empirical_error_proxy,
    free_asymptotic_distribution,
    herglotz_value_distribution,
    ladder_value_distribution,
    real_function_value_distribution,
)

A_UNIT = IntervalUnion(((1.0, 2.0),))


def minus_inverse(z: complex) -> complex:
    return -1.0 / z


def test_minus_inverse_lands_in_target():
    # -1/λ maps [1, 2] onto [-1, -1/2]
    report = herglotz_value_distribution(minus_inverse, A_UNIT, IntervalUnion(((-1.0, -0.5),)), 1e-3)
    assert report.value == pytest.approx(1.0, abs=1e-2)
    assert report.converged
    assert report.d_used == 1e-3
    assert report.grid_points > 0


def test_identity_measures_intersection():
    report = herglotz_value_distribution(lambda z: z, IntervalUnion(((0.0, 3.0),)), IntervalUnion(((1.0, 2.0),)), 1e-4)
    assert report.value == pytest.approx(1.0, abs=5e-3)


def test_value_within_measure_bounds():
    s = IntervalUnion(((0.0, 0.3),))
    a = IntervalUnion(((-1.0, 0.5), (1.0, 2.5)))
    report = herglotz_value_distribution(lambda z: 1j * np.sqrt(z), a, s, 0.1)
    assert 0.0 <= report.value <= a.measure


def test_herglotz_rejects_bad_inputs():
    with pytest.raises(ValueError):
        herglotz_value_distribution(minus_inverse, A_UNIT, IntervalUnion.real_line(), 0.0)
    with pytest.raises(ValueError):
        herglotz_value_distribution(minus_inverse, IntervalUnion.positive_half(), IntervalUnion.real_line(), 0.1)
    with pytest.raises(QuadratureError):
        herglotz_value_distribution(lambda z: complex(math.nan, 1.0), A_UNIT, IntervalUnion.real_line(), 0.1)


def test_free_targets():
    assert free_asymptotic_distribution(A_UNIT, IntervalUnion.positive_half()) == pytest.approx(0.5)
    assert free_asymptotic_distribution(A_UNIT, IntervalUnion.negative_half()) == pytest.approx(0.5)
    assert free_asymptotic_distribution(A_UNIT, IntervalUnion.real_line()) == pytest.approx(1.0)


def test_free_target_gap_on_negative_half_line():
    a = IntervalUnion(((-2.0, -1.0),))
    s = IntervalUnion.negative_half()
    assert free_asymptotic_distribution(a, s) == pytest.approx(1.0)
    assert free_asymptotic_distribution(a, s.negate()) == pytest.approx(0.0)


def test_free_target_partial_preimage():
    # -√|λ| ∈ (-1, 0) for λ ∈ (-1, 0)
    a = IntervalUnion(((-2.0, -0.5),))
    assert free_asymptotic_distribution(a, IntervalUnion(((-1.0, 0.0),))) == pytest.approx(0.5)


def test_free_target_matches_quadrature_at_small_offset():
    s = IntervalUnion(((0.5, 3.0),))
    report = herglotz_value_distribution(lambda z: 1j * np.sqrt(z), A_UNIT, s, 1e-6)
    assert report.value == pytest.approx(free_asymptotic_distribution(A_UNIT, s), abs=1e-4)


def test_ladder_settles():
    result = ladder_value_distribution(minus_inverse, A_UNIT, IntervalUnion(((-1.0, -0.5),)), (0.1, 0.01, 0.001))
    assert result.stable
    assert len(result.reports) == 3
    assert result.chosen.d_used == 0.001
    assert result.error_proxy <= 1e-2
    assert result.chosen.value == pytest.approx(1.0, abs=1e-2)


def test_ladder_single_rung_is_unsettled():
    result = ladder_value_distribution(minus_inverse, A_UNIT, IntervalUnion(((-1.0, -0.5),)), (0.01,))
    assert not result.stable
    assert math.isnan(result.error_proxy)


@pytest.mark.parametrize("ladder", [(), (0.1, 0.1), (0.01, 0.1), (0.1, -0.01)])
def test_ladder_rejects(ladder):
    with pytest.raises(ValueError):
        ladder_value_distribution(minus_inverse, A_UNIT, IntervalUnion.real_line(), ladder)


def test_error_proxy_shrinks():
    s = IntervalUnion(((-1.0, -0.5),))
    assert empirical_error_proxy(minus_inverse, A_UNIT, s, 1e-3) < empirical_error_proxy(minus_inverse, A_UNIT, s, 1e-1)


def test_real_function_linear():
    measure = real_function_value_distribution(lambda x: x, IntervalUnion(((0.0, 3.0),)), IntervalUnion(((1.0, 2.0),)))
    assert measure == pytest.approx(1.0, abs=1e-10)


def test_real_function_oscillating():
    a = IntervalUnion(((0.0, 2.0 * math.pi),))
    measure = real_function_value_distribution(np.sin, a, IntervalUnion.positive_half())
    assert measure == pytest.approx(math.pi, abs=1e-9)


def test_real_function_many_crossings_are_refined():
    a = IntervalUnion(((0.0, 1.0),))
    policy = SamplingPolicy(points=11, refinements=6)
    positive = IntervalUnion.positive_half()
    measure = real_function_value_distribution(lambda x: np.sin(50.0 * x), a, positive, policy)
    # eight positive half waves of length π/50 fit in [0, 1]
    assert measure == pytest.approx(8.0 * math.pi / 50.0, abs=1e-9)


def test_real_function_nan_counts_outside():
    a = IntervalUnion(((0.0, 1.0),))
    assert real_function_value_distribution(lambda x: np.full_like(x, np.nan), a, IntervalUnion.real_line()) == 0.0


def test_sampling_policy_validation():
    with pytest.raises(ValueError):
        SamplingPolicy(points=1)
    with pytest.raises(ValueError):
        SamplingPolicy(refinements=-1)


def test_compare_value_distributions():
    assert compare_value_distributions(0.5, 0.55, A_UNIT, 0.1, 0.0)
    assert not compare_value_distributions(0.5, 0.7, A_UNIT, 0.1, 0.01)
    assert compare_value_distributions(0.5, 0.7, A_UNIT, 0.1, 0.05)
    with pytest.raises(ValueError):
        compare_value_distributions(0.5, 0.5, A_UNIT, 0.0, 0.0)
