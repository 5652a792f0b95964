import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from weylvd.potential import (
    InvalidPotential,
    InvalidWindow,
    InvalidWindowSequence,
    PotentialFileError,
    PotentialSpec,
    SparseWindowSequence,
    cumulative_norm,
    make_inverse_decay,
    make_l2_sparse,
    make_slow_oscillation,
    make_sparse_bump_train,
    read_potential_csv,
    window_norm,
    write_potential_csv,
)


def test_grid_shape():
    v = PotentialSpec.zero(10.0, 0.5)
    assert v.size == 21
    assert v.x_max == pytest.approx(10.0)
    assert_allclose(v.grid[:3], [0.0, 0.5, 1.0])


def test_samples_are_read_only():
    v = PotentialSpec.constant(1.0, 2.0, 0.5)
    with pytest.raises(ValueError):
        v.samples[0] = 3.0


@pytest.mark.parametrize(
    ("samples", "h"),
    [([1.0], 0.1), ([1.0, np.nan], 0.1), ([1.0, 2.0], 0.0), ([1.0, 2.0], -1.0)],
)
def test_invalid_potentials(samples, h):
    with pytest.raises(InvalidPotential):
        PotentialSpec(samples=np.array(samples), h=h)


def test_x_max_must_fit_grid():
    with pytest.raises(InvalidPotential):
        PotentialSpec.zero(1.0, 0.3)


def test_window_norm_constant():
    v = PotentialSpec.constant(-2.0, 10.0, 0.5)
    assert window_norm(v, 1.2, 3.7, 2) == pytest.approx(4.0 * 2.5)
    assert window_norm(v, 1.2, 3.7, 1) == pytest.approx(2.0 * 2.5)


def test_window_norm_linear_is_exact():
    v = PotentialSpec.from_function(lambda x: x, 1.0, 0.1)
    assert window_norm(v, 0.0, 1.0, 2) == pytest.approx(1.0 / 3.0)
    assert window_norm(v, 0.0, 1.0, 1) == pytest.approx(0.5)


def test_window_norm_linear_sign_change():
    v = PotentialSpec.from_function(lambda x: x - 0.5, 1.0, 1.0)
    # ∫|x - 1/2| over [0, 1]
    assert window_norm(v, 0.0, 1.0, 1) == pytest.approx(0.25)


def test_window_norm_rejects_bad_windows(step_potential):
    with pytest.raises(InvalidWindow):
        window_norm(step_potential, 2.0, 1.0, 2)
    with pytest.raises(InvalidWindow):
        window_norm(step_potential, 0.0, 100.0, 2)
    with pytest.raises(ValueError):
        window_norm(step_potential, 0.0, 1.0, 3)


@given(
    st.floats(min_value=0.0, max_value=6.0),
    st.floats(min_value=0.01, max_value=6.0),
    st.floats(min_value=0.01, max_value=8.0),
)
def test_window_norm_additive(a, first, second):
    samples = np.sin(np.arange(81) * 0.7) * 3.0
    v = PotentialSpec(samples=samples, h=0.25)
    b = a + first
    c = min(b + second, v.x_max)
    if not b < c:
        return
    total = window_norm(v, a, c, 2)
    assert total == pytest.approx(window_norm(v, a, b, 2) + window_norm(v, b, c, 2), rel=1e-10, abs=1e-12)


def test_cumulative_norm_matches_windows(step_potential):
    cumulative = cumulative_norm(step_potential, 2)
    assert cumulative[0] == 0.0
    assert cumulative[-1] == pytest.approx(window_norm(step_potential, 0.0, step_potential.x_max, 2))
    assert cumulative[20] == pytest.approx(4.0 * 5.0)


def test_evaluate_constant_cells(step_potential):
    assert_allclose(step_potential.evaluate(np.array([0.1, 4.9, 5.0, 9.99, 15.0])), [2.0, 2.0, -1.0, -1.0, 0.0])


def test_translated(step_potential):
    moved = step_potential.translated(5.0)
    assert moved.x_max == pytest.approx(15.0)
    assert moved.samples[0] == -1.0
    with pytest.raises(InvalidWindow):
        step_potential.translated(0.3)


def test_bump_train_layout(small_bump_train):
    v, windows = small_bump_train
    assert v.x_max == pytest.approx(38.0)
    assert windows.windows == ((1.0, 6.0), (7.0, 17.0), (18.0, 38.0))
    assert_allclose(windows.masses(v), 0.0)
    assert window_norm(v, 0.0, 1.0, 2) == pytest.approx(9.0)
    windows.validate(v)


def test_shipped_bump_train_extent():
    v, windows = make_sparse_bump_train(5.0, 1.0, 2.0, 6, first_gap=10.0, h=0.25)
    assert v.x_max == pytest.approx(636.0)
    assert len(windows) == 6
    assert_allclose(windows.lengths, [10.0, 20.0, 40.0, 80.0, 160.0, 320.0])


def test_raised_cosine_bumps():
    v, windows = make_sparse_bump_train(2.0, 1.0, 2.0, 2, shape="raised_cosine")
    assert v.samples.max() <= 2.0
    assert window_norm(v, 0.0, 1.0, 1) == pytest.approx(1.0, rel=1e-2)
    assert_allclose(windows.masses(v), 0.0)


@pytest.mark.parametrize("kwargs", [{"gap_growth": 1.0}, {"count": 0}, {"bump_width": 0.0}])
def test_bump_train_rejects(kwargs):
    params = {"bump_height": 1.0, "bump_width": 1.0, "gap_growth": 2.0, "count": 2} | kwargs
    with pytest.raises(InvalidPotential):
        make_sparse_bump_train(**params)


def test_window_sequence_validation(step_potential):
    with pytest.raises(InvalidWindowSequence):
        SparseWindowSequence(((5.0, 4.0),))
    with pytest.raises(InvalidWindowSequence):
        SparseWindowSequence(((5.0, 8.0), (1.0, 9.0)))
    shrinking = SparseWindowSequence(((5.0, 15.0), (16.0, 18.0)))
    with pytest.raises(InvalidWindowSequence):
        shrinking.validate(step_potential)
    heavier = SparseWindowSequence(((7.0, 8.0), (8.0, 10.0)))
    with pytest.raises(InvalidWindowSequence, match="masses"):
        heavier.validate(step_potential)


def test_window_subsequences(step_potential):
    windows = SparseWindowSequence(((0.0, 3.0), (4.0, 6.0), (10.0, 14.0), (12.0, 20.0)))
    kept = windows.monotone_subsequence(step_potential)
    assert kept.windows == ((0.0, 3.0), (10.0, 14.0), (12.0, 20.0))
    kept.validate(step_potential)


def test_l2_perturbation():
    v = PotentialSpec.zero(100.0, 0.5)
    perturbation = make_inverse_decay(100.0, 0.5, amplitude=0.5)
    combined = make_l2_sparse(v, perturbation)
    assert combined.interpolation == "constant"
    # ∫_20^∞ (0.5 / (1 + x))² = 0.25 / 21
    assert window_norm(perturbation, 20.0, 100.0, 2) <= 0.25 / 21.0
    with pytest.raises(InvalidPotential):
        make_l2_sparse(v, PotentialSpec.zero(50.0, 0.5))


def test_slow_oscillation_companion():
    v = make_slow_oscillation(100.0, 0.5)
    assert v.samples[0] == pytest.approx(1.0)
    assert v.shifted(-1.0).samples[0] == pytest.approx(0.0)


def test_csv_roundtrip(tmp_path, step_potential):
    path = tmp_path / "v.csv"
    write_potential_csv(path, step_potential)
    assert path.read_text().splitlines()[0] == "x,v"
    loaded = read_potential_csv(path)
    assert loaded.same_grid(step_potential)
    assert_allclose(loaded.samples, step_potential.samples)


@pytest.mark.parametrize(
    "content",
    ["x,v\n0,1\n", "a,b\n0,1\n1,2\n", "x,v\n0,1\n1,2\n3,1\n", "x,v\n1,1\n2,2\n", "x,v\n0,1\n1,oops\n"],
)
def test_csv_rejects(tmp_path, content):
    path = tmp_path / "v.csv"
    path.write_text(content)
    with pytest.raises(PotentialFileError):
        read_potential_csv(path)


def test_csv_missing_file(tmp_path):
    with pytest.raises(PotentialFileError):
        read_potential_csv(tmp_path / "missing.csv")
