import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from irs_aoa.geometry import (
    ArrayGeometry,
    aoa_from_positions,
    canonical_angle,
    distance,
    steering_vector,
    wraps_around,
)

angles = st.floats(0.0, 179.999, allow_nan=False)


@pytest.mark.parametrize(
    "n, angle, expected",
    [
        (4, 90.0, [1, 1, 1, 1]),
        (2, 0.0, [1, -1]),
        (3, 60.0, [1, -1j, -1]),
    ],
)
def test_steering_examples(n, angle, expected):
    v = steering_vector(ArrayGeometry(n, 0.5), angle)
    np.testing.assert_allclose(v, expected, atol=1e-15)


@given(st.integers(1, 64), st.floats(0.05, 2.0), angles)
def test_steering_unit_modulus_and_first_element(n, d, angle):
    v = steering_vector(ArrayGeometry(n, d), angle)
    assert v[0] == 1.0
    np.testing.assert_allclose(np.abs(v), 1.0, rtol=0, atol=1e-12)


@given(st.integers(1, 64), st.floats(0.05, 2.0), st.floats(0.001, 179.999))
def test_steering_conjugate_symmetry(n, d, angle):
    g = ArrayGeometry(n, d)
    np.testing.assert_allclose(
        steering_vector(g, 180.0 - angle), steering_vector(g, angle).conj(), rtol=0, atol=1e-12
    )


def test_steering_matrix_columns_match_scalar_calls():
    g = ArrayGeometry(16, 0.5)
    grid = np.linspace(0, 179.9, 1000)
    M = steering_vector(g, grid)
    assert M.shape == (16, 1000)
    for j in (0, 17, 999):
        np.testing.assert_array_equal(M[:, j], steering_vector(g, grid[j]))


def test_array_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry(0)
    with pytest.raises(ValueError):
        ArrayGeometry(4, 0.0)


def test_wraps_around():
    assert wraps_around(ArrayGeometry(8, 0.5))
    assert not wraps_around(ArrayGeometry(8, 0.4))
    g = ArrayGeometry(8, 0.5)
    np.testing.assert_allclose(steering_vector(g, 0.0), steering_vector(g, 180.0), atol=1e-12)


@pytest.mark.parametrize(
    "array, source, expected",
    [
        ((0, 0), (1, 0), 0.0),
        ((0, 0), (0, 1), 90.0),
        ((50, -50), (20, -20), 135.0),
    ],
)
def test_aoa_examples(array, source, expected):
    assert aoa_from_positions(array, source) == pytest.approx(expected, abs=1e-12)


def test_aoa_hand_computation_reference_geometry():
    # vector (-30, 30): 180 - atan(30/30) = 135 deg from +x
    assert aoa_from_positions((50, -50), (20, -20)) == pytest.approx(180.0 - 45.0, abs=1e-12)
    # mirrored axis measures from -x instead
    assert aoa_from_positions((50, -50), (20, -20), axis=-1) == pytest.approx(45.0, abs=1e-12)


def test_aoa_folds_lower_half_plane():
    # below the axis folds by reflection, keeping cos unchanged
    assert aoa_from_positions((0, 0), (1, -1)) == pytest.approx(45.0)
    assert aoa_from_positions((0, 0), (-1, -1)) == pytest.approx(135.0)


def test_aoa_degenerate():
    with pytest.raises(ValueError, match="degenerate geometry"):
        aoa_from_positions((1, 2), (1, 2))


@given(
    st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
    st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
    st.floats(0.01, 100),
)
def test_aoa_scale_invariance(a, s, t):
    if math.hypot(s[0] - a[0], s[1] - a[1]) < 1e-3:
        return
    far = (a[0] + t * (s[0] - a[0]), a[1] + t * (s[1] - a[1]))
    assert aoa_from_positions(a, far) == pytest.approx(aoa_from_positions(a, s), abs=1e-9)


@given(st.floats(-1000, 1000))
def test_canonical_angle_range_and_cos(deg):
    c = canonical_angle(deg)
    assert 0.0 <= c < 180.0
    assert math.cos(math.radians(c)) == pytest.approx(math.cos(math.radians(deg)), abs=1e-9)


@given(st.floats(0, 180, exclude_max=True))
def test_degree_radian_round_trip(deg):
    assert abs(np.rad2deg(np.deg2rad(deg)) - deg) < 1e-12


def test_distance():
    assert distance((0, 0), (0, 0)) == 0
    assert distance((0, 0), (3, 4)) == 5
    assert distance((50, -50), (20, -20)) == pytest.approx(30 * math.sqrt(2), rel=1e-15)
