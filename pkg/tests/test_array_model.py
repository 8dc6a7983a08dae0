"""Array geometry, rotation schedule, and directional gain model."""

import numpy as np
import numpy.testing as npt
import pytest

from rasense import (
    ArrayGeometry,
    GainPattern,
    RotationSchedule,
    Scene,
    channel_matrix,
    gain,
    gain_matrix,
    gain_steering_vector,
    rotation_angles,
    steering_matrix,
    steering_vector,
)


def test_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry(n_antennas=1)
    with pytest.raises(ValueError):
        ArrayGeometry(n_antennas=8, sparse_factor=0.5)
    with pytest.raises(ValueError):
        ArrayGeometry(n_antennas=8, spacing_wavelengths=0.0)
    geo = ArrayGeometry(n_antennas=8, sparse_factor=2.0)
    assert geo.spacing_wavelengths == 0.5


def test_rotation_angles_uniform_schedule():
    """Endpoints at -theta_max and +theta_max, uniform spacing, symmetric."""
    theta_max = np.deg2rad(60.0)
    sched = rotation_angles(7, theta_max)
    assert sched.m_rotations == 7
    npt.assert_allclose(sched.angles[0], -theta_max, atol=1e-15)
    npt.assert_allclose(sched.angles[-1], theta_max, atol=1e-15)
    npt.assert_allclose(np.diff(sched.angles), 2 * theta_max / 6, atol=1e-15)
    npt.assert_allclose(sched.angles + sched.angles[::-1], 0.0, atol=1e-15)


def test_rotation_angles_rejects_single_rotation():
    with pytest.raises(ValueError):
        rotation_angles(1, np.deg2rad(60.0))


def test_rotation_angles_rejects_bad_range():
    with pytest.raises(ValueError):
        rotation_angles(7, 0.0)
    with pytest.raises(ValueError):
        rotation_angles(7, np.pi / 2)


def test_schedule_rejects_non_uniform_angles():
    theta_max = np.deg2rad(60.0)
    angles = np.linspace(-theta_max, theta_max, 5)
    angles[2] += 1e-3
    with pytest.raises(ValueError):
        RotationSchedule(m_rotations=5, theta_max=theta_max, angles=angles)


def test_schedule_angles_read_only():
    sched = rotation_angles(3, 1.0)
    with pytest.raises(ValueError):
        sched.angles[0] = 0.0


def test_single_rotation_schedule_constructible_for_analysis():
    sched = RotationSchedule(m_rotations=1, theta_max=1.0, angles=np.array([0.2]))
    assert sched.angles.shape == (1,)


def test_peak_gain_value():
    """G = 2(2p+1): integral of G cos^{2p} over the half-plane equals 2 pi."""
    for p in (0.0, 1.0, 3.0, 5.5):
        assert GainPattern(directivity=p).peak_gain == 2.0 * (2.0 * p + 1.0)


def test_peak_gain_conserves_power():
    pattern = GainPattern(directivity=4.0)
    phi = 0.3
    theta = np.linspace(-np.pi, np.pi, 400001)
    total = np.trapezoid(gain(theta, phi, pattern), theta)
    npt.assert_allclose(total, 2 * np.pi, rtol=1e-6)


def test_gain_values_and_support():
    pattern = GainPattern(directivity=2.0)
    g0 = gain(0.4, 0.4, pattern)
    assert g0 == pytest.approx(pattern.peak_gain)
    # cos^4 at an offset of pi/3: G * (1/2)^4
    assert gain(0.4 + np.pi / 3, 0.4, pattern) == pytest.approx(pattern.peak_gain / 16)
    assert gain(0.4 + np.pi / 2 + 1e-6, 0.4, pattern) == 0.0
    assert gain(0.4 - np.pi / 2 - 1e-6, 0.4, pattern) == 0.0


def test_gain_broadcasts():
    pattern = GainPattern(directivity=1.0)
    thetas = np.array([0.0, 0.5, 1.0])
    phis = np.array([-0.2, 0.1])
    out = gain(thetas[None, :], phis[:, None], pattern)
    assert out.shape == (2, 3)
    assert out[1, 2] == pytest.approx(gain(1.0, 0.1, pattern))


def test_steering_vector_phases():
    geo = ArrayGeometry(n_antennas=4, sparse_factor=2.0)
    theta = np.deg2rad(15.0)
    a = steering_vector(theta, geo)
    expected = np.exp(1j * 2 * np.pi * 0.5 * 2.0 * np.arange(4) * np.sin(theta))
    npt.assert_allclose(a, expected, atol=1e-15)
    assert a[0] == 1.0 + 0.0j
    npt.assert_allclose(np.abs(a), 1.0, atol=1e-15)


def test_steering_matrix_columns():
    geo = ArrayGeometry(n_antennas=5)
    thetas = np.deg2rad([-30.0, 0.0, 45.0])
    mat = steering_matrix(thetas, geo)
    assert mat.shape == (5, 3)
    for i, th in enumerate(thetas):
        npt.assert_array_equal(mat[:, i], steering_vector(th, geo))


def test_gain_steering_vector_entries():
    sched = rotation_angles(5, np.deg2rad(60.0))
    pattern = GainPattern(directivity=3.0)
    theta = np.deg2rad(20.0)
    b = gain_steering_vector(theta, sched, pattern)
    npt.assert_allclose(b, np.sqrt(gain(theta, sched.angles, pattern)), atol=1e-15)
    assert np.all(b >= 0.0)
    assert np.linalg.norm(b) > 0.0


def test_gain_matrix_never_all_zero_inside_range():
    """Any |theta| < pi/2 keeps at least one boresight within a quarter turn."""
    sched = rotation_angles(2, np.deg2rad(60.0))
    pattern = GainPattern(directivity=6.0)
    thetas = np.deg2rad(np.linspace(-89.9, 89.9, 721))
    b = gain_matrix(thetas, sched, pattern)
    assert np.all(np.linalg.norm(b, axis=0) > 0.0)


def test_channel_matrix_composition():
    geo = ArrayGeometry(n_antennas=6, sparse_factor=2.0)
    sched = rotation_angles(4, np.deg2rad(60.0))
    pattern = GainPattern(directivity=2.0)
    scene = Scene.from_degrees([-20.0, 15.0], scatterings=[1.0 + 0.5j, 0.8])
    h = channel_matrix(scene, 2, geo, sched, pattern)
    assert h.shape == (6, 2)
    for k in range(2):
        a_k = steering_vector(scene.doas[k], geo)
        b_k = gain_steering_vector(scene.doas[k], sched, pattern)[2]
        npt.assert_allclose(h[:, k], scene.scatterings[k] * b_k * a_k, atol=1e-14)


def test_channel_matrix_rejects_out_of_range_rotation():
    geo = ArrayGeometry(n_antennas=4)
    sched = rotation_angles(3, 1.0)
    pattern = GainPattern()
    scene = Scene.from_degrees([10.0])
    with pytest.raises(ValueError):
        channel_matrix(scene, 3, geo, sched, pattern)
    with pytest.raises(ValueError):
        channel_matrix(scene, -1, geo, sched, pattern)
