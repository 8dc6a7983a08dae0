"""Physical model of a uniform sparse array of rotatable antennas.

A rotatable antenna (RA) is a directional element whose boresight can be
re-pointed electronically while its position stays fixed.  The array is a
uniform linear array with inter-element spacing ``sparse_factor * d`` where
``d`` is half a wavelength by default.  All N elements rotate synchronously
through a shared schedule of M boresight angles covering the sensing range.

Everything here is a pure function of its inputs: angles are radians, values
are immutable after construction, and no state is shared between calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .scene import Scene

__all__ = [
    "ArrayGeometry",
    "RotationSchedule",
    "GainPattern",
    "rotation_angles",
    "gain",
    "steering_vector",
    "steering_matrix",
    "gain_steering_vector",
    "gain_matrix",
    "channel_matrix",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array geometry.

    Parameters
    ----------
    n_antennas : int
        Number of array elements N, at least 2.
    sparse_factor : float
        Spacing multiplier L >= 1.  L = 1 is the dense array; L > 1 enlarges
        the aperture at the cost of grating lobes.  L may be any real >= 1,
        but the grating-lobe predictor assumes the sin v = sin t + 2z/L form.
    spacing_wavelengths : float
        Base element spacing as a fraction of the wavelength (d / lambda),
        0.5 by default.
    """

    n_antennas: int
    sparse_factor: float = 1.0
    spacing_wavelengths: float = 0.5

    def __post_init__(self) -> None:
        if self.n_antennas < 2:
            raise ValueError(f"n_antennas must be >= 2, got {self.n_antennas}")
        if not np.isfinite(self.sparse_factor) or self.sparse_factor < 1.0:
            raise ValueError(f"sparse_factor must be >= 1, got {self.sparse_factor}")
        if not np.isfinite(self.spacing_wavelengths) or self.spacing_wavelengths <= 0.0:
            raise ValueError(
                f"spacing_wavelengths must be > 0, got {self.spacing_wavelengths}"
            )


@dataclass(frozen=True, eq=False)
class RotationSchedule:
    """Synchronous boresight rotation schedule.

    ``angles`` holds the M rotation angles.  For M >= 2 they must follow the
    uniform schedule ``-theta_max + 2*(m-1)*theta_max/(M-1)``, which is
    strictly increasing, symmetric about 0, and spans [-theta_max, theta_max].
    Use :func:`rotation_angles` to build one.  An explicit single-angle
    schedule (M = 1) may be constructed directly for analysis — the gain
    correlation is then identically 1 and carries no angle information, which
    is exactly why the estimation pipeline requires M >= 2.
    """

    m_rotations: int
    theta_max: float
    angles: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.m_rotations < 1:
            raise ValueError(f"m_rotations must be >= 1, got {self.m_rotations}")
        if not 0.0 < self.theta_max < np.pi / 2:
            raise ValueError(
                f"theta_max must lie in (0, pi/2) radians, got {self.theta_max}"
            )
        angles = np.asarray(self.angles, dtype=float)
        if angles.shape != (self.m_rotations,):
            raise ValueError(
                f"expected {self.m_rotations} rotation angles, got shape {angles.shape}"
            )
        if self.m_rotations >= 2:
            expected = _uniform_angles(self.m_rotations, self.theta_max)
            if not np.allclose(angles, expected, rtol=0.0, atol=1e-12):
                raise ValueError(
                    "angles do not follow the uniform rotation schedule for "
                    f"M={self.m_rotations}, theta_max={self.theta_max}"
                )
        elif abs(angles[0]) >= np.pi / 2:
            raise ValueError("single rotation angle must lie in (-pi/2, pi/2)")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)


def _uniform_angles(m_rotations: int, theta_max: float) -> np.ndarray:
    m = np.arange(1, m_rotations + 1, dtype=float)
    return -theta_max + 2.0 * (m - 1.0) * theta_max / (m_rotations - 1.0)


def rotation_angles(m_rotations: int, theta_max: float) -> RotationSchedule:
    """Build the uniform rotation schedule over [-theta_max, theta_max].

    Parameters
    ----------
    m_rotations : int
        Number of synchronous rotations M, at least 2 (the schedule formula
        divides by M - 1, and a single rotation cannot disambiguate angles).
    theta_max : float
        Sensing half-range in radians, in (0, pi/2).

    Returns
    -------
    RotationSchedule
    """
    if m_rotations < 2:
        raise ValueError(
            f"m_rotations must be >= 2, got {m_rotations}: the uniform schedule "
            "divides by M - 1, and a single rotation carries no angle diversity"
        )
    if not 0.0 < theta_max < np.pi / 2:
        raise ValueError(f"theta_max must lie in (0, pi/2) radians, got {theta_max}")
    return RotationSchedule(
        m_rotations=m_rotations,
        theta_max=theta_max,
        angles=_uniform_angles(m_rotations, theta_max),
    )


@dataclass(frozen=True)
class GainPattern:
    """Directional power-gain pattern of a single rotatable antenna.

    The power gain at arrival angle ``theta`` for boresight ``phi`` is
    ``G * cos(theta - phi) ** (2p)`` inside the half-plane
    ``|theta - phi| <= pi/2`` and exactly 0 outside, where the peak gain
    ``G = 2 * (2p + 1)`` follows from power conservation.
    """

    directivity: float = 3.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.directivity) or self.directivity < 0.0:
            raise ValueError(f"directivity must be >= 0, got {self.directivity}")

    @property
    def peak_gain(self) -> float:
        """Boresight power gain G = 2 * (2p + 1)."""
        return 2.0 * (2.0 * self.directivity + 1.0)


def gain(theta, phi, pattern: GainPattern):
    """Power gain of one antenna at arrival angle ``theta`` with boresight ``phi``.

    Broadcasts over array-valued ``theta`` / ``phi``.  Total function: 0
    outside the main-lobe half-plane, continuous at the |theta - phi| = pi/2
    boundary for p > 0.
    """
    delta = np.asarray(theta, dtype=float) - np.asarray(phi, dtype=float)
    # cos may round to a tiny negative inside the closed support; clamp at 0.
    c = np.clip(np.cos(delta), 0.0, None)
    g = pattern.peak_gain * c ** (2.0 * pattern.directivity)
    out = np.where(np.abs(delta) <= np.pi / 2, g, 0.0)
    return out if out.ndim else float(out)


def steering_vector(theta: float, geometry: ArrayGeometry) -> np.ndarray:
    """Array steering vector a(theta) of length N.

    Entry n is ``exp(1j * 2*pi * (d/lambda) * L * n * sin(theta))``; all
    entries are unit modulus and the first is exactly 1.
    """
    return steering_matrix(np.asarray([theta], dtype=float), geometry)[:, 0]


def steering_matrix(thetas, geometry: ArrayGeometry) -> np.ndarray:
    """Steering vectors for several angles, stacked as columns (N x len(thetas))."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    n = np.arange(geometry.n_antennas, dtype=float)
    phase = (
        2.0
        * np.pi
        * geometry.spacing_wavelengths
        * geometry.sparse_factor
        * np.outer(n, np.sin(thetas))
    )
    return np.exp(1j * phase)


def gain_steering_vector(
    theta: float, schedule: RotationSchedule, pattern: GainPattern
) -> np.ndarray:
    """Amplitude gains sqrt(g(theta, phi_m)) across the schedule, length M.

    Non-negative real; guaranteed a nonzero norm for any |theta| < pi/2
    (the boresight nearest theta is always within the main-lobe half-plane).
    """
    return gain_matrix(np.asarray([theta], dtype=float), schedule, pattern)[:, 0]


def gain_matrix(thetas, schedule: RotationSchedule, pattern: GainPattern) -> np.ndarray:
    """Gain steering vectors for several angles, stacked as columns (M x len(thetas))."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    g = gain(thetas[None, :], schedule.angles[:, None], pattern)
    b = np.sqrt(g)
    norms = np.linalg.norm(b, axis=0)
    if np.any(norms == 0.0):
        bad = thetas[norms == 0.0]
        raise AssertionError(f"all-zero gain steering vector at theta={bad}")
    return b


def channel_matrix(
    scene: "Scene",
    rotation_index: int,
    geometry: ArrayGeometry,
    schedule: RotationSchedule,
    pattern: GainPattern,
) -> np.ndarray:
    """Sensing channel H_m = A diag(b_m) diag(alpha) for one rotation.

    ``rotation_index`` is 0-based (0 .. M-1); column k is
    ``alpha_k * b_{m,k} * a(theta_k)``.
    """
    if not 0 <= rotation_index < schedule.m_rotations:
        raise ValueError(
            f"rotation_index must be in [0, {schedule.m_rotations - 1}], "
            f"got {rotation_index}"
        )
    a = steering_matrix(scene.doas, geometry)
    b_m = gain_matrix(scene.doas, schedule, pattern)[rotation_index, :]
    return a * (b_m * scene.scatterings)[None, :]
