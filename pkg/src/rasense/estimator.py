"""Steering-vector correlation (SVC) analysis and the DOA grid search.

The array SVC is the normalized squared correlation between array steering
vectors at two angles; for a sparse array it equals a Dirichlet-kernel
ratio and reaches 1 not only at the true angle but at every grating lobe,
which is what makes sparse-array DOA estimation ambiguous on its own.  The
gain SVC is the same quantity for the rotation-gain vectors; it has a
single global maximum at the true angle.  Their product, the joint SVC,
also equals the normalized correlation of the Kronecker-combined vectors
a(theta) (x) b(theta), so grating lobes are suppressed while the true angle
keeps a correlation of exactly 1.

:func:`estimate_doas` exploits that: each estimated component column pair
(a_k, b_k) is matched against the grid of joint steering vectors through
the product form (O(N + M) per grid point instead of O(N*M)), and the best
grid point is sharpened with a three-point parabolic fit.

All SVC functions accept a scalar or an array of probe angles and are
symmetric in their two angle arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_model import (
    ArrayGeometry,
    GainPattern,
    RotationSchedule,
    gain_matrix,
    gain_steering_vector,
    steering_matrix,
    steering_vector,
)
from .tensor_ops import kronecker_vec

__all__ = [
    "AngularGrid",
    "DoaEstimate",
    "GratingLobes",
    "array_svc",
    "array_svc_closed_form",
    "gain_svc",
    "joint_svc",
    "joint_svc_kronecker",
    "grating_lobe_angles",
    "correlation_spectra",
    "estimate_doas",
    "parabolic_refine",
]

_SIN_FLOOR = 1e-12
_FLAT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Uniform search grid over [lo, hi] radians.

    ``points`` covers the interval end to end with uniform spacing at most
    ``resolution``; build through :func:`AngularGrid.linear` or
    :func:`AngularGrid.from_degrees`.
    """

    lo: float
    hi: float
    resolution: float
    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not -np.pi / 2 < self.lo < self.hi < np.pi / 2:
            raise ValueError(
                f"need -pi/2 < lo < hi < pi/2, got lo={self.lo}, hi={self.hi}"
            )
        if self.resolution <= 0.0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 1 or points.size < 2:
            raise ValueError("grid needs at least two points")
        steps = np.diff(points)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=0, atol=1e-15):
            raise ValueError("grid points must be uniformly increasing")
        if steps[0] > self.resolution * (1 + 1e-12):
            raise ValueError("grid spacing exceeds the stated resolution")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def step(self) -> float:
        """Actual uniform spacing between grid points."""
        return float(self.points[1] - self.points[0])

    @classmethod
    def linear(cls, lo: float, hi: float, resolution: float) -> "AngularGrid":
        """Smallest uniform grid covering [lo, hi] with spacing <= resolution."""
        if resolution <= 0.0:
            raise ValueError(f"resolution must be > 0, got {resolution}")
        n = int(np.ceil((hi - lo) / resolution - 1e-9)) + 1
        return cls(lo=lo, hi=hi, resolution=resolution, points=np.linspace(lo, hi, n))

    @classmethod
    def from_degrees(cls, lo_deg: float, hi_deg: float, step_deg: float) -> "AngularGrid":
        return cls.linear(np.deg2rad(lo_deg), np.deg2rad(hi_deg), np.deg2rad(step_deg))


@dataclass(frozen=True, eq=False)
class DoaEstimate:
    """Result of a K-target angle search.

    ``angles`` are sorted ascending; ``peak_scores`` and ``low_confidence``
    are aligned with them.  Scores are the attained search-objective maxima,
    normalized into [0, 1].  ``spectra``, when kept, holds each target's
    objective over the full grid (rows aligned with ``angles``).
    """

    angles: np.ndarray
    peak_scores: np.ndarray
    low_confidence: np.ndarray
    spectra: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_targets(self) -> int:
        return self.angles.size

    def angles_deg(self) -> np.ndarray:
        return np.rad2deg(self.angles)


@dataclass(frozen=True, eq=False)
class GratingLobes:
    """Angles at which a sparse array's steering correlation returns to 1.

    ``angles`` are sorted ascending and include the true angle itself;
    ``orders`` holds the matching integer lobe order z, with z = 0 marking
    the true angle and every other order a spurious lobe.
    """

    angles: np.ndarray
    orders: np.ndarray

    @property
    def true_angle(self) -> float:
        return float(self.angles[self.orders == 0][0])

    @property
    def spurious_angles(self) -> np.ndarray:
        return self.angles[self.orders != 0]


def array_svc(theta_k: float, theta, geometry: ArrayGeometry):
    """Normalized squared correlation of array steering vectors.

    Evaluates |a(theta_k)^H a(theta)|^2 / N^2; 1 exactly when the two
    steering vectors coincide (theta = theta_k or a grating lobe), 0 at the
    Dirichlet nulls.  ``theta`` may be a scalar or an array.
    """
    a_k = steering_vector(theta_k, geometry)
    a = steering_matrix(theta, geometry)
    n = geometry.n_antennas
    val = np.abs(a_k.conj() @ a) ** 2 / n**2
    return _match_shape(val, theta)


def array_svc_closed_form(theta_k: float, theta, geometry: ArrayGeometry):
    """Dirichlet-kernel form of :func:`array_svc`.

    sin^2(N u) / (N^2 sin^2(u)) with u = pi * (d / lambda) * L *
    (sin theta - sin theta_k); the removable singularity at sin u = 0 (the
    true angle and every grating lobe) evaluates to 1.
    """
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    n = geometry.n_antennas
    u = (
        np.pi
        * geometry.spacing_wavelengths
        * geometry.sparse_factor
        * (np.sin(theta_arr) - np.sin(theta_k))
    )
    den = np.sin(u)
    singular = np.abs(den) < _SIN_FLOOR
    safe_den = np.where(singular, 1.0, den)
    val = np.where(singular, 1.0, (np.sin(n * u) / (n * safe_den)) ** 2)
    return _match_shape(val, theta)


def gain_svc(theta_k: float, theta, schedule: RotationSchedule, pattern: GainPattern):
    """Normalized squared correlation of rotation-gain vectors.

    (b(theta_k)^T b(theta))^2 / (||b(theta_k)||^2 ||b(theta)||^2); both
    vectors are entrywise non-negative, so the value is in [0, 1] with 1 at
    theta = theta_k.  With at least two distinct rotation angles this has a
    single global maximum there, which is what disambiguates grating lobes.
    """
    b_k = gain_steering_vector(theta_k, schedule, pattern)
    b = gain_matrix(theta, schedule, pattern)
    val = (b_k @ b) ** 2 / (b_k @ b_k * np.sum(b * b, axis=0))
    return _match_shape(val, theta)


def joint_svc(
    theta_k: float,
    theta,
    geometry: ArrayGeometry,
    schedule: RotationSchedule,
    pattern: GainPattern,
):
    """Product of array and gain SVC.

    Equals the normalized squared correlation of the Kronecker-combined
    steering vectors (see :func:`joint_svc_kronecker` for the literal
    evaluation); computed here as the product, which costs O(N + M) per
    angle instead of O(N * M).
    """
    return array_svc(theta_k, theta, geometry) * gain_svc(theta_k, theta, schedule, pattern)


def joint_svc_kronecker(
    theta_k: float,
    theta,
    geometry: ArrayGeometry,
    schedule: RotationSchedule,
    pattern: GainPattern,
):
    """Joint SVC evaluated literally on NM-length Kronecker vectors.

    Materializes c(theta) = a(theta) (x) b(theta) per angle.  Exists as the
    independent cross-check of the product form; prefer :func:`joint_svc`.
    """
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    c_k = kronecker_vec(
        steering_vector(theta_k, geometry),
        gain_steering_vector(theta_k, schedule, pattern),
    )
    out = np.empty(theta_arr.shape)
    for i, th in enumerate(theta_arr):
        c = kronecker_vec(
            steering_vector(th, geometry),
            gain_steering_vector(th, schedule, pattern),
        )
        out[i] = np.abs(c_k.conj() @ c) ** 2 / (
            (c_k.conj() @ c_k).real * (c.conj() @ c).real
        )
    return _match_shape(out, theta)


def grating_lobe_angles(
    theta_k: float, geometry: ArrayGeometry, lo: float, hi: float
) -> GratingLobes:
    """All angles in [lo, hi] whose steering vector matches theta_k's exactly.

    Solves sin(v) = sin(theta_k) + z / (L * d/lambda) over the integers z;
    z = 0 recovers theta_k itself and is flagged through ``orders``.  For
    L = 1 at half-wavelength spacing the true angle is the only in-range
    solution, which is exactly the dense array's freedom from ambiguity.
    """
    if not -np.pi / 2 < lo <= hi < np.pi / 2:
        raise ValueError(f"need -pi/2 < lo <= hi < pi/2, got lo={lo}, hi={hi}")
    if abs(theta_k) >= np.pi / 2:
        raise ValueError(f"theta_k must lie inside (-pi/2, pi/2), got {theta_k}")
    s = np.sin(theta_k)
    stride = 1.0 / (geometry.spacing_wavelengths * geometry.sparse_factor)
    z_lo = int(np.ceil((np.sin(lo) - s) / stride - 1e-12))
    z_hi = int(np.floor((np.sin(hi) - s) / stride + 1e-12))
    orders = np.arange(z_lo, z_hi + 1)
    # the boundary tolerances above can admit a sine a hair outside [-1, 1]
    angles = np.arcsin(np.clip(s + orders * stride, -1.0, 1.0))
    keep = (angles >= lo - 1e-15) & (angles <= hi + 1e-15)
    return GratingLobes(angles=angles[keep], orders=orders[keep])


def correlation_spectra(
    a_hat: np.ndarray,
    b_hat: np.ndarray,
    geometry: ArrayGeometry,
    schedule: RotationSchedule,
    pattern: GainPattern,
    grid: AngularGrid,
) -> np.ndarray:
    """Per-component search objective over the grid, shape (K, len(grid)).

    Row k is the normalized squared correlation between the Kronecker
    combination a_hat[:, k] (x) b_hat[:, k] and the joint steering vector at
    each grid angle, evaluated through the factored product form.  Invariant
    to any nonzero complex rescaling of either column.
    """
    a_hat = np.atleast_2d(np.asarray(a_hat))
    b_hat = np.atleast_2d(np.asarray(b_hat))
    if a_hat.shape[1] != b_hat.shape[1]:
        raise ValueError(
            f"factor column counts differ: {a_hat.shape[1]} vs {b_hat.shape[1]}"
        )
    a_grid = steering_matrix(grid.points, geometry)
    b_grid = gain_matrix(grid.points, schedule, pattern)

    num_a = np.abs(a_hat.conj().T @ a_grid) ** 2
    num_b = np.abs(b_hat.conj().T @ b_grid) ** 2
    den_a = np.sum(np.abs(a_hat) ** 2, axis=0)[:, None] * np.sum(
        np.abs(a_grid) ** 2, axis=0
    )
    den_b = np.sum(np.abs(b_hat) ** 2, axis=0)[:, None] * np.sum(b_grid**2, axis=0)
    if np.any(den_a == 0.0) or np.any(den_b == 0.0):
        raise ValueError("factor columns must be nonzero")
    return (num_a / den_a) * (num_b / den_b)


def parabolic_refine(y_left: float, y_mid: float, y_right: float) -> float:
    """Sub-grid offset of a peak from three equally spaced samples.

    Returns the vertex offset in grid-step units, clamped to [-1, 1]; 0 when
    the three points carry no curvature.
    """
    denom = y_left - 2.0 * y_mid + y_right
    if denom == 0.0 or not np.isfinite(denom):
        return 0.0
    delta = 0.5 * (y_left - y_right) / denom
    return float(np.clip(delta, -1.0, 1.0))


def estimate_doas(
    factors,
    geometry: ArrayGeometry,
    schedule: RotationSchedule,
    pattern: GainPattern,
    grid: AngularGrid,
    *,
    keep_spectra: bool = False,
) -> DoaEstimate:
    """Angle estimates from CP factor matrices via correlation search.

    Parameters
    ----------
    factors : CpDecomposition or (ndarray, ndarray)
        The array factor (N x K) and gain factor (M x K), either as the
        decomposition object or a plain pair.  Column scaling, phase, and
        order do not affect the returned angle set.
    geometry, schedule, pattern
        Configuration the measurements were taken with.
    grid : AngularGrid
        Search grid; estimates are refined below its resolution with a
        three-point parabolic fit and never move more than one grid step.
    keep_spectra : bool
        Attach the per-target objective curves to the result.

    Returns
    -------
    DoaEstimate
        Angles sorted ascending.  A target whose objective is flat over the
        whole grid (peak minus median below 1e-12) keeps its argmax but is
        flagged low-confidence.
    """
    if hasattr(factors, "a") and hasattr(factors, "b"):
        a_hat, b_hat = factors.a, factors.b
    else:
        a_hat, b_hat = factors
    spectra = correlation_spectra(a_hat, b_hat, geometry, schedule, pattern, grid)

    k = spectra.shape[0]
    angles = np.empty(k)
    scores = np.empty(k)
    low_conf = np.empty(k, dtype=bool)
    for i in range(k):
        row = spectra[i]
        best = int(np.argmax(row))
        theta = grid.points[best]
        if 0 < best < row.size - 1:
            delta = parabolic_refine(row[best - 1], row[best], row[best + 1])
            theta = theta + delta * grid.step
        angles[i] = theta
        scores[i] = row[best]
        low_conf[i] = (row[best] - np.median(row)) < _FLAT_FLOOR

    order = np.argsort(angles, kind="stable")
    return DoaEstimate(
        angles=angles[order],
        peak_scores=scores[order],
        low_confidence=low_conf[order],
        spectra=spectra[order] if keep_spectra else None,
    )


def _match_shape(values: np.ndarray, reference) -> np.ndarray | float:
    """Return a scalar for scalar input, the array otherwise."""
    if np.ndim(reference) == 0:
        return float(np.asarray(values).reshape(-1)[0])
    return np.asarray(values)
