"""MUSIC DOA estimation for the omnidirectional-antenna baselines.

The baseline receivers cannot exploit rotation structure, so the M
per-rotation snapshot blocks are concatenated into one N x MT matrix (same
data volume as the tensor pipeline), reduced to a sample covariance, and
scanned with the classic noise-subspace pseudo-spectrum

    P(theta) = 1 / || E_n^H a(theta) ||^2

where E_n spans the N - K smallest-eigenvalue directions.  Peak picking is
a 3-point local-maximum scan over the grid with the same parabolic
refinement the tensor search uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_model import ArrayGeometry, steering_matrix
from .estimator import AngularGrid, DoaEstimate, parabolic_refine
from .scene import aggregate_snapshots

__all__ = [
    "CovarianceEstimate",
    "sample_covariance",
    "music_spectrum",
    "music_estimate",
]

_SPECTRUM_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    """Sample covariance of array snapshots.

    ``matrix`` is Hermitian by construction (symmetrized after the outer
    product); eigenvalues may dip a hair below zero through rounding but no
    further than rounding explains.
    """

    matrix: np.ndarray
    snapshot_count: int

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"covariance must be square, got shape {m.shape}")
        if self.snapshot_count < 1:
            raise ValueError(f"snapshot_count must be >= 1, got {self.snapshot_count}")
        herm_gap = np.max(np.abs(m - m.conj().T))
        if herm_gap > 1e-12 * max(1.0, float(np.abs(np.trace(m)))):
            raise ValueError(f"covariance is not Hermitian (gap {herm_gap:.3e})")


def sample_covariance(snapshots: np.ndarray) -> CovarianceEstimate:
    """(1/Q) Y Y^H of an N x Q snapshot matrix, Hermitian-symmetrized."""
    y = np.asarray(snapshots)
    if y.ndim != 2:
        raise ValueError(f"expected an N x Q matrix, got ndim={y.ndim}")
    n, q = y.shape
    if q < 1:
        raise ValueError("need at least one snapshot")
    r = (y @ y.conj().T) / q
    r = (r + r.conj().T) / 2.0
    return CovarianceEstimate(matrix=r, snapshot_count=q)


def music_spectrum(
    cov: CovarianceEstimate,
    n_sources: int,
    thetas,
    geometry: ArrayGeometry,
) -> np.ndarray:
    """Noise-subspace pseudo-spectrum over the probe angles.

    Unit-gain (omnidirectional) steering vectors throughout; the value is
    invariant to overall covariance scaling.  Peaks mark candidate DOAs but
    carry no absolute meaning.
    """
    n = cov.matrix.shape[0]
    if not 1 <= n_sources < n:
        raise ValueError(
            f"n_sources must satisfy 1 <= K < N={n}, got {n_sources}"
        )
    if n != geometry.n_antennas:
        raise ValueError(
            f"covariance size {n} does not match geometry with "
            f"N={geometry.n_antennas}"
        )
    _, vecs = np.linalg.eigh(cov.matrix)
    noise_basis = vecs[:, : n - n_sources]
    a = steering_matrix(np.atleast_1d(np.asarray(thetas, dtype=float)), geometry)
    denom = np.sum(np.abs(noise_basis.conj().T @ a) ** 2, axis=0)
    return 1.0 / np.maximum(denom, _SPECTRUM_FLOOR)


def music_estimate(
    tensor: np.ndarray,
    n_sources: int,
    geometry: ArrayGeometry,
    grid: AngularGrid,
    *,
    keep_spectrum: bool = False,
) -> DoaEstimate:
    """MUSIC angle estimates from a raw (N, M, T) measurement tensor.

    Aggregates all rotations into MT snapshots, then returns the K largest
    local maxima of the pseudo-spectrum, parabolically refined and sorted by
    angle.  When the spectrum has fewer than K local maxima (the ambiguous
    sparse-array regime), the remaining picks fall back to the highest
    unclaimed grid values and are flagged low-confidence.

    ``peak_scores`` are spectrum values normalized by the global maximum.
    With ``keep_spectrum`` the full (normalized) spectrum is attached, one
    identical row per target.
    """
    cov = sample_covariance(aggregate_snapshots(tensor))
    spectrum = music_spectrum(cov, n_sources, grid.points, geometry)

    peaks = _local_maxima(spectrum)
    order = peaks[np.argsort(-spectrum[peaks], kind="stable")]
    chosen = list(order[:n_sources])
    padded = n_sources - len(chosen)
    if padded > 0:
        fallback = np.argsort(-spectrum, kind="stable")
        for idx in fallback:
            if len(chosen) == n_sources:
                break
            if idx not in chosen:
                chosen.append(int(idx))

    top = spectrum.max()
    angles = np.empty(n_sources)
    scores = np.empty(n_sources)
    low_conf = np.zeros(n_sources, dtype=bool)
    for i, idx in enumerate(chosen):
        theta = grid.points[idx]
        if 0 < idx < spectrum.size - 1:
            delta = parabolic_refine(
                spectrum[idx - 1], spectrum[idx], spectrum[idx + 1]
            )
            theta = theta + delta * grid.step
        angles[i] = theta
        scores[i] = spectrum[idx] / top
        low_conf[i] = i >= n_sources - padded

    sort = np.argsort(angles, kind="stable")
    spectra = None
    if keep_spectrum:
        spectra = np.tile(spectrum / top, (n_sources, 1))
    return DoaEstimate(
        angles=angles[sort],
        peak_scores=scores[sort],
        low_confidence=low_conf[sort],
        spectra=spectra,
    )


def _local_maxima(values: np.ndarray) -> np.ndarray:
    """Indices of 3-point local maxima, endpoints included."""
    v = np.asarray(values)
    if v.size < 2:
        return np.arange(v.size)
    interior = np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])) + 1
    ends = []
    if v[0] > v[1]:
        ends.append(0)
    if v[-1] > v[-2]:
        ends.append(v.size - 1)
    return np.sort(np.concatenate([interior, np.asarray(ends, dtype=int)]))
