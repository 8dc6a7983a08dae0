"""Scenes (source constellations) and synthetic measurement generation.

A scene is K far-field narrowband sources with fixed directions, complex
scattering coefficients, and per-source signal powers.  :func:`synthesize`
produces the (N, M, T) measurement tensor for a full rotation sweep: T
snapshots per rotation, the waveform block held fixed across rotations so
each source contributes a rank-one term, plus circular complex Gaussian
noise at a prescribed SNR.

Draw order inside one call is fixed (waveforms first, then one noise block)
so that two calls with identically seeded generators see the same physical
realization even when antenna gains or element spacing differ.  Monte Carlo
comparisons across array configurations rely on this pairing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_model import (
    ArrayGeometry,
    GainPattern,
    RotationSchedule,
    gain_matrix,
    steering_matrix,
)
from .tensor_ops import cp_reconstruct, tensor_to_stacked

__all__ = ["Scene", "Observation", "draw_signals", "synthesize", "aggregate_snapshots"]


@dataclass(frozen=True, eq=False)
class Scene:
    """K far-field sources.

    Parameters
    ----------
    doas : ndarray, shape (K,)
        Directions of arrival in radians, pairwise distinct, each strictly
        inside (-pi/2, pi/2).
    scatterings : ndarray, shape (K,)
        Complex scattering coefficients alpha_k, all nonzero.
    signal_powers : ndarray, shape (K,)
        Per-source waveform powers sigma_k^2, all positive.  Unit by default;
        SNR figures elsewhere assume unit power.
    """

    doas: np.ndarray
    scatterings: np.ndarray = field(repr=False)
    signal_powers: np.ndarray = field(repr=False, default=None)

    def __post_init__(self) -> None:
        doas = np.atleast_1d(np.asarray(self.doas, dtype=float))
        scat = np.atleast_1d(np.asarray(self.scatterings, dtype=complex))
        if self.signal_powers is None:
            powers = np.ones(doas.shape)
        else:
            powers = np.atleast_1d(np.asarray(self.signal_powers, dtype=float))
        if doas.ndim != 1 or doas.size == 0:
            raise ValueError("doas must be a nonempty 1-D array")
        if scat.shape != doas.shape:
            raise ValueError(
                f"scatterings shape {scat.shape} does not match doas shape {doas.shape}"
            )
        if powers.shape != doas.shape:
            raise ValueError(
                f"signal_powers shape {powers.shape} does not match doas shape {doas.shape}"
            )
        if np.any(np.abs(doas) >= np.pi / 2):
            raise ValueError("all DOAs must lie strictly inside (-pi/2, pi/2)")
        if np.unique(doas).size != doas.size:
            raise ValueError("DOAs must be pairwise distinct")
        if np.any(scat == 0):
            raise ValueError("scattering coefficients must be nonzero")
        if np.any(powers <= 0.0) or not np.all(np.isfinite(powers)):
            raise ValueError("signal powers must be positive and finite")
        doas.setflags(write=False)
        scat.setflags(write=False)
        powers.setflags(write=False)
        object.__setattr__(self, "doas", doas)
        object.__setattr__(self, "scatterings", scat)
        object.__setattr__(self, "signal_powers", powers)

    @property
    def n_sources(self) -> int:
        return self.doas.size

    @classmethod
    def from_degrees(cls, doas_deg, scatterings=None, signal_powers=None) -> "Scene":
        """Build a scene from DOAs in degrees; unit scatterings by default."""
        doas = np.deg2rad(np.atleast_1d(np.asarray(doas_deg, dtype=float)))
        if scatterings is None:
            scatterings = np.ones(doas.shape, dtype=complex)
        return cls(doas=doas, scatterings=scatterings, signal_powers=signal_powers)


@dataclass(frozen=True, eq=False)
class Observation:
    """One synthesized rotation sweep.

    ``tensor`` is the noisy (N, M, T) measurement; ``noise_free`` the exact
    rank-K part, built through the same contraction as
    :func:`~rasense.tensor_ops.cp_reconstruct` applied to the stored
    ground-truth factors, so the two agree to the last bit.  ``signals``
    already includes the scattering coefficients.
    """

    tensor: np.ndarray
    noise_free: np.ndarray
    steering: np.ndarray
    gains: np.ndarray
    signals: np.ndarray
    noise_variance: float

    @property
    def stacked(self) -> np.ndarray:
        """Measurements as the (N*M, T) stack of per-rotation snapshot blocks."""
        return tensor_to_stacked(self.tensor)


def draw_signals(scene: Scene, n_snapshots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw the K x T probing waveform matrix.

    Rows are independent zero-mean circular complex Gaussian streams, row k
    with power ``scene.signal_powers[k]``.  One waveform block serves all
    rotations of a sweep; scattering coefficients are applied separately.
    """
    if n_snapshots < 1:
        raise ValueError(f"n_snapshots must be >= 1, got {n_snapshots}")
    waveforms = _complex_normal(rng, (scene.n_sources, n_snapshots))
    return np.sqrt(scene.signal_powers)[:, None] * waveforms


def synthesize(
    scene: Scene,
    geometry: ArrayGeometry,
    schedule: RotationSchedule,
    pattern: GainPattern,
    n_snapshots: int,
    snr_db: float | None,
    rng: np.random.Generator,
    *,
    unit_gain: bool = False,
    fresh_signals_per_rotation: bool = False,
) -> Observation:
    """Simulate one full rotation sweep of the array.

    Parameters
    ----------
    scene : Scene
        Source directions and scatterings.  All DOAs must lie within the
        schedule's sensing range and the number of sources must leave a
        noise subspace, K < N.
    geometry, schedule, pattern
        Array configuration.
    n_snapshots : int
        Snapshots T per rotation, at least 1.
    snr_db : float or None
        SNR in dB relative to unit signal power, so the per-entry noise
        variance is ``10 ** (-snr_db / 10)``.  None disables noise entirely.
    rng : numpy.random.Generator
        Randomness source; waveforms are drawn before noise.
    unit_gain : bool
        Replace the directional gains with 1 everywhere (omnidirectional
        elements).  The rotation schedule then only sets the number of
        snapshot blocks.
    fresh_signals_per_rotation : bool
        Draw an independent waveform block for every rotation instead of
        reusing one.  This breaks the rank-one structure per source and
        exists to stress model mismatch; it also consumes more draws, so
        pairing with other configurations is lost.

    Returns
    -------
    Observation
    """
    if n_snapshots < 1:
        raise ValueError(f"n_snapshots must be >= 1, got {n_snapshots}")
    if scene.n_sources >= geometry.n_antennas:
        raise ValueError(
            f"need n_sources < n_antennas, got K={scene.n_sources}, "
            f"N={geometry.n_antennas}"
        )
    if np.any(np.abs(scene.doas) > schedule.theta_max):
        raise ValueError(
            "all scene DOAs must lie within the sensing range "
            f"[-{schedule.theta_max}, {schedule.theta_max}] radians"
        )
    k = scene.n_sources
    m = schedule.m_rotations
    t = n_snapshots

    a = steering_matrix(scene.doas, geometry)
    if unit_gain:
        b = np.ones((m, k), dtype=float)
    else:
        b = gain_matrix(scene.doas, schedule, pattern)

    if fresh_signals_per_rotation:
        waveforms = np.stack([draw_signals(scene, t, rng) for _ in range(m)])
        weighted = scene.scatterings[None, :, None] * waveforms
        # (N, M, T) with an independent waveform block per rotation
        noise_free = np.einsum("nk,mk,mkt->nmt", a, b.astype(complex), weighted)
        signals = weighted[0]
    else:
        signals = scene.scatterings[:, None] * draw_signals(scene, t, rng)
        noise_free = cp_reconstruct(a, b.astype(complex), signals.T)

    if snr_db is None:
        tensor = noise_free.copy()
        noise_variance = 0.0
    else:
        noise_variance = 10.0 ** (-float(snr_db) / 10.0)
        noise = np.sqrt(noise_variance) * _complex_normal(rng, noise_free.shape)
        tensor = noise_free + noise

    return Observation(
        tensor=tensor,
        noise_free=noise_free,
        steering=a,
        gains=b,
        signals=signals,
        noise_variance=noise_variance,
    )


def aggregate_snapshots(tensor: np.ndarray) -> np.ndarray:
    """Concatenate the M per-rotation N x T blocks into an N x MT matrix.

    Column m*T + t of the result is tensor slice (:, m, t).  Estimators that
    cannot exploit the rotation structure are fed this matrix so they see
    the same volume of data as the tensor pipeline.
    """
    tensor = np.asarray(tensor)
    if tensor.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={tensor.ndim}")
    n, m, t = tensor.shape
    return np.reshape(tensor, (n, m * t))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circular complex Gaussian with unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
