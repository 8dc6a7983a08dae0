"""Monte Carlo experiment engine: schemes, trials, sweeps, CSV output.

Four receiver schemes are compared.  "US"/"UD" picks sparse (configured L)
versus dense (L forced to 1) element spacing; "RA"/"OA" picks rotatable
directional antennas with the tensor pipeline versus omnidirectional
antennas with MUSIC on the aggregated snapshots:

* US-RA: sparse rotatable array, CP decomposition + correlation search
* UD-RA: the same pipeline at dense spacing
* US-OA: sparse omnidirectional array, MUSIC (the ambiguous baseline)
* UD-OA: dense omnidirectional array, MUSIC

Every trial is reproducible from its integer seed alone: the seed fixes the
waveform and noise draws, and ``[seed, 1]`` seeds the ALS initialization.
All schemes at a given trial seed see the same waveform and noise
realization (the synthesis draw order guarantees it), so scheme comparisons
are paired.  Sweep trial seeds are assigned up front as
``base_seed + point_index * trials + trial_index``, which keeps aggregates
independent of execution order.

RMSE is pooled across trials and targets: sqrt of the mean of all matched
squared errors, in degrees.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .array_model import ArrayGeometry, GainPattern, RotationSchedule
from .config import RunConfig
from .cp import cp_als_restarted
from .estimator import AngularGrid, array_svc, estimate_doas, gain_svc
from .music import music_estimate
from .scene import synthesize

__all__ = [
    "Scheme",
    "SCHEME_ORDER",
    "TrialResult",
    "SweepSpec",
    "SweepRow",
    "SvcTable",
    "match_and_rmse",
    "run_trial",
    "run_sweep",
    "svc_curves",
    "write_sweep_csv",
    "sweep_csv_header",
    "format_number",
    "format_angle",
]


class Scheme(enum.Enum):
    """Receiver scheme labels as they appear in result tables."""

    US_RA = "US-RA"
    UD_RA = "UD-RA"
    US_OA = "US-OA"
    UD_OA = "UD-OA"

    @property
    def rotatable(self) -> bool:
        """True for the directional-antenna tensor pipeline."""
        return self.value.endswith("RA")

    @property
    def dense(self) -> bool:
        """True when the scheme pins the element spacing to L = 1."""
        return self.value.startswith("UD")


SCHEME_ORDER = (Scheme.US_RA, Scheme.UD_RA, Scheme.US_OA, Scheme.UD_OA)


@dataclass(frozen=True, eq=False)
class TrialResult:
    """Outcome of one synthesized realization under one scheme.

    ``matched_sq_err`` is the mean squared angular error in squared degrees
    under the error-minimizing pairing of estimates to truth.  ALS fields
    are None for the MUSIC schemes.
    """

    scheme: Scheme
    seed: int
    true_doas: np.ndarray
    est_doas: np.ndarray
    matched_sq_err: float
    als_iterations: int | None = None
    als_converged: bool | None = None
    als_restarts: int | None = None
    low_confidence: bool = False


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """One sweep request: vary one parameter, hold the rest at base_config."""

    variable: str
    values: tuple[float, ...]
    trials: int
    base_config: RunConfig
    schemes: tuple[Scheme, ...] = SCHEME_ORDER

    def __post_init__(self) -> None:
        if self.variable not in ("snr_db", "sparse_factor", "directivity"):
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.schemes:
            raise ValueError("sweep needs at least one scheme")


@dataclass(frozen=True, eq=False)
class SweepRow:
    """One (sweep value, scheme) aggregate.

    ``trials`` is the requested count; trials that raised or returned a
    non-finite error are counted in ``failures`` and excluded from the RMSE
    mean, never silently dropped.  ``sq_errs`` keeps the per-trial matched
    squared errors (degrees squared) for uncertainty analysis; it is not
    part of the CSV schema.
    """

    sweep_variable: str
    value: float
    scheme: str
    rmse_deg: float
    trials: int
    failures: int
    sq_errs: tuple[float, ...] = field(repr=False, default=())


@dataclass(frozen=True, eq=False)
class SvcTable:
    """Correlation curves against a reference angle, tabulated over a grid."""

    theta: np.ndarray
    array_svc: np.ndarray
    gain_svc: np.ndarray
    joint_svc: np.ndarray


def match_and_rmse(true_doas, est_doas) -> float:
    """RMSE in degrees between two same-size angle sets in radians.

    Sorts both ascending and pairs in order, which for scalar angles attains
    the assignment minimizing the sum of squared differences.
    """
    return float(np.sqrt(matched_squared_error(true_doas, est_doas)))


def matched_squared_error(true_doas, est_doas) -> float:
    """Mean squared angular error in squared degrees under sorted pairing."""
    t = np.sort(np.rad2deg(np.asarray(true_doas, dtype=float)))
    e = np.sort(np.rad2deg(np.asarray(est_doas, dtype=float)))
    if t.shape != e.shape:
        raise ValueError(f"angle sets differ in size: {t.shape} vs {e.shape}")
    return float(np.mean((t - e) ** 2))


def scheme_geometry(scheme: Scheme, geometry: ArrayGeometry) -> ArrayGeometry:
    """The geometry a scheme actually receives with (dense schemes pin L=1)."""
    if scheme.dense and geometry.sparse_factor != 1.0:
        return replace(geometry, sparse_factor=1.0)
    return geometry


def run_trial(scheme: Scheme, config: RunConfig, seed: int) -> TrialResult:
    """Synthesize one realization and estimate its DOAs under one scheme.

    Fully deterministic given ``seed``.  ALS restarts once or twice with a
    fresh initialization when a run fails to converge (a stalled swamp run
    otherwise poisons the pooled RMSE); the restart count and the final
    convergence flag land in the result, never an exception.  The estimate
    always comes from the best iterate seen.
    """
    geometry = scheme_geometry(scheme, config.geometry)
    rng = np.random.default_rng(seed)
    obs = synthesize(
        config.scene,
        geometry,
        config.schedule,
        config.pattern,
        config.n_snapshots,
        config.snr_db,
        rng,
        unit_gain=not scheme.rotatable,
    )
    if scheme.rotatable:
        dec = cp_als_restarted(
            obs.tensor,
            config.scene.n_sources,
            target_error=None,
            n_restarts=2,
            rng=np.random.default_rng([seed, 1]),
        )
        est = estimate_doas(
            dec, geometry, config.schedule, config.pattern, config.grid
        )
        als_iterations = dec.report.n_iterations
        als_converged = dec.report.converged
        als_restarts = dec.report.restarts_used
    else:
        est = music_estimate(obs.tensor, config.scene.n_sources, geometry, config.grid)
        als_iterations = None
        als_converged = None
        als_restarts = None

    return TrialResult(
        scheme=scheme,
        seed=seed,
        true_doas=np.sort(config.scene.doas),
        est_doas=est.angles,
        matched_sq_err=matched_squared_error(config.scene.doas, est.angles),
        als_iterations=als_iterations,
        als_converged=als_converged,
        als_restarts=als_restarts,
        low_confidence=bool(np.any(est.low_confidence)),
    )


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Run the full sweep and aggregate per (value, scheme).

    Trial seeds are fixed up front from the base seed, so results do not
    depend on execution order, and all schemes share seeds (paired
    comparisons).  Rows appear in value order, schemes in ``spec.schemes``
    order within each value.
    """
    base_seed = spec.base_config.seed
    rows = []
    for point_idx, value in enumerate(spec.values):
        config = _apply_sweep_value(spec.base_config, spec.variable, value)
        seeds = [base_seed + point_idx * spec.trials + t for t in range(spec.trials)]
        for scheme in spec.schemes:
            sq_errs = []
            failures = 0
            for seed in seeds:
                try:
                    trial = run_trial(scheme, config, seed)
                except (ValueError, np.linalg.LinAlgError):
                    failures += 1
                    continue
                if not np.isfinite(trial.matched_sq_err):
                    failures += 1
                    continue
                sq_errs.append(trial.matched_sq_err)
            rmse = float(np.sqrt(np.mean(sq_errs))) if sq_errs else float("nan")
            rows.append(
                SweepRow(
                    sweep_variable=spec.variable,
                    value=float(value),
                    scheme=scheme.value,
                    rmse_deg=rmse,
                    trials=spec.trials,
                    failures=failures,
                    sq_errs=tuple(sq_errs),
                )
            )
    return rows


def _apply_sweep_value(config: RunConfig, variable: str, value: float) -> RunConfig:
    if variable == "snr_db":
        return replace(config, snr_db=float(value))
    if variable == "sparse_factor":
        return replace(
            config, geometry=replace(config.geometry, sparse_factor=float(value))
        )
    if variable == "directivity":
        return replace(config, pattern=GainPattern(directivity=float(value)))
    raise ValueError(f"unknown sweep variable {variable!r}")


def svc_curves(
    theta_k: float,
    geometry: ArrayGeometry,
    schedule: RotationSchedule,
    pattern: GainPattern,
    grid: AngularGrid,
) -> SvcTable:
    """Tabulate the array, gain, and joint correlation curves for theta_k.

    The joint column is the elementwise product of the other two, exactly.
    """
    arr = array_svc(theta_k, grid.points, geometry)
    g = gain_svc(theta_k, grid.points, schedule, pattern)
    return SvcTable(
        theta=grid.points.copy(),
        array_svc=arr,
        gain_svc=g,
        joint_svc=arr * g,
    )


def sweep_csv_header() -> list[str]:
    """Stable column order of sweep result CSVs."""
    return ["sweep_variable", "value", "scheme", "rmse_deg", "trials", "failures"]


def write_sweep_csv(rows: list[SweepRow], path: str) -> None:
    """Write sweep rows as CSV with the documented schema.

    Floats are rendered with ``repr`` (shortest round-trip form), so equal
    runs produce byte-identical files.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(sweep_csv_header())
        for row in rows:
            writer.writerow(
                [
                    row.sweep_variable,
                    format_number(row.value),
                    row.scheme,
                    format_number(row.rmse_deg),
                    row.trials,
                    row.failures,
                ]
            )


def format_number(x) -> str:
    """Shortest exact decimal form of a float (or plain str for ints)."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def format_angle(x) -> str:
    """Like :func:`format_number` but rounded to 12 decimals first.

    Degree values that went through a radian round trip pick up fuzz in the
    last couple of bits (-60.0 comes back as -59.99999999999999); rounding
    well below any angular tolerance keeps the files readable without
    losing real precision.
    """
    return repr(round(float(x), 12))
