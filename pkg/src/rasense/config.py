"""Run configuration: YAML parsing, defaults, and validation.

A run is described by one YAML document with nested sections (``geometry``,
``schedule``, ``pattern``, ``scene``, ``simulation``, ``grid``, ``sweep``,
``output_dir``).  Angles are degrees in the document and radians in the
parsed objects.  Every key has a default, an empty document is a valid
config, and unknown keys are rejected with the offending key named.

The defaults describe the reference setup used throughout: an 8-element
half-wavelength array at sparse factor 2, directivity 3, seven rotations
spanning +-60 degrees, targets at -20/15/45 degrees, 20 snapshots per
rotation at 10 dB SNR.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import yaml

from .array_model import ArrayGeometry, GainPattern, RotationSchedule, rotation_angles
from .estimator import AngularGrid
from .scene import Scene

__all__ = [
    "RunConfig",
    "SweepSettings",
    "parse_config",
    "load_config",
    "default_config",
]

SCHEME_LABELS = ("US-RA", "UD-RA", "US-OA", "UD-OA")
SWEEP_VARIABLES = ("snr_db", "sparse_factor", "directivity")

_DEFAULTS: dict[str, Any] = {
    "geometry": {"n_antennas": 8, "sparse_factor": 2.0, "spacing_wavelengths": 0.5},
    "schedule": {"m_rotations": 7, "theta_max_deg": 60.0},
    "pattern": {"directivity": 3.0},
    "scene": {
        "doas_deg": [-20.0, 15.0, 45.0],
        "scatterings": None,
        "signal_powers": None,
    },
    "simulation": {
        "snapshots": 20,
        "snr_db": 10.0,
        "seed": None,
        "trials": 200,
        "signal_model": "gaussian",
    },
    "grid": {"step_deg": 0.05, "lo_deg": None, "hi_deg": None},
    "sweep": None,
    "output_dir": "out",
}


@dataclass(frozen=True)
class SweepSettings:
    """Optional sweep request carried by a config file."""

    variable: str
    values: tuple[float, ...]
    schemes: tuple[str, ...] | None = None


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Fully validated run parameters.

    ``seed_was_generated`` records whether the seed came from the document
    or was drawn fresh; generated seeds must be written to the run manifest
    so the run stays reproducible.
    """

    geometry: ArrayGeometry
    schedule: RotationSchedule
    pattern: GainPattern
    scene: Scene
    n_snapshots: int
    snr_db: float | None
    trials: int
    seed: int
    seed_was_generated: bool
    grid: AngularGrid
    sweep: SweepSettings | None
    output_dir: str

    def with_overrides(
        self,
        *,
        seed: int | None = None,
        trials: int | None = None,
        output_dir: str | None = None,
        snr_db: float | None = ...,
        directivity: float | None = None,
        sparse_factor: float | None = None,
    ) -> "RunConfig":
        """Copy with selected fields replaced (command-line overrides)."""
        cfg = self
        if seed is not None:
            if seed < 0:
                raise ValueError(f"seed must be non-negative, got {seed}")
            cfg = replace(cfg, seed=int(seed), seed_was_generated=False)
        if trials is not None:
            if trials < 1:
                raise ValueError(f"trials must be >= 1, got {trials}")
            cfg = replace(cfg, trials=int(trials))
        if output_dir is not None:
            cfg = replace(cfg, output_dir=output_dir)
        if snr_db is not ...:
            cfg = replace(cfg, snr_db=None if snr_db is None else float(snr_db))
        if directivity is not None:
            cfg = replace(cfg, pattern=GainPattern(float(directivity)))
        if sparse_factor is not None:
            cfg = replace(
                cfg, geometry=replace(cfg.geometry, sparse_factor=float(sparse_factor))
            )
        return cfg


def default_config() -> RunConfig:
    """The reference configuration (equivalent to parsing an empty document)."""
    return parse_config("")


def load_config(path: str) -> RunConfig:
    """Parse a YAML config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML config document.

    An empty document yields all defaults.  Raises ValueError naming the
    offending key for unknown keys, type errors, and out-of-range values.
    """
    raw = yaml.safe_load(text) if text.strip() else {}
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValueError("config document must be a mapping of sections")
    _reject_unknown(raw, _DEFAULTS.keys(), prefix="")

    merged = {}
    for section, defaults in _DEFAULTS.items():
        if isinstance(defaults, dict):
            given = raw.get(section) or {}
            if not isinstance(given, dict):
                raise ValueError(f"{section}: expected a mapping of keys")
            _reject_unknown(given, defaults.keys(), prefix=f"{section}.")
            merged[section] = {**defaults, **given}
        else:
            merged[section] = raw.get(section, defaults)

    geometry = _build_geometry(merged["geometry"])
    schedule = _build_schedule(merged["schedule"])
    pattern = _build_pattern(merged["pattern"])
    scene = _build_scene(merged["scene"], schedule)
    sim = merged["simulation"]
    grid = _build_grid(merged["grid"], schedule)
    sweep = _build_sweep(merged["sweep"])

    n_snapshots = _as_int("simulation.snapshots", sim["snapshots"], minimum=1)
    trials = _as_int("simulation.trials", sim["trials"], minimum=1)
    if sim["signal_model"] != "gaussian":
        raise ValueError(
            f"simulation.signal_model: only 'gaussian' is supported, "
            f"got {sim['signal_model']!r}"
        )
    snr_db = sim["snr_db"]
    if snr_db is not None:
        snr_db = _as_float("simulation.snr_db", snr_db)

    seed = sim["seed"]
    seed_was_generated = seed is None
    if seed_was_generated:
        seed = int(np.random.SeedSequence().entropy) % (2**63)
    else:
        seed = _as_int("simulation.seed", seed, minimum=0)

    output_dir = merged["output_dir"]
    if not isinstance(output_dir, str) or not output_dir:
        raise ValueError("output_dir: expected a nonempty string")

    return RunConfig(
        geometry=geometry,
        schedule=schedule,
        pattern=pattern,
        scene=scene,
        n_snapshots=n_snapshots,
        snr_db=snr_db,
        trials=trials,
        seed=seed,
        seed_was_generated=seed_was_generated,
        grid=grid,
        sweep=sweep,
        output_dir=output_dir,
    )


def _reject_unknown(given: dict, known, prefix: str) -> None:
    unknown = sorted(set(given) - set(known))
    if unknown:
        raise ValueError(
            f"unknown config key{'s' if len(unknown) > 1 else ''}: "
            + ", ".join(f"{prefix}{k}" for k in unknown)
        )


def _build_geometry(sec: dict) -> ArrayGeometry:
    try:
        return ArrayGeometry(
            n_antennas=_as_int("geometry.n_antennas", sec["n_antennas"], minimum=2),
            sparse_factor=_as_float("geometry.sparse_factor", sec["sparse_factor"]),
            spacing_wavelengths=_as_float(
                "geometry.spacing_wavelengths", sec["spacing_wavelengths"]
            ),
        )
    except ValueError as exc:
        raise ValueError(f"geometry: {exc}") from None


def _build_schedule(sec: dict) -> RotationSchedule:
    m = _as_int("schedule.m_rotations", sec["m_rotations"], minimum=1)
    theta_max_deg = _as_float("schedule.theta_max_deg", sec["theta_max_deg"])
    if m < 2:
        raise ValueError(
            "schedule.m_rotations: must be at least 2; with a single boresight "
            "the gain correlation is constant and cannot disambiguate angles"
        )
    try:
        return rotation_angles(m, np.deg2rad(theta_max_deg))
    except ValueError as exc:
        raise ValueError(f"schedule: {exc}") from None


def _build_pattern(sec: dict) -> GainPattern:
    try:
        return GainPattern(directivity=_as_float("pattern.directivity", sec["directivity"]))
    except ValueError as exc:
        raise ValueError(f"pattern: {exc}") from None


def _build_scene(sec: dict, schedule: RotationSchedule) -> Scene:
    doas_deg = sec["doas_deg"]
    if not isinstance(doas_deg, (list, tuple)) or not doas_deg:
        raise ValueError("scene.doas_deg: expected a nonempty list of angles")
    doas_deg = [_as_float(f"scene.doas_deg[{i}]", v) for i, v in enumerate(doas_deg)]
    limit_deg = np.rad2deg(schedule.theta_max)
    for i, v in enumerate(doas_deg):
        if abs(v) > limit_deg + 1e-9:
            raise ValueError(
                f"scene.doas_deg[{i}]: {v} deg is outside the sensing range "
                f"+-{limit_deg:g} deg"
            )
    scatterings = sec["scatterings"]
    if scatterings is not None:
        scatterings = [
            _as_complex(f"scene.scatterings[{i}]", v) for i, v in enumerate(scatterings)
        ]
    powers = sec["signal_powers"]
    if powers is not None:
        powers = [_as_float(f"scene.signal_powers[{i}]", v) for i, v in enumerate(powers)]
    try:
        return Scene.from_degrees(doas_deg, scatterings, powers)
    except ValueError as exc:
        raise ValueError(f"scene: {exc}") from None


def _build_grid(sec: dict, schedule: RotationSchedule) -> AngularGrid:
    limit_deg = float(np.rad2deg(schedule.theta_max))
    lo = -limit_deg if sec["lo_deg"] is None else _as_float("grid.lo_deg", sec["lo_deg"])
    hi = limit_deg if sec["hi_deg"] is None else _as_float("grid.hi_deg", sec["hi_deg"])
    step = _as_float("grid.step_deg", sec["step_deg"])
    if not lo < hi:
        raise ValueError(f"grid: need lo_deg < hi_deg, got {lo} and {hi}")
    if lo < -limit_deg - 1e-9 or hi > limit_deg + 1e-9:
        raise ValueError(
            f"grid: [{lo}, {hi}] deg exceeds the sensing range +-{limit_deg:g} deg"
        )
    try:
        return AngularGrid.from_degrees(lo, hi, step)
    except ValueError as exc:
        raise ValueError(f"grid: {exc}") from None


def _build_sweep(sec) -> SweepSettings | None:
    if sec is None:
        return None
    if not isinstance(sec, dict):
        raise ValueError("sweep: expected a mapping")
    _reject_unknown(sec, ("variable", "values", "schemes"), prefix="sweep.")
    variable = sec.get("variable")
    if variable not in SWEEP_VARIABLES:
        raise ValueError(
            f"sweep.variable: expected one of {', '.join(SWEEP_VARIABLES)}, "
            f"got {variable!r}"
        )
    values = sec.get("values")
    if not isinstance(values, (list, tuple)) or not values:
        raise ValueError("sweep.values: expected a nonempty list of numbers")
    values = tuple(_as_float(f"sweep.values[{i}]", v) for i, v in enumerate(values))
    if variable == "sparse_factor" and any(v < 1.0 for v in values):
        raise ValueError("sweep.values: sparse factors must be >= 1")
    if variable == "directivity" and any(v < 0.0 for v in values):
        raise ValueError("sweep.values: directivity must be >= 0")
    schemes = sec.get("schemes")
    if schemes is not None:
        if not isinstance(schemes, (list, tuple)) or not schemes:
            raise ValueError("sweep.schemes: expected a nonempty list of scheme labels")
        for s in schemes:
            if s not in SCHEME_LABELS:
                raise ValueError(
                    f"sweep.schemes: unknown scheme {s!r}; "
                    f"expected one of {', '.join(SCHEME_LABELS)}"
                )
        schemes = tuple(schemes)
    return SweepSettings(variable=variable, values=values, schemes=schemes)


def _as_int(key: str, value, *, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValueError(f"{key}: must be >= {minimum}, got {value}")
    return int(value)


def _as_float(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{key}: expected a number, got {value!r}")
    if not np.isfinite(value):
        raise ValueError(f"{key}: must be finite, got {value!r}")
    return float(value)


def _as_complex(key: str, value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"{key}: expected [real, imag], got {value!r}")
        return complex(_as_float(f"{key}[0]", value[0]), _as_float(f"{key}[1]", value[1]))
    return complex(_as_float(key, value))
