"""Command-line front end.

Five subcommands drive the library: ``svc-curves`` tabulates the
correlation curves that explain why grating lobes are suppressed,
``rmse-vs-snr`` / ``rmse-vs-sparse`` / ``rmse-vs-directivity`` run the
Monte Carlo sweeps, and ``single-run`` estimates one realization with every
scheme.  Each command writes CSVs named after itself into the output
directory together with a flat key=value manifest that pins every parameter
and the base seed, so any run can be reproduced bit for bit.

Configuration comes from an optional YAML file (see the config module for
the schema and defaults); a handful of flags override the common knobs.
Angles are degrees at this boundary and radians inside.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__
from .array_model import GainPattern
from .config import RunConfig, default_config, load_config
from .cp import cp_als_restarted
from .estimator import estimate_doas
from .harness import (
    SCHEME_ORDER,
    Scheme,
    SweepSpec,
    format_angle,
    format_number,
    run_sweep,
    run_trial,
    scheme_geometry,
    svc_curves,
    write_sweep_csv,
)
from .music import music_spectrum, sample_covariance
from .scene import aggregate_snapshots, synthesize

SNR_SWEEP_DEFAULT = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
SPARSE_SWEEP_DEFAULT = (1.0, 2.0, 3.0, 4.0)
SPARSE_SWEEP_SNR_DB = 5.0
SPARSE_SWEEP_DIRECTIVITIES = (2.0, 4.0, 6.0)
DIRECTIVITY_SWEEP_DEFAULT = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
SVC_THETA_DEG_DEFAULT = 15.0
SVC_DIRECTIVITY_DEFAULT = 5.0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        out_dir = config.output_dir
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise OSError(f"output directory {out_dir!r} is not writable")
        return args.handler(args, config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rasense",
        description=(
            "Rotatable-antenna sparse-array DOA estimation: tensor pipeline, "
            "MUSIC baselines, and Monte Carlo experiments."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="YAML config file")
    common.add_argument("--output-dir", metavar="DIR", help="where CSVs and manifests go")
    common.add_argument("--seed", type=int, help="base seed (overrides config)")
    common.add_argument("--trials", type=int, help="trials per sweep point (overrides config)")

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "svc-curves",
        parents=[common],
        help="tabulate array/gain/joint correlation curves for one reference angle",
    )
    p.add_argument(
        "--theta-deg",
        type=float,
        default=SVC_THETA_DEG_DEFAULT,
        help=f"reference angle in degrees (default {SVC_THETA_DEG_DEFAULT:g})",
    )
    p.add_argument(
        "--directivity",
        type=float,
        default=SVC_DIRECTIVITY_DEFAULT,
        help=(
            "directivity factor for the curves "
            f"(default {SVC_DIRECTIVITY_DEFAULT:g}; the sweep experiments "
            "default to the config value instead)"
        ),
    )
    p.set_defaults(handler=_cmd_svc_curves)

    p = sub.add_parser(
        "rmse-vs-snr",
        parents=[common],
        help="Monte Carlo RMSE of all four schemes across an SNR sweep",
    )
    p.set_defaults(handler=_cmd_rmse_vs_snr)

    p = sub.add_parser(
        "rmse-vs-sparse",
        parents=[common],
        help="Monte Carlo RMSE across element-spacing factors, one CSV per directivity",
    )
    p.add_argument(
        "--snr-db",
        type=float,
        default=SPARSE_SWEEP_SNR_DB,
        help=f"SNR for this experiment (default {SPARSE_SWEEP_SNR_DB:g} dB)",
    )
    p.add_argument(
        "--directivities",
        type=_float_list,
        default=SPARSE_SWEEP_DIRECTIVITIES,
        metavar="P1,P2,...",
        help=(
            "comma-separated directivity factors, one sweep each "
            f"(default {','.join(f'{p:g}' for p in SPARSE_SWEEP_DIRECTIVITIES)})"
        ),
    )
    p.set_defaults(handler=_cmd_rmse_vs_sparse)

    p = sub.add_parser(
        "rmse-vs-directivity",
        parents=[common],
        help="Monte Carlo RMSE of the tensor schemes across directivity factors",
    )
    p.set_defaults(handler=_cmd_rmse_vs_directivity)

    p = sub.add_parser(
        "single-run",
        parents=[common],
        help="estimate one realization with every scheme and print the angles",
    )
    p.add_argument("--snr-db", type=float, help="SNR override in dB")
    p.add_argument(
        "--noise-free", action="store_true", help="disable noise (overrides --snr-db)"
    )
    p.add_argument(
        "--dump-spectra",
        action="store_true",
        help="also write per-target correlation curves and MUSIC spectra",
    )
    p.set_defaults(handler=_cmd_single_run)
    return parser


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _load_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else default_config()
    return config.with_overrides(
        seed=args.seed, trials=args.trials, output_dir=args.output_dir
    )


def _cmd_svc_curves(args, config: RunConfig) -> int:
    pattern = GainPattern(directivity=args.directivity)
    theta = float(np.deg2rad(args.theta_deg))
    table = svc_curves(theta, config.geometry, config.schedule, pattern, config.grid)
    path = os.path.join(config.output_dir, "svc-curves.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_deg", "array_svc", "gain_svc", "joint_svc"])
        for th, a, b, c in zip(
            np.rad2deg(table.theta), table.array_svc, table.gain_svc, table.joint_svc
        ):
            writer.writerow([format_angle(th), format_number(a), format_number(b), format_number(c)])
    _write_manifest(
        os.path.join(config.output_dir, "svc-curves-manifest.txt"),
        "svc-curves",
        config,
        {"svc.theta_deg": args.theta_deg, "svc.directivity": args.directivity},
    )
    print(
        f"svc-curves: wrote {path} ({table.theta.size} grid points, "
        f"theta={args.theta_deg:g} deg, directivity={args.directivity:g})"
    )
    return 0


def _sweep_from_config(config: RunConfig, variable: str, default_values, default_schemes):
    values = default_values
    schemes = default_schemes
    if config.sweep is not None and config.sweep.variable == variable:
        values = config.sweep.values
        if config.sweep.schemes is not None:
            schemes = tuple(Scheme(label) for label in config.sweep.schemes)
    return SweepSpec(
        variable=variable,
        values=tuple(values),
        trials=config.trials,
        base_config=config,
        schemes=schemes,
    )


def _cmd_rmse_vs_snr(args, config: RunConfig) -> int:
    spec = _sweep_from_config(config, "snr_db", SNR_SWEEP_DEFAULT, SCHEME_ORDER)
    rows = run_sweep(spec)
    path = os.path.join(config.output_dir, "rmse-vs-snr.csv")
    write_sweep_csv(rows, path)
    _write_manifest(
        os.path.join(config.output_dir, "rmse-vs-snr-manifest.txt"),
        "rmse-vs-snr",
        config,
        {
            "sweep.variable": "snr_db",
            "sweep.values": _join(spec.values),
            "sweep.schemes": _join(s.value for s in spec.schemes),
        },
    )
    last = spec.values[-1]
    summary = ", ".join(
        f"{row.scheme} {row.rmse_deg:.3g} deg"
        for row in rows
        if row.value == last
    )
    print(
        f"rmse-vs-snr: wrote {path}; at {last:g} dB ({spec.trials} trials/point): {summary}"
    )
    return 0


def _cmd_rmse_vs_sparse(args, config: RunConfig) -> int:
    config = config.with_overrides(snr_db=args.snr_db)
    default_schemes = (Scheme.US_RA, Scheme.US_OA)
    paths = []
    summaries = []
    for p in args.directivities:
        config_p = config.with_overrides(directivity=p)
        spec = _sweep_from_config(
            config_p, "sparse_factor", SPARSE_SWEEP_DEFAULT, default_schemes
        )
        rows = run_sweep(spec)
        path = os.path.join(config.output_dir, f"rmse-vs-sparse-p{p:g}.csv")
        write_sweep_csv(rows, path)
        paths.append(path)
        best = min(
            (row for row in rows if row.scheme == Scheme.US_RA.value),
            key=lambda row: row.rmse_deg,
            default=None,
        )
        if best is not None:
            summaries.append(f"p={p:g}: best US-RA {best.rmse_deg:.3g} deg at L={best.value:g}")
    _write_manifest(
        os.path.join(config.output_dir, "rmse-vs-sparse-manifest.txt"),
        "rmse-vs-sparse",
        config,
        {
            "sweep.variable": "sparse_factor",
            "sweep.values": _join(
                _sweep_from_config(config, "sparse_factor", SPARSE_SWEEP_DEFAULT, default_schemes).values
            ),
            "sweep.directivities": _join(args.directivities),
            "sweep.schemes": _join(s.value for s in default_schemes),
        },
    )
    print(f"rmse-vs-sparse: wrote {', '.join(paths)}; " + "; ".join(summaries))
    return 0


def _cmd_rmse_vs_directivity(args, config: RunConfig) -> int:
    spec = _sweep_from_config(
        config, "directivity", DIRECTIVITY_SWEEP_DEFAULT, (Scheme.US_RA, Scheme.UD_RA)
    )
    rows = run_sweep(spec)
    path = os.path.join(config.output_dir, "rmse-vs-directivity.csv")
    write_sweep_csv(rows, path)
    _write_manifest(
        os.path.join(config.output_dir, "rmse-vs-directivity-manifest.txt"),
        "rmse-vs-directivity",
        config,
        {
            "sweep.variable": "directivity",
            "sweep.values": _join(spec.values),
            "sweep.schemes": _join(s.value for s in spec.schemes),
        },
    )
    last = spec.values[-1]
    summary = ", ".join(
        f"{row.scheme} {row.rmse_deg:.3g} deg" for row in rows if row.value == last
    )
    print(
        f"rmse-vs-directivity: wrote {path}; at p={last:g} "
        f"({spec.trials} trials/point): {summary}"
    )
    return 0


def _cmd_single_run(args, config: RunConfig) -> int:
    if args.noise_free:
        config = config.with_overrides(snr_db=None)
    elif args.snr_db is not None:
        config = config.with_overrides(snr_db=args.snr_db)

    true_deg = np.sort(np.rad2deg(config.scene.doas))
    path = os.path.join(config.output_dir, "single-run.csv")
    lines = []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "target", "true_deg", "est_deg", "abs_err_deg"])
        for scheme in SCHEME_ORDER:
            trial = run_trial(scheme, config, config.seed)
            est_deg = np.rad2deg(trial.est_doas)
            for i, (t, e) in enumerate(zip(true_deg, est_deg)):
                writer.writerow(
                    [
                        scheme.value,
                        i,
                        format_angle(t),
                        format_angle(e),
                        format_number(abs(t - e)),
                    ]
                )
            rmse = float(np.sqrt(trial.matched_sq_err))
            est_text = ", ".join(f"{e:.3f}" for e in est_deg)
            lines.append(f"{scheme.value} [{est_text}] rmse {rmse:.4g} deg")
    if args.dump_spectra:
        _dump_spectra(config)
    _write_manifest(
        os.path.join(config.output_dir, "single-run-manifest.txt"),
        "single-run",
        config,
        {"dump_spectra": bool(args.dump_spectra)},
    )
    snr_text = "noise-free" if config.snr_db is None else f"{config.snr_db:g} dB"
    print(
        f"single-run ({snr_text}, seed {config.seed}, targets "
        f"[{', '.join(f'{t:g}' for t in true_deg)}] deg): " + "; ".join(lines)
    )
    return 0


def _dump_spectra(config: RunConfig) -> None:
    """Per-target correlation curves and MUSIC spectra for one realization."""
    grid_deg = np.rad2deg(config.grid.points)
    for scheme in SCHEME_ORDER:
        geometry = scheme_geometry(scheme, config.geometry)
        rng = np.random.default_rng(config.seed)
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
        tag = scheme.value.lower()
        if scheme.rotatable:
            dec = cp_als_restarted(
                obs.tensor,
                config.scene.n_sources,
                target_error=None,
                rng=np.random.default_rng([config.seed, 1]),
            )
            est = estimate_doas(
                dec,
                geometry,
                config.schedule,
                config.pattern,
                config.grid,
                keep_spectra=True,
            )
            for k in range(est.n_targets):
                path = os.path.join(
                    config.output_dir, f"single-run-search-{tag}-target{k + 1}.csv"
                )
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["theta_deg", "objective"])
                    for th, v in zip(grid_deg, est.spectra[k]):
                        writer.writerow([format_angle(th), format_number(v)])
        else:
            cov = sample_covariance(aggregate_snapshots(obs.tensor))
            spectrum = music_spectrum(
                cov, config.scene.n_sources, config.grid.points, geometry
            )
            path = os.path.join(config.output_dir, f"single-run-music-{tag}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["theta_deg", "music_pseudo_spectrum"])
                for th, v in zip(grid_deg, spectrum):
                    writer.writerow([format_angle(th), format_number(v)])
    for k, theta in enumerate(np.sort(config.scene.doas)):
        table = svc_curves(
            float(theta), config.geometry, config.schedule, config.pattern, config.grid
        )
        path = os.path.join(config.output_dir, f"single-run-svc-target{k + 1}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta_deg", "array_svc", "gain_svc", "joint_svc"])
            for th, a, b, c in zip(
                grid_deg, table.array_svc, table.gain_svc, table.joint_svc
            ):
                writer.writerow(
                    [format_angle(th), format_number(a), format_number(b), format_number(c)]
                )


def _write_manifest(path: str, command: str, config: RunConfig, extra: dict) -> None:
    """Flat key=value record of every parameter needed to reproduce a run."""
    entries = {
        "artifact_version": __version__,
        "command": command,
        "base_seed": config.seed,
        "seed_was_generated": config.seed_was_generated,
        "geometry.n_antennas": config.geometry.n_antennas,
        "geometry.sparse_factor": config.geometry.sparse_factor,
        "geometry.spacing_wavelengths": config.geometry.spacing_wavelengths,
        "schedule.m_rotations": config.schedule.m_rotations,
        "schedule.theta_max_deg": format_angle(np.rad2deg(config.schedule.theta_max)),
        "pattern.directivity": config.pattern.directivity,
        "scene.doas_deg": _join(format_angle(v) for v in np.rad2deg(config.scene.doas)),
        "scene.scatterings": _join(config.scene.scatterings),
        "scene.signal_powers": _join(config.scene.signal_powers),
        "simulation.snapshots": config.n_snapshots,
        "simulation.snr_db": "none" if config.snr_db is None else config.snr_db,
        "simulation.trials": config.trials,
        "grid.lo_deg": format_angle(np.rad2deg(config.grid.lo)),
        "grid.hi_deg": format_angle(np.rad2deg(config.grid.hi)),
        "grid.step_deg": format_angle(np.rad2deg(config.grid.resolution)),
        "output_dir": config.output_dir,
    }
    entries.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(entries):
            fh.write(f"{key} = {entries[key]}\n")


def _join(values) -> str:
    return ",".join(str(v) for v in values)


if __name__ == "__main__":
    sys.exit(main())
