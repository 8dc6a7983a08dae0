"""Rotatable-antenna sparse-array DOA estimation.

A uniform sparse array enlarges its aperture at the cost of grating lobes
that make classical subspace DOA estimation ambiguous.  Rotating
directional antennas through a schedule of boresights adds a gain signature
per angle; stacking the per-rotation snapshot blocks yields a third-order
tensor whose CP factors separate the array response from the gain
signature, and a joint correlation search over both recovers unambiguous
angle estimates.

The package provides the physical array model, tensor utilities and a
CP-ALS solver, scene synthesis, the correlation-search estimator, MUSIC
baselines on aggregated snapshots, and a seeded Monte Carlo harness with a
CSV-emitting command line (``rasense --help``).
"""

from .array_model import (
    ArrayGeometry,
    GainPattern,
    RotationSchedule,
    channel_matrix,
    gain,
    gain_matrix,
    gain_steering_vector,
    rotation_angles,
    steering_matrix,
    steering_vector,
)
from .config import (
    RunConfig,
    SweepSettings,
    default_config,
    load_config,
    parse_config,
)
from .cp import (
    AlsReport,
    CpDecomposition,
    cp_als,
    cp_als_restarted,
    normalize_factors,
)
from .estimator import (
    AngularGrid,
    DoaEstimate,
    GratingLobes,
    array_svc,
    array_svc_closed_form,
    correlation_spectra,
    estimate_doas,
    gain_svc,
    grating_lobe_angles,
    joint_svc,
    joint_svc_kronecker,
    parabolic_refine,
)
from .harness import (
    SCHEME_ORDER,
    Scheme,
    SvcTable,
    SweepRow,
    SweepSpec,
    TrialResult,
    match_and_rmse,
    matched_squared_error,
    run_sweep,
    run_trial,
    svc_curves,
    write_sweep_csv,
)
from .music import (
    CovarianceEstimate,
    music_estimate,
    music_spectrum,
    sample_covariance,
)
from .scene import (
    Observation,
    Scene,
    aggregate_snapshots,
    draw_signals,
    synthesize,
)
from .tensor_ops import (
    cp_reconstruct,
    fold,
    khatri_rao,
    kronecker_vec,
    tensor_from_stacked,
    tensor_to_stacked,
    unfold,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "GainPattern",
    "RotationSchedule",
    "rotation_angles",
    "gain",
    "steering_vector",
    "steering_matrix",
    "gain_steering_vector",
    "gain_matrix",
    "channel_matrix",
    "unfold",
    "fold",
    "khatri_rao",
    "kronecker_vec",
    "cp_reconstruct",
    "tensor_from_stacked",
    "tensor_to_stacked",
    "AlsReport",
    "CpDecomposition",
    "cp_als",
    "cp_als_restarted",
    "normalize_factors",
    "Scene",
    "Observation",
    "draw_signals",
    "synthesize",
    "aggregate_snapshots",
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
    "CovarianceEstimate",
    "sample_covariance",
    "music_spectrum",
    "music_estimate",
    "Scheme",
    "SCHEME_ORDER",
    "TrialResult",
    "SweepSpec",
    "SweepRow",
    "SvcTable",
    "match_and_rmse",
    "matched_squared_error",
    "run_trial",
    "run_sweep",
    "svc_curves",
    "write_sweep_csv",
    "RunConfig",
    "SweepSettings",
    "parse_config",
    "load_config",
    "default_config",
    "__version__",
]
