"""Streaming focal-depth estimation from binocular gaze.

Vergence geometry turns eye-ray pairs into depth estimates, a Hampel+EMA
filter de-noises them in diopter space, a per-user affine calibration
corrects tracker bias, and a hysteresis/dwell state machine maps the stream
to layer-switch interaction events.  A seeded simulator and an evaluation
harness reproduce the depth-separability and moving-target experiments at
desk scale, and a WebSocket service hosts the interactive playground.
"""

from .calibration import (
    CalibrationModel,
    CalibrationPoint,
    apply_calibration,
    fit_calibration,
    load_calibration,
    run_calibration_session,
    save_calibration,
)
from .errors import (
    BadDepthsError,
    DegenerateFitError,
    GazeDepthError,
    InsufficientDataError,
    StreamOrderError,
    TimeoutNoSettleError,
    TraceParseError,
)
from .evaluate import ExperimentReport, run_static_experiment, run_step_experiment
from .filtering import DepthFilter, FilterConfig, FilteredDepth, Quality
from .geometry import (
    DepthEstimate,
    GazeSample,
    GeometryConfig,
    Ray,
    Validity,
    depth_to_diopters,
    diopters_to_depth,
    estimate_depth,
    fixation_sample,
    ray_closest_points,
)
from .interaction import (
    EventKind,
    InteractionEvent,
    InteractionState,
    LayerConfig,
    configure_layers,
    cue_opacity,
    initial_state,
    step,
)
from .pipeline import GazePipeline, PipelineConfig, calibrate_on_simulator
from .simulator import (
    GazeSynthesizer,
    NoiseModel,
    Scenario,
    Static,
    Step,
    Sweep,
    TraceRecord,
    generate_trace,
    lagged_true_vergence,
    read_trace,
    vergence_dynamics_step,
    write_trace,
)

__version__ = "0.1.0"
