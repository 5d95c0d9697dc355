"""End-to-end stream pipeline: geometry -> filter -> calibration -> layers.

One GazePipeline instance owns the mutable state for one gaze stream.  The
per-user calibration is applied between the filter and the state machine,
so filter tuning stays user-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional

from .calibration import IDENTITY_MODEL, CalibrationModel, run_calibration_session
from .filtering import DepthFilter, FilterConfig, FilteredDepth
from .geometry import DepthEstimate, GazeSample, GeometryConfig, estimate_depth
from .interaction import InteractionEvent, LayerConfig, configure_layers, initial_state, step
from .simulator import DEFAULT_VERGENCE_TAU, GazeSynthesizer, NoiseModel


def default_layers() -> LayerConfig:
    return configure_layers([2.0, 0.5], ids=["portal", "detail"])


@dataclass(frozen=True)
class PipelineConfig:
    geometry: GeometryConfig = GeometryConfig()
    filtering: FilterConfig = FilterConfig()
    layers: LayerConfig = field(default_factory=default_layers)
    calibration: CalibrationModel = IDENTITY_MODEL

    def with_calibration(self, model: CalibrationModel) -> "PipelineConfig":
        return replace(self, calibration=model)


@dataclass(frozen=True, slots=True)
class TickResult:
    """Everything one sample produced on its way through the pipeline."""

    estimate: DepthEstimate
    filtered: FilteredDepth          # de-noised, uncalibrated
    calibrated: FilteredDepth        # what the state machine consumed
    events: list[InteractionEvent]


class GazePipeline:
    """Single-owner stream processor; create one per session or experiment."""

    def __init__(self, config: PipelineConfig = PipelineConfig()):
        self.config = config
        self.filter = DepthFilter(config.filtering)
        self.state = initial_state(config.layers)

    def process(self, sample: GazeSample, hover: Optional[str] = None) -> TickResult:
        estimate = estimate_depth(sample, self.config.geometry)
        filtered = self.filter.push(estimate)
        model = self.config.calibration
        v = model.apply(filtered.vergence) if math.isfinite(filtered.vergence) else math.nan
        calibrated = FilteredDepth(
            timestamp=filtered.timestamp,
            vergence=v,
            depth=1.0 / v if v > 0.0 else math.nan,
            quality=filtered.quality,
            rejected=filtered.rejected,
        )
        events = step(self.state, self.config.layers, calibrated, hover=hover)
        return TickResult(estimate=estimate, filtered=filtered, calibrated=calibrated, events=events)

    def reset(self, preserve_familiarity: bool = True) -> None:
        """Clear filter and layer state; cue familiarity persists by default."""
        switch_count = self.state.switch_count
        self.filter.reset()
        self.state = initial_state(self.config.layers)
        if preserve_familiarity:
            self.state.switch_count = switch_count

    def set_calibration(self, model: CalibrationModel) -> None:
        self.config = self.config.with_calibration(model)


def simulated_readings(
    noise: NoiseModel,
    config: PipelineConfig,
    sample_rate: float = 120.0,
    tau: float = DEFAULT_VERGENCE_TAU,
    max_duration: float = 30.0,
) -> Callable[[float], Iterator[FilteredDepth]]:
    """Pipeline source for calibration sessions, backed by the simulator.

    Each target gets a fresh synthesizer and filter (seeded per target index)
    so transients from the previous target cannot leak into the collected
    readings.  Yields the uncalibrated filtered output, which is what a
    calibration fit must consume.
    """
    counter = {"target": 0}

    def readings(depth: float) -> Iterator[FilteredDepth]:
        idx = counter["target"]
        counter["target"] += 1
        target_noise = replace(noise, seed=noise.seed + 10007 * idx)
        synth = GazeSynthesizer(target_noise, ipd=config.geometry.ipd, tau=tau)
        filt = DepthFilter(config.filtering)
        n = int(round(max_duration * sample_rate))
        for i in range(n):
            record = synth.step(depth, i / sample_rate)
            yield filt.push(estimate_depth(record.sample, config.geometry))

    return readings


def calibrate_on_simulator(
    target_depths: list[float],
    noise: NoiseModel,
    config: PipelineConfig,
    dwell: float = 1.0,
    sample_rate: float = 120.0,
    aggregate: str = "mean",
) -> CalibrationModel:
    """Run the scripted calibration procedure against the simulator."""
    return run_calibration_session(
        target_depths,
        dwell=dwell,
        readings=simulated_readings(noise, config, sample_rate=sample_rate),
        aggregate=aggregate,
    )
