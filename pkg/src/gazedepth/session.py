"""Transport-agnostic playground session engine.

One engine drives one interactive session: a synthetic pair of eyes whose
fixation target the client steers (directly or via a scripted trajectory),
ticked through the full pipeline at the sample rate on a simulated clock.
Control messages are applied between ticks, so a session is a deterministic
function of (config, seed, the tick at which each message was applied) --
which is what makes live service runs replayable as batch runs.

Message schemas are documented in docs/protocol.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .calibration import CalibrationPoint, fit_calibration
from .errors import GazeDepthError
from .filtering import Quality
from .interaction import cue_opacity
from .pipeline import GazePipeline, PipelineConfig
from .simulator import (
    DEFAULT_VERGENCE_TAU,
    GazeSynthesizer,
    NoiseModel,
    Trajectory,
    parse_trajectory,
)

SCENE_OBJECT = "exhibit"  # the single hoverable object in the desk-scale scene

CLIENT_TYPES = ("set_target", "set_scenario", "set_noise", "reset", "calibrate_point", "calibrate_fit")

# calibration collection inside a live session
CALIB_SETTLE_TIMEOUT = 5.0
CALIB_DWELL = 0.5
# fixation lead-in before readings count: the simulated eyes converge on the
# new target with tau ~0.18 s, so 1.5 s leaves a <0.001 D transit residual
CALIB_LEAD_IN = 1.5


@dataclass(frozen=True)
class SessionConfig:
    pipeline: PipelineConfig = PipelineConfig()
    noise: NoiseModel = NoiseModel()
    sample_rate: float = 120.0
    tau: float = DEFAULT_VERGENCE_TAU
    initial_target_vergence: Optional[float] = None  # default: portal layer


def _none_if_nan(x: float) -> Optional[float]:
    return None if (x is None or math.isnan(x)) else x


@dataclass
class _CalibrationCollection:
    depth: float
    started_t: float
    settled_t: Optional[float] = None
    readings: list[float] = field(default_factory=list)


class SessionEngine:
    """Single-owner session state; `apply` messages, then `tick`."""

    def __init__(self, config: SessionConfig = SessionConfig()):
        self.config = config
        self.pipeline = GazePipeline(config.pipeline)
        self.synth = GazeSynthesizer(config.noise, ipd=config.pipeline.geometry.ipd, tau=config.tau)
        layers = config.pipeline.layers
        if config.initial_target_vergence is not None:
            self.target_vergence = config.initial_target_vergence
        else:
            self.target_vergence = layers.layers[0].vergence
        self.scenario: Optional[Trajectory] = None
        self.scenario_t0 = 0.0
        self.tick_index = 0
        self.seq = 0
        self.calibration_points: list[CalibrationPoint] = []
        self._collection: Optional[_CalibrationCollection] = None
        self._applied_since_tick: list[str] = []

    # -- control messages -------------------------------------------------

    def apply(self, message: Any) -> list[dict]:
        """Apply one client message; returns immediate reply messages."""
        if not isinstance(message, dict):
            return [self._error("bad_message", "message must be a JSON object")]
        mtype = message.get("type")
        if mtype not in CLIENT_TYPES:
            return [self._error("bad_type", f"unknown message type {mtype!r}")]
        handler = getattr(self, f"_on_{mtype}")
        try:
            replies = handler(message)
        except (GazeDepthError, ValueError, KeyError, TypeError) as exc:
            return [self._error("bad_value", str(exc))]
        self._applied_since_tick.append(mtype)
        return replies

    def _on_set_target(self, message: dict) -> list[dict]:
        vergence = float(message["vergence"])
        if not (math.isfinite(vergence) and vergence > 0.0):
            raise ValueError(f"target vergence must be positive, got {vergence!r}")
        self.target_vergence = vergence
        self.scenario = None
        return []

    def _on_set_scenario(self, message: dict) -> list[dict]:
        self.scenario = parse_trajectory(str(message["scenario"]))
        self.scenario_t0 = self.tick_index / self.config.sample_rate
        return []

    def _on_set_noise(self, message: dict) -> list[dict]:
        fields = {}
        for key, attr in (
            ("sigma", "angular_sigma"),
            ("outlier_prob", "outlier_prob"),
            ("outlier_sigma", "outlier_sigma"),
            ("blink_prob_per_s", "blink_prob_per_s"),
            ("vergence_gain", "vergence_gain"),
            ("vergence_bias", "vergence_bias"),
        ):
            if key in message:
                fields[attr] = float(message[key])
        if not fields:
            raise ValueError("set_noise carries no recognized fields")
        # swap the model in place; RNG streams keep their position so the
        # change is deterministic given the tick it lands on
        self.synth.noise = replace(self.synth.noise, **fields)
        return []

    def _on_reset(self, message: dict) -> list[dict]:
        self.pipeline.reset(preserve_familiarity=True)
        self._collection = None
        return []

    def _on_calibrate_point(self, message: dict) -> list[dict]:
        depth = float(message["depth"])
        if depth <= 0.0:
            raise ValueError(f"calibration depth must be positive, got {depth!r}")
        if self._collection is not None:
            raise ValueError("a calibration point is already being collected")
        # the user fixates the known target while readings are collected
        self.target_vergence = 1.0 / depth
        self.scenario = None
        self._collection = _CalibrationCollection(depth=depth, started_t=self.tick_index / self.config.sample_rate)
        return []

    def _on_calibrate_fit(self, message: dict) -> list[dict]:
        try:
            model = fit_calibration(self.calibration_points)
        except GazeDepthError as exc:
            return [self._error("calibration_failed", str(exc))]
        self.pipeline.set_calibration(model)
        return [
            self._stamp(
                {
                    "type": "calibration_result",
                    "kind": "model",
                    "gain": model.gain,
                    "bias": model.bias,
                    "residual_rms": model.residual_rms,
                    "n_points": model.n_points,
                }
            )
        ]

    # -- ticking -----------------------------------------------------------

    def tick(self) -> list[dict]:
        """Advance the simulated clock one sample; returns messages to send."""
        t = self.tick_index / self.config.sample_rate
        if self.scenario is not None:
            target_depth = self.scenario.depth_at(t - self.scenario_t0)
        else:
            target_depth = 1.0 / self.target_vergence
        record = self.synth.step(target_depth, t)
        out = self.pipeline.process(record.sample, hover=SCENE_OBJECT)
        self.tick_index += 1

        messages: list[dict] = []
        collection_result = self._collect_calibration(out, t)

        event_dicts = [e.to_json_dict() for e in out.events]
        frame = {
            "type": "frame",
            "tick": self.tick_index - 1,
            "t": t,
            "raw_depth": _none_if_nan(out.estimate.depth) if out.estimate.is_valid else None,
            "raw_vergence": _none_if_nan(out.estimate.vergence) if out.estimate.is_valid else None,
            "validity": out.estimate.validity.value,
            "depth": _none_if_nan(out.calibrated.depth),
            "vergence": _none_if_nan(out.calibrated.vergence),
            "quality": out.calibrated.quality.value,
            "rejected": out.calibrated.rejected,
            "layer": self.pipeline.state.current_layer,
            "pending_layer": self.pipeline.state.pending.target_layer if self.pipeline.state.pending else None,
            "switch_count": self.pipeline.state.switch_count,
            "cue_opacity": cue_opacity(self.pipeline.state.switch_count),
            "blink": record.blink,
            "events": event_dicts,
            "applied": self._applied_since_tick,
            "config": self._config_echo(),
        }
        self._applied_since_tick = []
        messages.append(self._stamp(frame))
        for ed in event_dicts:
            messages.append(self._stamp({"type": "event", **ed}))
        if collection_result is not None:
            messages.append(collection_result)
        return messages

    def _collect_calibration(self, out, t: float) -> Optional[dict]:
        col = self._collection
        if col is None:
            return None
        if t - col.started_t < CALIB_LEAD_IN:
            return None
        # calibration consumes the uncalibrated filter output
        if out.filtered.quality is Quality.SETTLED:
            if col.settled_t is None:
                col.settled_t = t
            col.readings.append(out.filtered.vergence)
            if t - col.settled_t >= CALIB_DWELL:
                measured = sum(col.readings) / len(col.readings)
                point = CalibrationPoint(measured_vergence=measured, true_vergence=1.0 / col.depth)
                self.calibration_points.append(point)
                self._collection = None
                return self._stamp(
                    {
                        "type": "calibration_result",
                        "kind": "point",
                        "measured_vergence": measured,
                        "true_vergence": point.true_vergence,
                        "n_points": len(self.calibration_points),
                    }
                )
        elif col.settled_t is None and t - col.started_t > CALIB_LEAD_IN + CALIB_SETTLE_TIMEOUT:
            self._collection = None
            return self._error("calibration_failed", f"target at {col.depth} m never settled")
        return None

    # -- helpers -----------------------------------------------------------

    def _stamp(self, message: dict) -> dict:
        message["seq"] = self.seq
        self.seq += 1
        return message

    def _error(self, code: str, detail: str) -> dict:
        return self._stamp({"type": "error", "code": code, "detail": detail})

    def _config_echo(self) -> dict:
        noise = self.synth.noise
        layers = self.pipeline.config.layers
        model = self.pipeline.config.calibration
        return {
            "target_vergence": self.target_vergence if self.scenario is None else None,
            "scenario": _trajectory_spec(self.scenario),
            "noise_sigma": noise.angular_sigma,
            "outlier_prob": noise.outlier_prob,
            "blink_prob_per_s": noise.blink_prob_per_s,
            "vergence_gain": noise.vergence_gain,
            "vergence_bias": noise.vergence_bias,
            "seed": noise.seed,
            "sample_rate": self.config.sample_rate,
            "layer_depths": [layer.depth for layer in layers.layers],
            "layer_ids": [layer.id for layer in layers.layers],
            "dwell": layers.dwell,
            "hysteresis_fraction": layers.hysteresis_fraction,
            "calibration": {"gain": model.gain, "bias": model.bias},
        }


def _trajectory_spec(kind: Optional[Trajectory]) -> Optional[str]:
    if kind is None:
        return None
    from .simulator import Static, Step, Sweep

    if isinstance(kind, Static):
        return f"static:{kind.depth}"
    if isinstance(kind, Step):
        return f"step:{kind.d_far},{kind.d_near},{kind.period}"
    if isinstance(kind, Sweep):
        return f"sweep:{kind.d_start},{kind.d_end},{kind.duration}"
    return None


def replay_script(
    config: SessionConfig,
    script: list[tuple[int, dict]],
    n_ticks: int,
) -> list[dict]:
    """Batch-run a session: apply each scripted message just before its tick.

    Returns every message the engine produced, in order.  A live service run
    that applied the same messages at the same ticks produces the identical
    sequence, which is the service/batch equivalence contract.
    """
    engine = SessionEngine(config)
    by_tick: dict[int, list[dict]] = {}
    for tick_at, message in script:
        by_tick.setdefault(tick_at, []).append(message)
    out: list[dict] = []
    for tick in range(n_ticks):
        for message in by_tick.get(tick, []):
            out.extend(engine.apply(message))
        out.extend(engine.tick())
    return out
