"""Synthetic binocular gaze generator with ground truth.

Fixation vergence lags a scripted target trajectory with a first-order time
constant, exact eye rays are built toward the lagged fixation point, and
measurement imperfections are layered on top: per-axis Gaussian angular
noise on each eye, occasional single-eye outliers, blink windows that hold
the last emitted directions, and an optional affine vergence distortion
standing in for per-user tracker bias.

Randomness is split into independent per-purpose streams spawned from one
seed, and each sample consumes a fixed number of draws from each stream, so
any prefix of a trace is bit-identical regardless of the total duration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import TraceParseError
from .geometry import GazeSample, Ray, Vec3, normalize

DEFAULT_SAMPLE_RATE = 120.0
DEFAULT_VERGENCE_TAU = 0.18

TRACE_FIELDS = (
    "t",
    "lox", "loy", "loz", "ldx", "ldy", "ldz",
    "rox", "roy", "roz", "rdx", "rdy", "rdz",
    "true_depth", "blink",
)


@dataclass(frozen=True, slots=True)
class Static:
    depth: float

    def __post_init__(self):
        if self.depth <= 0.0:
            raise ValueError("depth must be positive")

    def depth_at(self, t: float) -> float:
        return self.depth


@dataclass(frozen=True, slots=True)
class Step:
    d_far: float
    d_near: float
    period: float

    def __post_init__(self):
        if self.d_far <= 0.0 or self.d_near <= 0.0:
            raise ValueError("depths must be positive")
        if self.period <= 0.0:
            raise ValueError("period must be positive")

    def depth_at(self, t: float) -> float:
        return self.d_far if int(t // self.period) % 2 == 0 else self.d_near


@dataclass(frozen=True, slots=True)
class Sweep:
    d_start: float
    d_end: float
    duration: float

    def __post_init__(self):
        if self.d_start <= 0.0 or self.d_end <= 0.0:
            raise ValueError("depths must be positive")
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")

    def depth_at(self, t: float) -> float:
        if t >= self.duration:
            return self.d_end
        return self.d_start + (t / self.duration) * (self.d_end - self.d_start)


Trajectory = Union[Static, Step, Sweep]


def parse_trajectory(spec: str) -> Trajectory:
    """Parse a trajectory spec: static:<depth>, step:<far>,<near>,<period>,
    or sweep:<start>,<end>,<duration> (all values in meters/seconds)."""
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise ValueError(f"bad trajectory spec {spec!r}: missing ':'")
    try:
        args = [float(x) for x in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ValueError(f"bad trajectory spec {spec!r}: {exc}") from exc
    if kind == "static" and len(args) == 1:
        return Static(args[0])
    if kind == "step" and len(args) == 3:
        return Step(args[0], args[1], args[2])
    if kind == "sweep" and len(args) == 3:
        return Sweep(args[0], args[1], args[2])
    raise ValueError(
        f"bad trajectory spec {spec!r}: expected static:<d>, step:<far>,<near>,<period>, "
        f"or sweep:<start>,<end>,<duration>"
    )


@dataclass(frozen=True, slots=True)
class Scenario:
    kind: Trajectory
    duration: float
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if self.duration <= 0.0 or self.sample_rate <= 0.0:
            raise ValueError("duration and sample_rate must be positive")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))


@dataclass(frozen=True, slots=True)
class NoiseModel:
    angular_sigma: float = 0.0035      # rad per axis per eye (~0.2 deg)
    outlier_prob: float = 0.01
    outlier_sigma: float = 0.05        # rad, extra single-eye perturbation
    blink_prob_per_s: float = 0.2
    blink_duration: float = 0.12
    seed: int = 0
    # affine tracker distortion in diopter space: the eyes are rendered as if
    # fixating vergence_gain * V_true + vergence_bias
    vergence_gain: float = 1.0
    vergence_bias: float = 0.0

    def __post_init__(self):
        for p in (self.outlier_prob,):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must be in [0, 1]")
        if self.blink_prob_per_s < 0.0:
            raise ValueError("blink_prob_per_s must be >= 0")
        for s in (self.angular_sigma, self.outlier_sigma):
            if s < 0.0:
                raise ValueError("sigmas must be >= 0")
        if self.vergence_gain <= 0.0:
            raise ValueError("vergence_gain must be positive")

    def quiet(self) -> "NoiseModel":
        """Copy with all stochastic effects disabled (distortion kept)."""
        return NoiseModel(
            angular_sigma=0.0,
            outlier_prob=0.0,
            outlier_sigma=0.0,
            blink_prob_per_s=0.0,
            blink_duration=self.blink_duration,
            seed=self.seed,
            vergence_gain=self.vergence_gain,
            vergence_bias=self.vergence_bias,
        )


@dataclass(frozen=True, slots=True)
class TraceRecord:
    sample: GazeSample
    true_depth: float
    true_target: Vec3
    blink: bool


def vergence_dynamics_step(current: float, target: float, dt: float, tau: float) -> float:
    """Exact first-order lag update; stable for any dt."""
    if dt <= 0.0 or tau <= 0.0:
        raise ValueError("dt and tau must be positive")
    return current + (target - current) * (1.0 - math.exp(-dt / tau))


def _rotate(d: Vec3, pitch: float, yaw: float) -> Vec3:
    # pitch about +x, then yaw about +y; exact identity for zero angles
    x, y, z = d
    cp, sp = math.cos(pitch), math.sin(pitch)
    y, z = y * cp - z * sp, y * sp + z * cp
    cy, sy = math.cos(yaw), math.sin(yaw)
    x, z = x * cy + z * sy, -x * sy + z * cy
    return (x, y, z)


class GazeSynthesizer:
    """Incremental gaze-sample source; one instance per stream.

    Feed it (target_depth, timestamp) pairs at the sample rate and it yields
    TraceRecords.  Deterministic given the NoiseModel seed, independent of
    how many samples are ultimately drawn.
    """

    def __init__(self, noise: NoiseModel, ipd: float = 0.063, tau: float = DEFAULT_VERGENCE_TAU):
        if tau <= 0.0:
            raise ValueError("tau must be positive")
        self.noise = noise
        self.ipd = ipd
        self.tau = tau
        streams = np.random.SeedSequence(noise.seed).spawn(5)
        self._rng_noise = np.random.Generator(np.random.PCG64(streams[0]))
        self._rng_outlier = np.random.Generator(np.random.PCG64(streams[1]))
        self._rng_eye = np.random.Generator(np.random.PCG64(streams[2]))
        self._rng_outlier_mag = np.random.Generator(np.random.PCG64(streams[3]))
        self._rng_blink = np.random.Generator(np.random.PCG64(streams[4]))
        self._vergence: float | None = None
        self._last_t: float | None = None
        self._blink_until = -math.inf
        self._held_dirs: tuple[Vec3, Vec3] | None = None

    @property
    def vergence(self) -> float | None:
        """Current lagged fixation vergence (undistorted), diopters."""
        return self._vergence

    def step(self, target_depth: float, t: float) -> TraceRecord:
        if target_depth <= 0.0:
            raise ValueError("target_depth must be positive")
        noise = self.noise
        target_v = 1.0 / target_depth
        if self._vergence is None:
            dt = 1.0 / DEFAULT_SAMPLE_RATE
            self._vergence = target_v
        else:
            dt = t - self._last_t
            if dt > 0.0:
                self._vergence = vergence_dynamics_step(self._vergence, target_v, dt, self.tau)
        self._last_t = t

        # fixed draw count per sample keeps every stream position-independent
        eps = self._rng_noise.normal(0.0, noise.angular_sigma, size=4)
        outlier_roll = self._rng_outlier.uniform()
        outlier_eye = int(self._rng_eye.integers(0, 2))
        outlier_angles = self._rng_outlier_mag.normal(0.0, noise.outlier_sigma, size=2)
        blink_roll = self._rng_blink.uniform()

        measured_v = noise.vergence_gain * self._vergence + noise.vergence_bias
        if measured_v <= 0.0:
            raise ValueError(f"distorted vergence {measured_v!r} D is not positive")
        fixation: Vec3 = (0.0, 0.0, 1.0 / measured_v)
        half = self.ipd / 2.0
        left_origin: Vec3 = (-half, 0.0, 0.0)
        right_origin: Vec3 = (half, 0.0, 0.0)
        left_dir = normalize((fixation[0] + half, fixation[1], fixation[2]))
        right_dir = normalize((fixation[0] - half, fixation[1], fixation[2]))

        left_dir = _rotate(left_dir, float(eps[0]), float(eps[1]))
        right_dir = _rotate(right_dir, float(eps[2]), float(eps[3]))
        if outlier_roll < noise.outlier_prob:
            extra = (float(outlier_angles[0]), float(outlier_angles[1]))
            if outlier_eye == 0:
                left_dir = _rotate(left_dir, *extra)
            else:
                right_dir = _rotate(right_dir, *extra)

        blinking = t < self._blink_until
        if not blinking and blink_roll < noise.blink_prob_per_s * dt:
            self._blink_until = t + noise.blink_duration
            blinking = True
        if blinking and self._held_dirs is not None:
            left_dir, right_dir = self._held_dirs
        else:
            self._held_dirs = (left_dir, right_dir)

        sample = GazeSample(
            timestamp=t,
            left=Ray(left_origin, left_dir),
            right=Ray(right_origin, right_dir),
        )
        return TraceRecord(
            sample=sample,
            true_depth=target_depth,
            true_target=(0.0, 0.0, target_depth),
            blink=blinking,
        )

def generate_trace(
    scenario: Scenario,
    noise: NoiseModel = NoiseModel(),
    ipd: float = 0.063,
    tau: float = DEFAULT_VERGENCE_TAU,
) -> list[TraceRecord]:
    """Run a scenario through the synthesizer; deterministic given the seed."""
    synth = GazeSynthesizer(noise, ipd=ipd, tau=tau)
    records = []
    rate = scenario.sample_rate
    for i in range(scenario.n_samples):
        t = i / rate
        records.append(synth.step(scenario.kind.depth_at(t), t))
    return records


def lagged_true_vergence(records: Iterable[TraceRecord], tau: float = DEFAULT_VERGENCE_TAU) -> list[float]:
    """Reconstruct the lagged (eye-side) fixation vergence from a trace.

    Replays the same first-order lag the synthesizer applied, so the result
    is bit-identical to the generator's internal state for a trace produced
    with the same tau.
    """
    out = []
    v: float | None = None
    last_t: float | None = None
    for rec in records:
        target_v = 1.0 / rec.true_depth
        t = rec.sample.timestamp
        if v is None:
            v = target_v
        elif t - last_t > 0.0:
            v = vergence_dynamics_step(v, target_v, t - last_t, tau)
        last_t = t
        out.append(v)
    return out


def _record_to_dict(rec: TraceRecord) -> dict:
    s = rec.sample
    lo, ld = s.left.origin, s.left.direction
    ro, rd = s.right.origin, s.right.direction
    return {
        "t": s.timestamp,
        "lox": lo[0], "loy": lo[1], "loz": lo[2],
        "ldx": ld[0], "ldy": ld[1], "ldz": ld[2],
        "rox": ro[0], "roy": ro[1], "roz": ro[2],
        "rdx": rd[0], "rdy": rd[1], "rdz": rd[2],
        "true_depth": rec.true_depth,
        "blink": rec.blink,
    }


def _record_from_dict(d: dict) -> TraceRecord:
    sample = GazeSample(
        timestamp=d["t"],
        left=Ray((d["lox"], d["loy"], d["loz"]), (d["ldx"], d["ldy"], d["ldz"])),
        right=Ray((d["rox"], d["roy"], d["roz"]), (d["rdx"], d["rdy"], d["rdz"])),
    )
    depth = d["true_depth"]
    return TraceRecord(sample=sample, true_depth=depth, true_target=(0.0, 0.0, depth), blink=bool(d["blink"]))


def write_trace(records: Iterable[TraceRecord], path: str) -> None:
    """JSON Lines dump; floats use shortest-round-trip decimal form, so
    read_trace(write_trace(x)) reproduces x bit-exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_record_to_dict(rec)) + "\n")


def read_trace(path: str) -> list[TraceRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                raise TraceParseError(path, line_no, "blank line")
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceParseError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            missing = [k for k in TRACE_FIELDS if k not in d]
            if missing:
                raise TraceParseError(path, line_no, f"missing fields: {', '.join(missing)}")
            try:
                records.append(_record_from_dict(d))
            except (TypeError, ValueError) as exc:
                raise TraceParseError(path, line_no, str(exc)) from exc
    return records
