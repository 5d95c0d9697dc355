"""Per-user affine correction of the vergence signal.

Detected depths are shifted per user (tracker bias, IPD mismatch), so a
two-parameter model in diopter space -- true = gain * measured + bias --
is fitted by ordinary least squares over a handful of known-depth targets
and applied between the filter and the interaction state machine.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Iterator

from .errors import DegenerateFitError, InsufficientDataError, TimeoutNoSettleError
from .filtering import FilteredDepth, Quality


@dataclass(frozen=True, slots=True)
class CalibrationPoint:
    measured_vergence: float  # settled filter reading while fixating the target
    true_vergence: float      # 1 / known target depth

    def __post_init__(self):
        for v in (self.measured_vergence, self.true_vergence):
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"vergences must be finite and positive, got {v!r}")


@dataclass(frozen=True, slots=True)
class CalibrationModel:
    gain: float
    bias: float
    residual_rms: float
    n_points: int

    def __post_init__(self):
        if self.gain <= 0.0:
            raise DegenerateFitError(f"gain must be positive, got {self.gain!r}")

    def apply(self, vergence: float) -> float:
        return self.gain * vergence + self.bias


IDENTITY_MODEL = CalibrationModel(gain=1.0, bias=0.0, residual_rms=0.0, n_points=0)


def fit_calibration(points: list[CalibrationPoint]) -> CalibrationModel:
    """Closed-form OLS for (gain, bias) minimizing sum((gain*m + b - true)^2).

    Raises InsufficientDataError with fewer than two distinct true depths and
    DegenerateFitError when the fit has no positive gain (the user looked at
    the wrong targets, or all measurements coincide).
    """
    if len(points) < 2 or len({p.true_vergence for p in points}) < 2:
        raise InsufficientDataError("need at least 2 points at distinct depths")

    n = len(points)
    xs = [p.measured_vergence for p in points]
    ys = [p.true_vergence for p in points]
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    if sxx == 0.0:
        raise DegenerateFitError("all measured vergences identical; gain is undetermined")
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    gain = sxy / sxx
    bias = y_mean - gain * x_mean
    if gain <= 0.0:
        raise DegenerateFitError(f"fitted gain {gain!r} <= 0")
    residual_rms = math.sqrt(sum((gain * x + bias - y) ** 2 for x, y in zip(xs, ys)) / n)
    return CalibrationModel(gain=gain, bias=bias, residual_rms=residual_rms, n_points=n)


def apply_calibration(model: CalibrationModel, vergence: float) -> float:
    return model.apply(vergence)


def run_calibration_session(
    target_depths: list[float],
    dwell: float,
    readings: Callable[[float], Iterator[FilteredDepth]],
    aggregate: str = "mean",
    settle_timeout: float = 5.0,
) -> CalibrationModel:
    """Scripted calibration: fixate each target, collect settled readings.

    `readings(depth)` yields the filtered pipeline output while the user (or
    simulator) fixates a target at `depth` meters.  Per target, readings are
    consumed until the filter settles, then settled readings spanning the
    dwell window are aggregated into one CalibrationPoint.

    Raises TimeoutNoSettleError if a target produces no settled reading
    within settle_timeout seconds of stream time, and propagates fit errors.
    """
    if aggregate not in ("mean", "median"):
        raise ValueError(f"aggregate must be 'mean' or 'median', got {aggregate!r}")

    points = []
    for depth in target_depths:
        collected: list[float] = []
        t_first = None
        t_settled = None
        for out in readings(depth):
            if t_first is None:
                t_first = out.timestamp
            if out.quality is Quality.SETTLED:
                if t_settled is None:
                    t_settled = out.timestamp
                collected.append(out.vergence)
                if out.timestamp - t_settled >= dwell:
                    break
            elif t_settled is None and out.timestamp - t_first > settle_timeout:
                raise TimeoutNoSettleError(
                    f"target at {depth} m produced no settled reading in {settle_timeout} s"
                )
        if t_settled is None or not collected:
            raise TimeoutNoSettleError(f"target at {depth} m stream ended before settling")
        if aggregate == "mean":
            measured = sum(collected) / len(collected)
        else:
            collected.sort()
            mid = len(collected) // 2
            measured = collected[mid] if len(collected) % 2 else (collected[mid - 1] + collected[mid]) / 2.0
        points.append(CalibrationPoint(measured_vergence=measured, true_vergence=1.0 / depth))
    return fit_calibration(points)


def _created_at() -> str:
    # SOURCE_DATE_EPOCH (reproducible-builds convention) pins the timestamp
    # so seeded CLI runs can produce byte-identical calibration files.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = int(epoch) if epoch is not None else int(time.time())
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def save_calibration(model: CalibrationModel, path: str) -> None:
    """Write the model as a small key=value text file."""
    lines = [
        f"gain={model.gain!r}",
        f"bias={model.bias!r}",
        f"residual_rms={model.residual_rms!r}",
        f"n_points={model.n_points}",
        f"created_at={_created_at()}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_calibration(path: str) -> CalibrationModel:
    """Read a key=value calibration file written by save_calibration."""
    fields: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}: malformed line {line!r}")
            fields[key.strip()] = value.strip()
    try:
        return CalibrationModel(
            gain=float(fields["gain"]),
            bias=float(fields["bias"]),
            residual_rms=float(fields["residual_rms"]),
            n_points=int(fields["n_points"]),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing calibration field {exc}") from exc
