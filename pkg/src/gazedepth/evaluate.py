"""Batch experiments over the simulator: depth separability at static
targets and de-noising quality on a jumping target, with the metrics the
CLI reports (histogram, separability, RMSE, switch latency)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

import numpy as np

from .interaction import EventKind, InteractionEvent
from .pipeline import GazePipeline, PipelineConfig
from .simulator import (
    DEFAULT_VERGENCE_TAU,
    NoiseModel,
    Scenario,
    Static,
    Step,
    generate_trace,
    lagged_true_vergence,
)

HISTOGRAM_BIN_WIDTH = 0.05
# stride between per-target seeds so paired runs stay paired per target
SEED_STRIDE = 10007

SWITCH_KINDS = (EventKind.ACTIVATE_DETAIL, EventKind.EXIT_DETAIL)


@dataclass(frozen=True)
class DepthHistogram:
    """Per-target counts of settled depths over fixed-width bins."""

    bin_edges: tuple[float, ...]
    counts: dict[float, tuple[int, ...]]

    def total(self) -> int:
        return sum(sum(c) for c in self.counts.values())


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    targets: tuple[float, ...]
    n_samples: int
    n_settled: int
    histogram: DepthHistogram
    rmse_raw: float
    rmse_filtered: float
    separability: Optional[float] = None
    n_jumps: Optional[int] = None
    matched_switch_count: Optional[int] = None
    false_switch_count: Optional[int] = None
    switch_latency_mean: Optional[float] = None
    switch_latency_p95: Optional[float] = None
    artifacts: Any = field(default=None, repr=False, compare=False)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "targets": list(self.targets),
            "n_samples": self.n_samples,
            "n_settled": self.n_settled,
            "separability": self.separability,
            "rmse_raw": self.rmse_raw,
            "rmse_filtered": self.rmse_filtered,
            "n_jumps": self.n_jumps,
            "matched_switch_count": self.matched_switch_count,
            "false_switch_count": self.false_switch_count,
            "switch_latency_mean": self.switch_latency_mean,
            "switch_latency_p95": self.switch_latency_p95,
            "histogram": {
                "bin_edges": list(self.bin_edges),
                "counts": [
                    {"target": t, "counts": list(c)} for t, c in self.histogram.counts.items()
                ],
            },
        }

    @property
    def bin_edges(self) -> tuple[float, ...]:
        return self.histogram.bin_edges


@dataclass
class StaticArtifacts:
    settled_depths: dict[float, list[float]]


@dataclass
class StepArtifacts:
    timestamps: list[float]
    true_depth: list[float]
    lagged_depth: list[float]
    raw_depth: list[float]       # NaN where the estimate was not Valid
    filtered_depth: list[float]  # NaN where the filter was not settled
    events: list[InteractionEvent]
    latencies: list[float]


def histogram_edges(min_depth: float, max_depth: float, width: float = HISTOGRAM_BIN_WIDTH):
    n_bins = int(math.ceil((max_depth - min_depth) / width - 1e-9))
    edges = [min_depth + k * width for k in range(n_bins)] + [max_depth]
    return tuple(edges)


def classify_by_midpoint(vergence: float, target_vergences_desc: list[float]) -> int:
    """Index of the classified target; thresholds at adjacent diopter
    midpoints, ties toward the farther target."""
    for i, (v_near, v_far) in enumerate(zip(target_vergences_desc, target_vergences_desc[1:])):
        if vergence > (v_near + v_far) / 2.0:
            return i
    return len(target_vergences_desc) - 1


def _rmse(errors: list[float]) -> float:
    if not errors:
        return math.nan
    return float(np.sqrt(np.mean(np.square(errors))))


def run_static_experiment(
    depths: list[float],
    noise: NoiseModel = NoiseModel(),
    config: PipelineConfig = PipelineConfig(),
    samples_per_depth: int = 5000,
    sample_rate: float = 120.0,
    tau: float = DEFAULT_VERGENCE_TAU,
) -> ExperimentReport:
    """Stare at each static target; measure how separable the depths are.

    Separability is the fraction of settled samples classified to their true
    target by the diopter-midpoint thresholds.
    """
    if len(depths) < 2:
        raise ValueError("need at least 2 target depths")
    geometry = config.geometry
    edges = histogram_edges(geometry.min_depth, geometry.max_depth)
    order_desc = sorted(range(len(depths)), key=lambda i: 1.0 / depths[i], reverse=True)
    target_verg_desc = [1.0 / depths[i] for i in order_desc]

    counts: dict[float, tuple[int, ...]] = {}
    settled_by_target: dict[float, list[float]] = {}
    raw_errors: list[float] = []
    filtered_errors: list[float] = []
    n_samples = 0
    n_settled = 0
    correct = 0

    for k, depth in enumerate(depths):
        depth_noise = replace(noise, seed=noise.seed + SEED_STRIDE * k)
        scenario = Scenario(Static(depth), duration=samples_per_depth / sample_rate, sample_rate=sample_rate)
        records = generate_trace(scenario, depth_noise, ipd=geometry.ipd, tau=tau)
        lagged = lagged_true_vergence(records, tau=tau)
        pipeline = GazePipeline(config)
        settled_depths: list[float] = []
        for rec, lag_v in zip(records, lagged):
            n_samples += 1
            out = pipeline.process(rec.sample)
            if out.estimate.is_valid:
                raw_errors.append(out.estimate.depth - 1.0 / lag_v)
            if out.calibrated.is_settled and math.isfinite(out.calibrated.depth):
                n_settled += 1
                settled_depths.append(out.calibrated.depth)
                filtered_errors.append(out.calibrated.depth - 1.0 / lag_v)
                rank = classify_by_midpoint(out.calibrated.vergence, target_verg_desc)
                if order_desc[rank] == k:
                    correct += 1
        clipped = np.clip(settled_depths, geometry.min_depth, geometry.max_depth)
        hist, _ = np.histogram(clipped, bins=np.asarray(edges))
        counts[depth] = tuple(int(c) for c in hist)
        settled_by_target[depth] = settled_depths

    return ExperimentReport(
        kind="static",
        targets=tuple(depths),
        n_samples=n_samples,
        n_settled=n_settled,
        histogram=DepthHistogram(bin_edges=edges, counts=counts),
        separability=correct / n_settled if n_settled else math.nan,
        rmse_raw=_rmse(raw_errors),
        rmse_filtered=_rmse(filtered_errors),
        artifacts=StaticArtifacts(settled_depths=settled_by_target),
    )


def _find_jumps(records) -> list[tuple[float, EventKind]]:
    jumps = []
    for prev, cur in zip(records, records[1:]):
        if cur.true_depth != prev.true_depth:
            kind = EventKind.ACTIVATE_DETAIL if cur.true_depth < prev.true_depth else EventKind.EXIT_DETAIL
            jumps.append((cur.sample.timestamp, kind))
    return jumps


def run_step_experiment(
    d_far: float,
    d_near: float,
    period: float,
    noise: NoiseModel = NoiseModel(),
    config: PipelineConfig = PipelineConfig(),
    duration: float = 60.0,
    sample_rate: float = 120.0,
    tau: float = DEFAULT_VERGENCE_TAU,
) -> ExperimentReport:
    """Follow a target jumping between two depths; measure de-noising and
    switch behaviour against the lagged ground truth."""
    geometry = config.geometry
    scenario = Scenario(Step(d_far, d_near, period), duration=duration, sample_rate=sample_rate)
    records = generate_trace(scenario, noise, ipd=geometry.ipd, tau=tau)
    lagged = lagged_true_vergence(records, tau=tau)
    pipeline = GazePipeline(config)

    timestamps: list[float] = []
    true_depths: list[float] = []
    lagged_depths: list[float] = []
    raw_depths: list[float] = []
    filtered_depths: list[float] = []
    events: list[InteractionEvent] = []
    raw_errors: list[float] = []
    filtered_errors: list[float] = []
    settled_by_target: dict[float, list[float]] = {d_far: [], d_near: []}
    n_settled = 0

    for rec, lag_v in zip(records, lagged):
        out = pipeline.process(rec.sample)
        lag_d = 1.0 / lag_v
        timestamps.append(rec.sample.timestamp)
        true_depths.append(rec.true_depth)
        lagged_depths.append(lag_d)
        if out.estimate.is_valid:
            raw_depths.append(out.estimate.depth)
            raw_errors.append(out.estimate.depth - lag_d)
        else:
            raw_depths.append(math.nan)
        if out.calibrated.is_settled and math.isfinite(out.calibrated.depth):
            n_settled += 1
            filtered_depths.append(out.calibrated.depth)
            filtered_errors.append(out.calibrated.depth - lag_d)
            settled_by_target[rec.true_depth].append(out.calibrated.depth)
        else:
            filtered_depths.append(math.nan)
        events.extend(out.events)

    switch_events = [e for e in events if e.kind in SWITCH_KINDS]
    jumps = _find_jumps(records)
    matched = [False] * len(jumps)
    latencies: list[float] = []
    false_switches = 0
    for event in switch_events:
        candidate = None
        for j, (t_jump, kind) in enumerate(jumps):
            if t_jump <= event.timestamp < t_jump + period:
                candidate = j
        if candidate is not None and not matched[candidate] and jumps[candidate][1] is event.kind:
            matched[candidate] = True
            latencies.append(event.timestamp - jumps[candidate][0])
        else:
            false_switches += 1

    edges = histogram_edges(geometry.min_depth, geometry.max_depth)
    counts = {}
    for target, vals in settled_by_target.items():
        clipped = np.clip(vals, geometry.min_depth, geometry.max_depth) if vals else np.array([])
        hist, _ = np.histogram(clipped, bins=np.asarray(edges))
        counts[target] = tuple(int(c) for c in hist)

    return ExperimentReport(
        kind="step",
        targets=(d_far, d_near),
        n_samples=len(records),
        n_settled=n_settled,
        histogram=DepthHistogram(bin_edges=edges, counts=counts),
        rmse_raw=_rmse(raw_errors),
        rmse_filtered=_rmse(filtered_errors),
        n_jumps=len(jumps),
        matched_switch_count=sum(matched),
        false_switch_count=false_switches,
        switch_latency_mean=float(np.mean(latencies)) if latencies else None,
        switch_latency_p95=float(np.percentile(latencies, 95)) if latencies else None,
        artifacts=StepArtifacts(
            timestamps=timestamps,
            true_depth=true_depths,
            lagged_depth=lagged_depths,
            raw_depth=raw_depths,
            filtered_depth=filtered_depths,
            events=events,
            latencies=latencies,
        ),
    )


def _fmt(value, digits=9) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.{digits}g}"
    return str(value)


def report_text(report: ExperimentReport, bars: bool = True) -> str:
    """Key-value block, nonzero per-bin lines, and a printable histogram."""
    lines = [
        f"kind {report.kind}",
        f"targets {','.join(_fmt(t) for t in report.targets)}",
        f"n_samples {report.n_samples}",
        f"n_settled {report.n_settled}",
        f"separability {_fmt(report.separability)}",
        f"rmse_raw_m {_fmt(report.rmse_raw)}",
        f"rmse_filtered_m {_fmt(report.rmse_filtered)}",
        f"n_jumps {_fmt(report.n_jumps)}",
        f"matched_switch_count {_fmt(report.matched_switch_count)}",
        f"false_switch_count {_fmt(report.false_switch_count)}",
        f"switch_latency_mean_s {_fmt(report.switch_latency_mean)}",
        f"switch_latency_p95_s {_fmt(report.switch_latency_p95)}",
    ]
    edges = report.bin_edges
    for target, counts in report.histogram.counts.items():
        for (lo, hi), count in zip(zip(edges, edges[1:]), counts):
            if count:
                lines.append(f"bin {_fmt(target)} {_fmt(lo)} {_fmt(hi)} {count}")
    if bars:
        for target, counts in report.histogram.counts.items():
            peak = max(counts) if counts else 0
            if not peak:
                continue
            lines.append(f"histogram target={_fmt(target)}m")
            for (lo, hi), count in zip(zip(edges, edges[1:]), counts):
                if count:
                    bar = "#" * max(1, round(40 * count / peak))
                    lines.append(f"  {lo:7.3f}-{hi:7.3f} {bar} {count}")
    return "\n".join(lines) + "\n"


def write_histogram_csv(report: ExperimentReport, path: str) -> None:
    import csv

    edges = report.bin_edges
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target", "bin_lo", "bin_hi", "count"])
        for target, counts in report.histogram.counts.items():
            for (lo, hi), count in zip(zip(edges, edges[1:]), counts):
                writer.writerow([repr(float(target)), repr(float(lo)), repr(float(hi)), count])


def write_series_csv(artifacts: StepArtifacts, path: str) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "true_depth", "lagged_depth", "raw_depth", "filtered_depth"])
        rows = zip(
            artifacts.timestamps,
            artifacts.true_depth,
            artifacts.lagged_depth,
            artifacts.raw_depth,
            artifacts.filtered_depth,
        )
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
