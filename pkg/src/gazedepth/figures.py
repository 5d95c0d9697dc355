"""Figure rendering for the evaluation reports.

Imported only from the CLI report path; the rest of the package has no
plotting dependency.  Uses the Agg backend so output files are
byte-deterministic across runs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import ExperimentReport, StepArtifacts


def render_static_figure(report: ExperimentReport, path: str) -> None:
    """Depth-frequency histogram per target, one panel, overlaid bars."""
    edges = np.asarray(report.bin_edges)
    centers = (edges[:-1] + edges[1:]) / 2.0
    width = float(np.min(np.diff(edges)))

    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for target, counts in report.histogram.counts.items():
        counts = np.asarray(counts)
        mask = counts > 0
        ax.bar(centers[mask], counts[mask], width=width * 0.9, alpha=0.6, label=f"target {target} m")
    ax.set_xlabel("detected depth (m)")
    ax.set_ylabel("settled samples")
    ax.set_title("Depth frequency by target")
    if report.histogram.counts:
        populated = [c for counts in report.histogram.counts.values() for c, e in zip(counts, centers) if c]
        if populated:
            lo = min(e for counts in report.histogram.counts.values() for c, e in zip(counts, centers) if c)
            hi = max(e for counts in report.histogram.counts.values() for c, e in zip(counts, centers) if c)
            pad = max(0.2, 0.2 * (hi - lo))
            ax.set_xlim(max(edges[0], lo - pad), min(edges[-1], hi + pad))
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_step_figure(artifacts: StepArtifacts, path: str) -> None:
    """Depth-over-time curves: lagged truth, raw estimate, filtered output."""
    t = np.asarray(artifacts.timestamps)
    fig, ax = plt.subplots(figsize=(9.0, 4.0))
    ax.plot(t, artifacts.raw_depth, color="0.7", linewidth=0.7, label="raw estimate")
    ax.plot(t, artifacts.filtered_depth, color="tab:blue", linewidth=1.4, label="filtered")
    ax.plot(t, artifacts.lagged_depth, color="tab:red", linewidth=1.0, linestyle="--", label="lagged truth")
    for event in artifacts.events:
        if event.layer_to is not None:
            ax.axvline(event.timestamp, color="tab:green", alpha=0.4, linewidth=0.8)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("depth (m)")
    ax.set_title("Depth tracking on a jumping target")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
