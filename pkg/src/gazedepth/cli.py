"""Command-line interface.

Subcommands: simulate, estimate, eval-static, eval-step, calibrate, serve.
Exit codes: 0 success, 1 usage error, 2 IO/parse error.  All subcommands are
deterministic given --seed; figure/CSV companions are written next to --out
by the eval subcommands.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

from .calibration import load_calibration, save_calibration
from .errors import GazeDepthError, TraceParseError
from .evaluate import (
    report_text,
    run_static_experiment,
    run_step_experiment,
    write_histogram_csv,
    write_series_csv,
)
from .filtering import FilterConfig
from .geometry import GeometryConfig
from .interaction import configure_layers, write_events
from .pipeline import GazePipeline, PipelineConfig, calibrate_on_simulator
from .simulator import (
    NoiseModel,
    Scenario,
    generate_trace,
    parse_trajectory,
    read_trace,
    write_trace,
)

USAGE_ERROR = 1
IO_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--noise-sigma", type=float, default=0.0035, help="angular noise, rad per axis per eye")
    p.add_argument("--outlier-prob", type=float, default=0.01)
    p.add_argument("--outlier-sigma", type=float, default=0.05)
    p.add_argument("--blink-prob", type=float, default=0.2, help="blink starts per second")
    p.add_argument("--blink-duration", type=float, default=0.12)
    p.add_argument("--vergence-gain", type=float, default=1.0, help="simulated tracker gain distortion")
    p.add_argument("--vergence-bias", type=float, default=0.0, help="simulated tracker bias, diopters")
    p.add_argument("--tau", type=float, default=0.18, help="vergence lag time constant, s")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ipd", type=float, default=0.063, help="inter-pupillary distance, m")
    p.add_argument("--window", type=int, default=11, help="filter window, samples (odd)")
    p.add_argument("--alpha", type=float, default=0.3, help="filter EMA weight")
    p.add_argument("--hampel-k", type=float, default=3.0)
    p.add_argument("--layers", default="2.0,0.5", help="layer depths, far to near, CSV meters")
    p.add_argument("--dwell", type=float, default=0.15, help="switch commit dwell, s")
    p.add_argument("--hysteresis", type=float, default=0.2, help="boundary hysteresis fraction")
    p.add_argument("--calibration", help="calibration file to apply")


def _noise_from(args) -> NoiseModel:
    return NoiseModel(
        angular_sigma=args.noise_sigma,
        outlier_prob=args.outlier_prob,
        outlier_sigma=args.outlier_sigma,
        blink_prob_per_s=args.blink_prob,
        blink_duration=args.blink_duration,
        seed=args.seed,
        vergence_gain=args.vergence_gain,
        vergence_bias=args.vergence_bias,
    )


def _pipeline_from(args) -> PipelineConfig:
    depths = _parse_depths(args.layers)
    ids = ["portal", "detail"] if len(depths) == 2 else None
    config = PipelineConfig(
        geometry=GeometryConfig(ipd=args.ipd),
        filtering=FilterConfig(window=args.window, ema_alpha=args.alpha, hampel_k=args.hampel_k),
        layers=configure_layers(depths, dwell=args.dwell, hysteresis_fraction=args.hysteresis, ids=ids),
    )
    if args.calibration:
        config = config.with_calibration(load_calibration(args.calibration))
    return config


def _parse_depths(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad depths list {text!r}: {exc}") from exc


def _out_base(out: str) -> str:
    return out[:-5] if out.endswith(".json") else out


def build_parser() -> _Parser:
    parser = _Parser(prog="gazedepth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic gaze trace")
    p.add_argument("--scenario", required=True, help="static:<d> | step:<far>,<near>,<period> | sweep:<a>,<b>,<dur>")
    p.add_argument("--duration", type=float, required=True, help="trace length, s")
    p.add_argument("--rate", type=float, default=120.0, help="sample rate, Hz")
    p.add_argument("--ipd", type=float, default=0.063)
    p.add_argument("--out", help="trace JSONL path (default: stdout)")
    _add_noise_flags(p)

    p = sub.add_parser("estimate", help="trace file -> per-sample depth JSONL")
    p.add_argument("trace", help="input trace JSONL")
    p.add_argument("--out", help="output JSONL path (default: stdout)")
    _add_pipeline_flags(p)

    p = sub.add_parser("eval-static", help="depth separability at static targets")
    p.add_argument("--depths", default="0.5,2.0", help="target depths CSV, m")
    p.add_argument("--samples", type=int, default=5000, help="samples per target")
    p.add_argument("--rate", type=float, default=120.0)
    p.add_argument("--out", help="report JSON path; histogram CSV + figure written alongside")
    _add_noise_flags(p)
    _add_pipeline_flags(p)

    p = sub.add_parser("eval-step", help="de-noising and switching on a jumping target")
    p.add_argument("--far", type=float, default=2.0)
    p.add_argument("--near", type=float, default=0.5)
    p.add_argument("--period", type=float, default=2.0)
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--rate", type=float, default=120.0)
    p.add_argument("--out", help="report JSON path; series CSV, events JSONL + figure alongside")
    _add_noise_flags(p)
    _add_pipeline_flags(p)

    p = sub.add_parser("calibrate", help="fit a per-user model on the simulator")
    p.add_argument("--depths", default="0.5,1.0,2.0", help="calibration target depths CSV, m")
    p.add_argument("--dwell-window", type=float, default=1.0, help="settled seconds aggregated per target")
    p.add_argument("--aggregate", choices=("mean", "median"), default="mean")
    p.add_argument("--rate", type=float, default=120.0)
    p.add_argument("--out", help="calibration file path")
    _add_noise_flags(p)
    _add_pipeline_flags(p)

    p = sub.add_parser("serve", help="run the interactive playground session service")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static-dir", help="directory with the built playground UI to serve at /")
    p.add_argument("--rate", type=float, default=120.0)
    _add_noise_flags(p)
    _add_pipeline_flags(p)

    return parser


def _cmd_simulate(args) -> int:
    scenario = Scenario(parse_trajectory(args.scenario), duration=args.duration, sample_rate=args.rate)
    records = generate_trace(scenario, _noise_from(args), ipd=args.ipd, tau=args.tau)
    if args.out:
        write_trace(records, args.out)
    else:
        from .simulator import _record_to_dict

        for rec in records:
            sys.stdout.write(json.dumps(_record_to_dict(rec)) + "\n")
    return 0


def _estimate_row(out) -> dict:
    est, calibrated = out.estimate, out.calibrated

    def clean(x: float) -> Optional[float]:
        return x if math.isfinite(x) else None

    return {
        "t": est.timestamp,
        "validity": est.validity.value,
        "ray_gap": clean(est.ray_gap),
        "raw_depth": clean(est.depth) if est.is_valid else None,
        "raw_vergence": clean(est.vergence) if est.is_valid else None,
        "depth": clean(calibrated.depth),
        "vergence": clean(calibrated.vergence),
        "quality": calibrated.quality.value,
        "rejected": calibrated.rejected,
    }


def _cmd_estimate(args) -> int:
    records = read_trace(args.trace)
    pipeline = GazePipeline(_pipeline_from(args))
    rows = [_estimate_row(pipeline.process(rec.sample)) for rec in records]
    text = "".join(json.dumps(row) + "\n" for row in rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_eval_static(args) -> int:
    depths = _parse_depths(args.depths)
    report = run_static_experiment(
        depths,
        _noise_from(args),
        _pipeline_from(args),
        samples_per_depth=args.samples,
        sample_rate=args.rate,
        tau=args.tau,
    )
    sys.stdout.write(report_text(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_dict(), fh, indent=2)
            fh.write("\n")
        base = _out_base(args.out)
        write_histogram_csv(report, base + "_hist.csv")
        from .figures import render_static_figure

        render_static_figure(report, base + "_hist.png")
    return 0


def _cmd_eval_step(args) -> int:
    report = run_step_experiment(
        args.far,
        args.near,
        args.period,
        noise=_noise_from(args),
        config=_pipeline_from(args),
        duration=args.duration,
        sample_rate=args.rate,
        tau=args.tau,
    )
    sys.stdout.write(report_text(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_dict(), fh, indent=2)
            fh.write("\n")
        base = _out_base(args.out)
        write_series_csv(report.artifacts, base + "_series.csv")
        write_events(report.artifacts.events, base + "_events.jsonl")
        from .figures import render_step_figure

        render_step_figure(report.artifacts, base + "_curve.png")
    return 0


def _cmd_calibrate(args) -> int:
    depths = _parse_depths(args.depths)
    model = calibrate_on_simulator(
        depths,
        _noise_from(args),
        _pipeline_from(args),
        dwell=args.dwell_window,
        sample_rate=args.rate,
        aggregate=args.aggregate,
    )
    sys.stdout.write(
        f"gain={model.gain!r}\nbias={model.bias!r}\nresidual_rms={model.residual_rms!r}\nn_points={model.n_points}\n"
    )
    if args.out:
        save_calibration(model, args.out)
    return 0


def _cmd_serve(args) -> int:
    from .service import serve_session
    from .session import SessionConfig

    config = SessionConfig(
        pipeline=_pipeline_from(args),
        noise=_noise_from(args),
        sample_rate=args.rate,
        tau=args.tau,
    )
    serve_session(args.port, config, host=args.host, static_dir=args.static_dir)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "eval-static": _cmd_eval_static,
    "eval-step": _cmd_eval_step,
    "calibrate": _cmd_calibrate,
    "serve": _cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except TraceParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except (GazeDepthError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
