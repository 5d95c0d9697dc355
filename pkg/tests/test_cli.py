import json
import os

import pytest

from gazedepth.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_deterministic_output_files(self, tmp_path, capsys):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        args = ["simulate", "--scenario", "static:0.5", "--duration", "5", "--seed", "7"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_text().splitlines()) == 600

    def test_stdout_when_no_out(self, capsys):
        code, out, _ = run(capsys, "simulate", "--scenario", "static:1.0", "--duration", "0.1")
        assert code == 0
        first = json.loads(out.splitlines()[0])
        assert set(first) >= {"t", "ldx", "rdx", "true_depth", "blink"}

    def test_bad_scenario_is_usage_error(self, capsys):
        code, _, err = run(capsys, "simulate", "--scenario", "orbit:1.0", "--duration", "1")
        assert code == 1
        assert "error" in err

    def test_missing_flag_is_usage_error(self, capsys):
        code, _, err = run(capsys, "simulate", "--scenario", "static:1.0")
        assert code == 1
        assert "usage" in err


class TestEstimate:
    def test_trace_to_depth_jsonl(self, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        out = tmp_path / "d.jsonl"
        main(["simulate", "--scenario", "static:0.5", "--duration", "1", "--seed", "3", "--out", str(trace)])
        code, _, _ = run(capsys, "estimate", str(trace), "--out", str(out))
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 120
        assert rows[-1]["quality"] == "Settled"
        assert rows[-1]["depth"] == pytest.approx(0.5, abs=0.05)

    def test_malformed_line_exits_2_with_line_number(self, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        main(["simulate", "--scenario", "static:0.5", "--duration", "0.2", "--out", str(trace)])
        lines = trace.read_text().splitlines()
        lines[6] = "{broken"
        trace.write_text("\n".join(lines) + "\n")
        code, _, err = run(capsys, "estimate", str(trace))
        assert code == 2
        assert ":7:" in err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        code, _, err = run(capsys, "estimate", str(tmp_path / "nope.jsonl"))
        assert code == 2

    def test_calibration_flag_applies(self, tmp_path, capsys):
        cal = tmp_path / "cal.txt"
        cal.write_text("gain=1.0\nbias=0.5\nresidual_rms=0.0\nn_points=2\ncreated_at=x\n")
        trace = tmp_path / "t.jsonl"
        main(["simulate", "--scenario", "static:0.5", "--duration", "1", "--out", str(trace)])
        code, out, _ = run(capsys, "estimate", str(trace), "--calibration", str(cal))
        rows = [json.loads(line) for line in out.splitlines()]
        assert rows[-1]["vergence"] == pytest.approx(2.5, abs=0.1)


class TestEvalStatic:
    def test_zero_noise_separability_one(self, tmp_path, capsys):
        code, out, _ = run(
            capsys,
            "eval-static", "--depths", "0.5,2.0", "--noise-sigma", "0",
            "--outlier-prob", "0", "--blink-prob", "0", "--samples", "400",
        )
        assert code == 0
        assert "separability 1" in out

    def test_report_artifacts_written(self, tmp_path, capsys):
        out_file = tmp_path / "report.json"
        code, _, _ = run(
            capsys,
            "eval-static", "--samples", "300", "--seed", "5", "--out", str(out_file),
        )
        assert code == 0
        report = json.loads(out_file.read_text())
        assert report["kind"] == "static"
        assert (tmp_path / "report_hist.csv").exists()
        assert (tmp_path / "report_hist.png").exists()


class TestEvalStep:
    def test_report_and_artifacts(self, tmp_path, capsys):
        out_file = tmp_path / "step.json"
        code, out, _ = run(
            capsys,
            "eval-step", "--duration", "8", "--seed", "11", "--out", str(out_file),
        )
        assert code == 0
        assert "kind step" in out
        report = json.loads(out_file.read_text())
        assert report["false_switch_count"] == 0
        assert (tmp_path / "step_series.csv").exists()
        assert (tmp_path / "step_events.jsonl").exists()
        assert (tmp_path / "step_curve.png").exists()


class TestCalibrate:
    def test_writes_model_file(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        out_file = tmp_path / "cal.txt"
        code, out, _ = run(
            capsys,
            "calibrate", "--vergence-bias", "0.3", "--seed", "21",
            "--dwell-window", "0.5", "--out", str(out_file),
        )
        assert code == 0
        assert "gain=" in out
        text = out_file.read_text()
        assert "created_at=2023-11-14T22:13:20Z" in text
        from gazedepth.calibration import load_calibration

        model = load_calibration(str(out_file))
        assert model.bias == pytest.approx(-0.3, abs=0.05)

    def test_single_depth_usage_error(self, tmp_path, capsys):
        code, _, err = run(capsys, "calibrate", "--depths", "0.5")
        assert code == 1


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv,outputs",
        [
            (
                ["simulate", "--scenario", "step:2.0,0.5,1.0", "--duration", "2", "--seed", "9", "--out", "t.jsonl"],
                ["t.jsonl"],
            ),
            (
                ["eval-static", "--samples", "200", "--seed", "9", "--out", "r.json"],
                ["r.json", "r_hist.csv", "r_hist.png"],
            ),
            (
                ["eval-step", "--duration", "4", "--seed", "9", "--out", "s.json"],
                ["s.json", "s_series.csv", "s_events.jsonl", "s_curve.png"],
            ),
            (
                ["calibrate", "--seed", "9", "--dwell-window", "0.3", "--out", "c.txt"],
                ["c.txt"],
            ),
        ],
        ids=["simulate", "eval-static", "eval-step", "calibrate"],
    )
    def test_byte_identical_across_runs(self, tmp_path, monkeypatch, capsys, argv, outputs):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        monkeypatch.chdir(tmp_path)
        os.mkdir("run1")
        os.mkdir("run2")

        def run_in(d):
            adjusted = [a if not any(a == o for o in outputs) else os.path.join(d, a) for a in argv]
            assert main(adjusted) == 0
            capsys.readouterr()

        run_in("run1")
        run_in("run2")
        for name in outputs:
            b1 = open(os.path.join("run1", name), "rb").read()
            b2 = open(os.path.join("run2", name), "rb").read()
            assert b1 == b2, f"{name} differs between runs"

    def test_estimate_deterministic(self, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        main(["simulate", "--scenario", "static:0.5", "--duration", "1", "--seed", "2", "--out", str(trace)])
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["estimate", str(trace), "--out", str(a)])
        main(["estimate", str(trace), "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestUsage:
    def test_no_command_is_usage_error(self, capsys):
        code, _, err = run(capsys)
        assert code == 1

    def test_unknown_command_is_usage_error(self, capsys):
        code, _, _ = run(capsys, "transmogrify")
        assert code == 1

    def test_bad_layer_depths_rejected(self, capsys):
        code, _, err = run(
            capsys, "eval-static", "--layers", "0.5,2.0", "--samples", "100"
        )
        assert code == 1
