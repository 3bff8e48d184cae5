import json
import shutil
import subprocess
import sys

import pytest

from beamosc.cli import main


def run_cli(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def run_json(capsys, *argv):
    rc, out, err = run_cli(capsys, *argv)
    return rc, json.loads(out), err


class TestAnalyze:
    def test_feasible_design(self, capsys):
        rc, payload, _ = run_json(capsys, "analyze", "--design", "1")
        assert rc == 0
        assert payload["feasible"] is True
        assert payload["derived.f0"] == pytest.approx(75.9e3, rel=2e-3)
        assert payload["derived.startup_margin"] == pytest.approx(90.238, rel=1e-3)

    def test_bias_heavy_design_exits_2(self, capsys):
        rc, payload, _ = run_json(capsys, "analyze", "--design", "2")
        assert rc == 2
        assert payload["feasible"] is False
        assert payload["constraint.bias_ok"] is False

    def test_override_can_break_a_design(self, capsys):
        rc, payload, _ = run_json(
            capsys, "analyze", "--design", "1",
            "--set", "transducer.bias_voltage=12")
        assert rc == 2
        assert payload["constraint.bias_ok"] is False

    def test_output_files(self, capsys, tmp_path):
        out = tmp_path / "run"
        rc, _, _ = run_cli(capsys, "analyze", "--design", "1",
                           "--out", str(out))
        assert rc == 0
        payload = json.loads((out / "analyze.json").read_text())
        assert payload["feasible"] is True
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "analyze"
        assert len(manifest["config_sha256"]) == 64
        assert manifest["config"]["beam"]["q_factor"] == 4000.0

    def test_config_and_design_are_exclusive(self, capsys, tmp_path):
        cfg = tmp_path / "p.json"
        cfg.write_text("{}")
        rc, _, err = run_cli(capsys, "analyze", "--config", str(cfg),
                             "--design", "1")
        assert rc == 1
        assert "not both" in err

    def test_bad_config_is_reported_before_output(self, capsys, tmp_path):
        cfg = tmp_path / "p.json"
        cfg.write_text(json.dumps({"transducer": {"gapp": 1e-6}}))
        out = tmp_path / "results"
        rc, _, err = run_cli(capsys, "analyze", "--config", str(cfg),
                             "--out", str(out))
        assert rc == 1
        assert "transducer.gapp" in err
        assert not out.exists()


class TestTable1:
    def test_all_cells_pass(self, capsys, tmp_path):
        out = tmp_path / "t"
        rc, text, _ = run_cli(capsys, "table1", "--out", str(out))
        assert rc == 0
        assert "all pass" in text
        rows = (out / "table1.csv").read_text().strip().splitlines()
        assert len(rows) == 28  # header + 3 designs x 9 quantities

    def test_wrong_density_fails_comparison(self, capsys):
        rc, text, _ = run_cli(capsys, "table1", "--rho", "5000")
        assert rc == 2
        assert "FAIL" in text

    def test_json_format(self, capsys, tmp_path):
        out = tmp_path / "t"
        rc, _, _ = run_cli(capsys, "table1", "--format", "json",
                           "--out", str(out))
        assert rc == 0
        rows = json.loads((out / "table1.json").read_text())
        assert len(rows) == 27
        assert all(row["passed"] for row in rows)


class TestSimulate:
    def test_seeded_runs_are_byte_identical(self, capsys, tmp_path):
        dirs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc, payload, _ = run_json(
                capsys, "simulate", "--design", "1", "--seed", "7",
                "--set", "sim.duration=1.5e-3", "--out", str(out))
            assert rc == 0
            dirs.append(out)
        first = (dirs[0] / "trace.csv").read_bytes()
        second = (dirs[1] / "trace.csv").read_bytes()
        assert first == second
        assert (dirs[0] / "envelope.csv").exists()
        svg = (dirs[0] / "trace.svg").read_text()
        assert svg.startswith("<svg")
        summary = json.loads((dirs[0] / "summary.json").read_text())
        assert summary["status"] == "growing"

    def test_dead_amplifier_decays(self, capsys):
        rc, payload, _ = run_json(
            capsys, "simulate", "--design", "1",
            "--set", "pierce.gm=0", "--set", "sim.duration=1e-3")
        assert rc == 0
        assert payload["status"] == "decayed"
        assert payload["frequency_hz"] is None

    def test_displacement_guard_flags_pull_in(self, capsys):
        rc, payload, _ = run_json(
            capsys, "simulate", "--design", "1", "--seed", "7",
            "--x-max", "1e-9")
        assert rc == 0
        assert payload["status"] == "pulled_in"
        assert payload["pulled_in"] is True
        assert payload["x_max_m"] == 1e-9

    def test_full_startup_stabilizes(self, capsys):
        # 9.3 ms is about 700 cycles at 75.9 kHz: the loop saturates
        # near 5 ms, so the whole second half sits on the limit level.
        rc, payload, _ = run_json(
            capsys, "simulate", "--design", "1", "--seed", "7",
            "--set", "sim.displacement_guard=false",
            "--set", "sim.duration=9.3e-3")
        assert rc == 0
        assert payload["status"] == "stabilized"
        assert payload["frequency_hz"] == pytest.approx(
            payload["expected_f0_hz"], rel=1e-2)


class TestSweepCommand:
    def write_config(self, tmp_path, **explore):
        raw = {
            "transducer": {"electrode_length": 45e-6},
            "explore": {
                "axes": [
                    {"path": "beam.length", "min": 60e-6, "max": 100e-6,
                     "steps": 2},
                    {"path": "beam.in_plane_width", "min": 1e-6, "max": 2e-6,
                     "steps": 2},
                ],
                **explore,
            },
        }
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(raw))
        return path

    def test_grid_written_with_flags(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path)
        out = tmp_path / "grid"
        rc, payload, _ = run_json(capsys, "sweep", "--config", str(cfg),
                                  "--out", str(out))
        assert rc == 0
        assert payload["points"] == 4
        assert 0 < payload["feasible"] < 4
        rows = json.loads((out / "sweep.json").read_text())
        assert len(rows) == 4
        flags = [row["feasible"] for row in rows]
        assert flags[0] is False and flags[3] is True
        csv_rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(csv_rows) == 5  # header + 4 grid points
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["points"] == 4
        assert manifest["axes"][0]["path"] == "beam.length"

    def test_grid_cap_is_an_error(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, grid_cap=3)
        rc, _, err = run_cli(capsys, "sweep", "--config", str(cfg))
        assert rc == 1
        assert "grid of 4 points" in err

    def test_sweep_without_axes(self, capsys):
        rc, _, err = run_cli(capsys, "sweep")
        assert rc == 1
        assert "explore.axes" in err


class TestOptimizeCommand:
    def test_feasible_objective(self, capsys, tmp_path):
        raw = {"explore": {
            "objective": "min_Rx",
            "axes": [{"path": "transducer.bias_voltage",
                      "min": 2.0, "max": 9.5, "steps": 3}],
        }}
        cfg = tmp_path / "opt.json"
        cfg.write_text(json.dumps(raw))
        out = tmp_path / "opt"
        rc, payload, _ = run_json(capsys, "optimize", "--config", str(cfg),
                                  "--out", str(out))
        assert rc == 0
        assert payload["feasible"] is True
        assert payload["best_params"]["transducer.bias_voltage"] == 9.5
        report = json.loads((out / "optimize.json").read_text())
        assert report["best_point"]["feasible"] is True
        assert len(report["log"]) == payload["evaluations"]

    def test_infeasible_exits_2(self, capsys, tmp_path):
        raw = {"explore": {
            "objective": "min_Rx",
            "axes": [{"path": "transducer.bias_voltage",
                      "min": 15.0, "max": 20.0, "steps": 2}],
        }}
        cfg = tmp_path / "opt.json"
        cfg.write_text(json.dumps(raw))
        rc, payload, _ = run_json(capsys, "optimize", "--config", str(cfg))
        assert rc == 2
        assert payload["feasible"] is False
        assert payload["most_violated"] == "bias"


class TestCheckRules:
    def test_clean_design(self, capsys):
        rc, out, _ = run_cli(capsys, "check-rules", "--design", "1")
        assert rc == 0
        assert "pass" in out

    def test_violating_gap(self, capsys):
        rc, out, _ = run_cli(capsys, "check-rules", "--design", "1",
                             "--set", "transducer.gap=1.0e-6")
        assert rc == 2
        assert "lateral_gap" in out


class TestEntryPoint:
    def test_installed_script_reports_version(self):
        exe = shutil.which("beamosc")
        if exe is None:
            argv = [sys.executable, "-m", "beamosc.cli", "--version"]
        else:
            argv = [exe, "--version"]
        proc = subprocess.run(argv, capture_output=True, text=True)
        assert proc.returncode == 0
        assert "beamosc" in proc.stdout
