import json

import pytest

from sgcalc.cli import main


def _write_config(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def _sweep_config(tmp_path, **overrides):
    payload = {
        "command": "sweep",
        "measure": "delta-difference",
        "backend": {"kind": "nilpotent_shift", "n": 64},
        "u_grid": {"kind": "grid-aligned", "count": 31},
    }
    payload.update(overrides)
    return _write_config(tmp_path / "config.json", payload)


class TestConfigErrors:
    def test_unknown_command_exits_2(self, tmp_path):
        cfg = _write_config(tmp_path / "c.json", {"command": "frobnicate"})
        assert main(["run", "--config", cfg, "--output", str(tmp_path / "o")]) == 2

    def test_unknown_measure_exits_2(self, tmp_path):
        cfg = _sweep_config(tmp_path, measure="no-such-measure")
        assert main(["run", "--config", cfg, "--output", str(tmp_path / "o")]) == 2

    def test_decreasing_u_grid_exits_2(self, tmp_path):
        cfg = _sweep_config(tmp_path, u_grid={"values": [0.5, 0.25]})
        assert main(["run", "--config", cfg, "--output", str(tmp_path / "o")]) == 2

    def test_command_config_mismatch_exits_2(self, tmp_path):
        cfg = _sweep_config(tmp_path)
        assert main(["curve", "--config", cfg, "--output", str(tmp_path / "o")]) == 2

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["sweep"]) == 2
        assert main(["run"]) == 2


class TestSweepCommand:
    def test_passing_sweep_writes_artifacts(self, tmp_path):
        cfg = _sweep_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--output", str(out)]) == 0
        csv = (out / "sweep.csv").read_text().splitlines()
        assert csv[0] == "u,norm_F,rho_F,ray_max,margin"
        assert len(csv) == 32
        summary = json.loads((out / "summary.json").read_text())
        assert summary["passed"] is True
        assert summary["min_margin"] > 0
        assert summary["command"] == "sweep"

    def test_negative_tail_margin_still_passes_with_positive_prefix(self, tmp_path):
        # the sweep certifies a positive prefix (eta); a negative margin at
        # large u is the expected behavior, not a failure
        cfg = _sweep_config(tmp_path, u_grid={"values": [0.25, 1.0]})
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--output", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["eta"] == 0.25
        assert summary["min_margin"] < 0

    def test_failing_sweep_exits_1(self, tmp_path):
        # no positive prefix at all: every scale is past the horizon
        cfg = _sweep_config(tmp_path, u_grid={"values": [1.0, 2.0]})
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--output", str(out)]) == 1
        summary = json.loads((out / "summary.json").read_text())
        assert summary["passed"] is False

    def test_check_error_reported_in_summary(self, tmp_path):
        # dirac measure has nonzero mass: the run fails with a recorded error
        cfg = _sweep_config(
            tmp_path, measure={"atoms": [{"t": 1.0, "re": 1.0, "im": 0.0}]}
        )
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--output", str(out)]) == 1
        summary = json.loads((out / "summary.json").read_text())
        assert summary["error"] == "MassNotZeroError"


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        cfg = _write_config(
            tmp_path / "c.json",
            {
                "command": "resolvent-check",
                "backend": {"kind": "nilpotent_shift", "n": 64},
                "seed": 42,
                # identity residual is O(n^-2) on the cell model
                "tolerances": {"resolvent_identity": 1e-2},
            },
        )
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            assert main(["run", "--config", cfg, "--output", str(out)]) == 0
            outs.append(
                sorted((p.name, p.read_bytes()) for p in out.iterdir())
            )
        assert outs[0] == outs[1]


class TestCurveCommand:
    def test_artifacts(self, tmp_path):
        cfg = _write_config(
            tmp_path / "c.json",
            {"command": "curve", "measure": "delta-difference"},
        )
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--output", str(out)]) == 0
        verts = (out / "curve_vertices.csv").read_text().splitlines()
        assert verts[0] == "re,im"
        assert len(verts) > 10
        summary = json.loads((out / "curve.json").read_text())
        assert summary["m"] == 2
        assert summary["delta"] > 0


class TestShippedConfigs:
    @pytest.mark.parametrize(
        "name", ["lemma24", "lemma27", "resolvent_check"]
    )
    def test_config_runs_clean(self, tmp_path, name):
        import pathlib

        cfg_path = pathlib.Path(__file__).resolve().parents[1] / "configs" / f"{name}.json"
        out = tmp_path / name
        assert main(["run", "--config", str(cfg_path), "--output", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary.get("passed", True) is True
