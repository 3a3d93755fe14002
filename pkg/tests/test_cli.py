"""Command-line interface, exercised in-process through cli.main."""

from __future__ import annotations

import json

import pytest

from sirmap.cli import main

TONGUE_ARGS = ["--N", "10", "--beta", "0.9", "--r", "0.4246", "--alpha", "5.419"]


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestClassify:
    def test_below_crossing(self, capsys):
        code, out, _ = run_cli(
            capsys, ["classify", "--N", "1", "--beta", "0.5", "--r", "0.3", "--alpha", "0.6"]
        )
        assert code == 0
        assert json.loads(out) == {"E1": "D1_stable_node", "E2": "nonexistent"}

    def test_endemic_regime(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["classify", "--N", "3.72", "--beta", "0.52", "--r", "0.81", "--alpha", "5.36"],
        )
        assert code == 0
        assert json.loads(out) == {
            "E1": "D2_saddle_point",
            "E2": "D23_stable_focus_node",
        }


class TestFixedPoints:
    def test_coincident_at_crossing(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["fixed-points", "--N", "0.51", "--beta", "0.31", "--r", "0.27", "--alpha", "0.58"],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["E1"]["coincident"] is True
        assert doc["E1"]["label"] == "L1_non_hyperbolic"
        assert doc["E1"]["multipliers"]["decoupled"] == pytest.approx(0.69)

    def test_both_points_above_crossing(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["fixed-points", "--N", "3.72", "--beta", "0.52", "--r", "0.81", "--alpha", "5.36"],
        )
        doc = json.loads(out)
        assert code == 0
        assert set(doc) == {"E1", "E2"}
        assert doc["E2"]["state"][0] == pytest.approx(3.72 * 1.33 / 5.36)


class TestSimulate:
    def test_locked_orbit_json(self, capsys):
        code, out, _ = run_cli(capsys, ["simulate", *TONGUE_ARGS, "--transient", "20000"])
        assert code == 0
        doc = json.loads(out)
        assert doc["period"] == 5
        assert doc["locked"] == "2/5"
        assert doc["rotation_number"] == pytest.approx(0.4, abs=1e-6)
        assert doc["diverged_at"] is None

    def test_divergence_is_data_not_error(self, capsys):
        code, out, _ = run_cli(
            capsys,
            [
                "simulate", "--N", "3.72", "--beta", "0.52", "--r", "0.81",
                "--alpha", "5.0", "--x0", "1.8", "--y0", "2.0", "--z0", "3.0",
                "--transient", "1000", "--keep", "32",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["period"] == "diverged"
        assert doc["diverged_at"] is not None

    def test_csv_is_byte_deterministic(self, capsys, tmp_path):
        argv = ["simulate", *TONGUE_ARGS, "--transient", "2000", "--keep", "16"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main([*argv, "--out", str(a)]) == 0
        assert main([*argv, "--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[0] == "step,x,y,z"
        assert len(lines) == 17
        # full float precision survives the round trip
        x = float(lines[1].split(",")[1])
        assert lines[1].split(",")[1] == format(x, ".17g")

    def test_partial_seed_rejected(self, capsys):
        code, _, err = run_cli(capsys, ["simulate", *TONGUE_ARGS, "--x0", "1.0"])
        assert code == 1
        assert "x0" in err or "seed" in err or "all of" in err

    def test_non_finite_seed_rejected(self, capsys):
        code, _, err = run_cli(
            capsys,
            ["simulate", *TONGUE_ARGS, "--x0", "nan", "--y0", "1.0", "--z0", "1.0"],
        )
        assert code == 1


class TestSweep:
    def test_swept_param_needs_no_explicit_value(self, capsys, tmp_path):
        # sweeping alpha must not demand --alpha; the range start seeds it
        table = tmp_path / "sweep.csv"
        code, out, _ = run_cli(
            capsys,
            [
                "sweep", "--N", "0.72", "--beta", "0.52", "--r", "0.21",
                "--param", "alpha", "--from", "3.5", "--to", "3.7",
                "--steps", "3", "--transient", "2000", "--keep", "32",
                "--out", str(table),
            ],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["param"] == "alpha"
        assert doc["points"] == 3
        assert doc["transitions"] == []
        lines = table.read_text().splitlines()
        assert lines[0] == "alpha,period,max_norm,error"
        assert [ln.split(",")[1] for ln in lines[1:]] == ["1", "1", "1"]

    def test_transitions_reported(self, capsys):
        code, out, _ = run_cli(
            capsys,
            [
                "sweep", "--N", "0.72", "--beta", "0.52", "--r", "0.21",
                "--param", "alpha", "--from", "3.9", "--to", "4.2",
                "--steps", "7", "--transient", "30000", "--keep", "64",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        kinds = [(t["from"], t["to"]) for t in doc["transitions"]]
        assert (1, 2) in kinds

    def test_missing_range_is_validation_error(self, capsys):
        code, _, err = run_cli(
            capsys,
            ["sweep", "--N", "0.72", "--beta", "0.52", "--r", "0.21", "--param", "alpha"],
        )
        assert code == 1
        assert "error" in err


class TestContinue:
    def test_flip_event_on_endemic_branch(self, capsys):
        code, out, _ = run_cli(
            capsys,
            [
                "continue", "--N", "0.72", "--beta", "0.52", "--r", "0.21",
                "--alpha", "3.0", "--param", "alpha", "--from", "3.0", "--to", "4.5",
                "--branch", "endemic",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        pd = [e for e in doc["events"] if e["kind"] == "PD"]
        assert len(pd) == 1
        assert pd[0]["alpha"] == pytest.approx(4.0019563901, abs=1e-6)


class TestNSCurve:
    def test_all_four_events(self, capsys):
        code, out, _ = run_cli(
            capsys,
            [
                "ns-curve", "--N", "1.25", "--beta", "0.32",
                "--from", "0.7", "--to", "3.0", "--points", "400",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        got = {e["kind"]: e["r"] for e in doc["events"]}
        assert got["R2"] == pytest.approx(0.766957, abs=1e-4)
        assert got["R3"] == pytest.approx(0.799403, abs=1e-4)
        assert got["R4"] == pytest.approx(0.870476, abs=1e-4)
        assert got["CH"] == pytest.approx(2.805, abs=1e-4)
        assert doc["max_implicit_gap"] < 1e-8


class TestTongue:
    def test_membership_query(self, capsys):
        code, out, _ = run_cli(
            capsys,
            [
                "tongue", "--N", "10", "--beta", "0.9", "--n", "2", "--m", "5",
                "--sigma-abs", "0.01020466542", "--at-r", "0.4246", "--at-alpha", "5.419",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["query"]["member"] is True
        assert doc["r_star"] == pytest.approx(0.4311216871, abs=1e-9)
        assert doc["query"]["T_minus"] < doc["query"]["omega2"] < doc["query"]["T_plus"]


class TestScenarios:
    def test_run_scenario_file(self, capsys, tmp_path):
        doc = {
            "schema_version": 1,
            "command": "classify",
            "args": {"N": 1.0, "beta": 0.5, "r": 0.3, "alpha": 0.6},
        }
        path = tmp_path / "scen.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run_cli(capsys, ["run", str(path)])
        assert code == 0
        assert json.loads(out)["E1"] == "D1_stable_node"

    def test_scenario_flags_override_nothing_but_fill_gaps(self, capsys, tmp_path):
        doc = {
            "schema_version": 1,
            "command": "classify",
            "args": {"N": 1.0, "beta": 0.5, "r": 0.3},
        }
        path = tmp_path / "scen.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run_cli(
            capsys, ["classify", "--scenario", str(path), "--alpha", "0.6"]
        )
        assert code == 0
        assert json.loads(out)["E2"] == "nonexistent"

    def test_unknown_schema_version_rejected(self, capsys, tmp_path):
        doc = {"schema_version": 2, "command": "classify", "args": {}}
        path = tmp_path / "scen.json"
        path.write_text(json.dumps(doc))
        code, _, err = run_cli(capsys, ["run", str(path)])
        assert code == 1
        assert "schema" in err


class TestVerify:
    def test_default_run_reports_the_known_red_check(self, capsys):
        code, out, _ = run_cli(capsys, ["verify"])
        assert code == 3
        lines = [ln for ln in out.splitlines() if ln.startswith(("PASS", "FAIL"))]
        assert len(lines) == 9
        failing = [ln for ln in lines if ln.startswith("FAIL")]
        assert len(failing) == 1
        assert "tongue_sigma_abs" in failing[0]

    def test_tolerance_override_turns_it_green(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["verify", "--tolerance-overrides", '{"tongue_sigma_abs_rel": 0.06}'],
        )
        assert code == 0
        assert "9/9 checks passed" in out
