import json
import subprocess
import sys

import pytest

from epitrace.cli import main


def run_cli(args):
    return main(args)


class TestSimulateCommand:
    def test_writes_csv_and_log(self, tmp_path):
        config = {"population": 120, "days": 6, "initial_symptomatic": 2, "tests_per_day": 5}
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config))
        code = run_cli([
            "simulate", "--config", str(cfg_path), "--seed", "7", "--policy", "ts",
            "--days", "5", "--out", str(tmp_path / "out"),
        ])
        assert code == 0
        csv_path = tmp_path / "out" / "ts-seed007.csv"
        assert csv_path.exists()
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "day,S,A,P,Y,R,isolated,new_infections,cum_infections,tests_used"
        assert len(lines) == 6  # header + 5 days

    def test_same_seed_same_bytes(self, tmp_path):
        args = ["simulate", "--seed", "3", "--policy", "none", "--days", "4", "--out"]
        base = {"population": 150, "initial_symptomatic": 2}
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(base))
        run_cli(args[:1] + ["--config", str(cfg)] + args[1:] + [str(tmp_path / "a")])
        run_cli(args[:1] + ["--config", str(cfg)] + args[1:] + [str(tmp_path / "b")])
        a = (tmp_path / "a" / "none-seed003.csv").read_bytes()
        b = (tmp_path / "b" / "none-seed003.csv").read_bytes()
        assert a == b

    def test_invalid_config_is_a_clean_error(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"population": 100, "bogus_knob": 1}))
        code = run_cli(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 2


class TestSuiteCommand:
    def test_uncontrolled_layout(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"population": 120, "days": 4, "initial_symptomatic": 2}))
        code = run_cli([
            "suite", "--name", "uncontrolled", "--config", str(cfg),
            "--seeds", "2", "--out", str(tmp_path / "suite"),
        ])
        assert code == 0
        files = sorted(p.name for p in (tmp_path / "suite" / "uncontrolled").glob("*.csv"))
        assert files == ["seed000.csv", "seed001.csv"]
        summary = (tmp_path / "suite" / "summary.csv").read_text().splitlines()
        assert summary[0] == "group,seeds,mean_cum_infections,std_cum_infections"
        assert len(summary) == 2

    def test_unknown_suite_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            run_cli(["suite", "--name", "nonsense", "--out", str(tmp_path)])


def test_module_entrypoint_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "epitrace.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "simulate" in proc.stdout and "suite" in proc.stdout
