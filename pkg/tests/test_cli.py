"""CLI behavior: outputs, exit codes, reproducibility."""

import json
import math
import os
import subprocess
import sys

import pytest

SRC = os.path.join(os.path.dirname(__file__), "..", "src")


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    env["PYTHONPATH"] = SRC + os.pathsep + env.get("PYTHONPATH", "")
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "wclt.cli", *args],
        capture_output=True, text=True, env=env,
    )


class TestBoundCommand:
    def test_json_report(self):
        res = run_cli("bound", "--pattern", "triangle", "--n", "10", "--p", "0.1",
                      "--weights", "unif:1")
        assert res.returncode == 0
        payload = json.loads(res.stdout)
        assert payload["format_version"] == 1
        assert payload["config"]["pattern"] == "triangle"
        assert payload["report"]["rate_term"] == pytest.approx(0.9**-0.5, rel=1e-9)

    def test_unknown_pattern_usage_error(self):
        res = run_cli("bound", "--pattern", "nonagon", "--n", "10", "--p", "0.1",
                      "--weights", "unif:1")
        assert res.returncode == 2

    def test_p_one_degenerate(self):
        res = run_cli("bound", "--pattern", "triangle", "--n", "10", "--p", "1.0",
                      "--weights", "unif:1")
        assert res.returncode == 3

    def test_regime_flag(self):
        res = run_cli("bound", "--pattern", "triangle", "--n", "100", "--p", "0.9",
                      "--weights", "unif:1", "--regime", "--cutoff-c", "0.5")
        payload = json.loads(res.stdout)
        assert payload["report"]["regime"] == "dense"

    def test_grid_sweep_csv(self, tmp_path):
        out = tmp_path / "grid.csv"
        res = run_cli("bound", "--pattern", "triangle", "--weights", "unif:1",
                      "--sweep-n", "10,20", "--sweep-p", "0.2,0.5", "--out", str(out))
        assert res.returncode == 0
        lines = out.read_text().splitlines()
        data = [ln for ln in lines if not ln.startswith("#")]
        assert data[0] == "n,p,rate_term,moment_ratio,bound_value,regime,family"
        assert len(data) == 5
        n, p, rate, ratio, value, regime, family = data[1].split(",")
        assert float(value) == pytest.approx(float(rate) * float(ratio), rel=1e-12)


class TestSimulateCommand:
    def test_deterministic_bytes(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            res = run_cli("simulate", "--pattern", "triangle", "--n", "6", "--p", "0.5",
                          "--weights", "unif:1", "--reps", "200", "--seed", "9",
                          "--out", str(out))
            assert res.returncode == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_thread_count_invariance(self, tmp_path):
        outputs = []
        for threads in ("1", "8"):
            out = tmp_path / f"t{threads}.csv"
            res = run_cli("simulate", "--pattern", "triangle", "--n", "6", "--p", "0.5",
                          "--weights", "exp:1", "--reps", "500", "--seed", "4",
                          "--out", str(out), env_extra={"WCLT_THREADS": threads})
            assert res.returncode == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_zero_reps_header_only(self, tmp_path):
        out = tmp_path / "empty.csv"
        res = run_cli("simulate", "--pattern", "triangle", "--n", "6", "--p", "0.5",
                      "--weights", "unif:1", "--reps", "0", "--seed", "1", "--out", str(out))
        assert res.returncode == 0
        lines = out.read_text().splitlines()
        assert lines[-1] == "replicate,raw_w,normalized"
        assert all(ln.startswith("#") for ln in lines[:-1])

    def test_row_count_and_meta(self, tmp_path):
        out, meta = tmp_path / "s.csv", tmp_path / "m.json"
        res = run_cli("simulate", "--pattern", "triangle", "--n", "8", "--p", "0.5",
                      "--weights", "unif:1", "--reps", "1000", "--seed", "2",
                      "--out", str(out), "--meta", str(meta))
        assert res.returncode == 0
        lines = out.read_text().splitlines()
        data = [ln for ln in lines if not ln.startswith("#")]
        assert len(data) == 1001
        assert any(ln.startswith("# config:") for ln in lines)
        assert any(ln.startswith("# format_version:") for ln in lines)
        payload = json.loads(meta.read_text())
        assert payload["exact_mean"] == pytest.approx(10.5)
        assert payload["census"]["3"] == 56
        assert payload["config"]["seed"] == 2

    def test_degenerate_configuration(self):
        res = run_cli("simulate", "--pattern", "triangle", "--n", "6",
                      "--p", "0.9999999999999999", "--weights", "const:1",
                      "--reps", "10", "--seed", "0")
        assert res.returncode == 3


class TestDistanceCommand:
    def test_single_row(self, tmp_path):
        f = tmp_path / "one.csv"
        f.write_text("replicate,raw_w,normalized\n0,1.0,0.0\n")
        res = run_cli("distance", "--samples", str(f))
        assert res.returncode == 0
        payload = json.loads(res.stdout)
        assert payload["result"]["w1"] == pytest.approx(2 / math.sqrt(2 * math.pi), rel=1e-9)

    def test_missing_column_schema_error(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("replicate,raw\n0,1.0\n")
        res = run_cli("distance", "--samples", str(f))
        assert res.returncode == 2

    def test_empty_file_domain_error(self, tmp_path):
        f = tmp_path / "empty.csv"
        f.write_text("replicate,raw_w,normalized\n")
        res = run_cli("distance", "--samples", str(f))
        assert res.returncode == 2


class TestChaosVerifyCommand:
    def test_default_suite_passes(self):
        res = run_cli("chaos-verify", "--seed", "11", "--paths", "600")
        assert res.returncode == 0
        payload = json.loads(res.stdout)
        assert payload["passed"] is True
        assert payload["config"]["seed"] == 11
        assert all(c["passed"] for c in payload["checks"])

    def test_corrupt_negative_control(self):
        res = run_cli("chaos-verify", "--seed", "11", "--paths", "400", "--corrupt")
        assert res.returncode == 1
        payload = json.loads(res.stdout)
        assert payload["passed"] is False
        failed = [c for c in payload["checks"] if not c["passed"]]
        assert failed and failed[0]["max_deviation"] > failed[0]["tolerance"]

    def test_reproducible(self):
        a = run_cli("chaos-verify", "--seed", "3", "--paths", "300").stdout
        b = run_cli("chaos-verify", "--seed", "3", "--paths", "300").stdout
        assert a == b


class TestRateSweepCommand:
    def test_rows_and_ratio(self, tmp_path):
        out = tmp_path / "sweep.csv"
        res = run_cli("rate-sweep", "--pattern", "triangle", "--weights", "unif:1",
                      "--sweep-n", "6,8", "--p", "0.5", "--reps", "300", "--seed", "5",
                      "--out", str(out))
        assert res.returncode == 0
        lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert lines[0] == "n,p,d_w,rate_term,ratio"
        assert len(lines) == 3
        for line in lines[1:]:
            n, p, d_w, rate, ratio = line.split(",")
            assert float(d_w) > 0 and float(rate) > 0
            assert float(ratio) == pytest.approx(float(d_w) / float(rate), rel=1e-12)

    def test_empty_n_list_usage_error(self):
        res = run_cli("rate-sweep", "--pattern", "triangle", "--weights", "unif:1",
                      "--sweep-n", "", "--p", "0.5", "--reps", "10")
        assert res.returncode == 2

    def test_p_rule(self, tmp_path):
        out = tmp_path / "sweep.csv"
        res = run_cli("rate-sweep", "--pattern", "triangle", "--weights", "unif:1",
                      "--sweep-n", "8,12", "--p-rule", "pow:1.0,0.5", "--reps", "200",
                      "--seed", "5", "--out", str(out))
        assert res.returncode == 0
        rows = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")][1:]
        p_values = [float(r.split(",")[1]) for r in rows]
        assert p_values[0] == pytest.approx(8**-0.5)
        assert p_values[1] == pytest.approx(12**-0.5)
