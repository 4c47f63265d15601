import json
import os
import subprocess

import pytest

BIN = os.environ.get("ERWLAB_BIN")

pytestmark = pytest.mark.skipif(not BIN, reason="ERWLAB_BIN not set")


def run(*args, expect=0):
    proc = subprocess.run([BIN, *args], capture_output=True, text=True)
    assert proc.returncode == expect, proc.stderr
    return proc


def test_simulate_row_count(tmp_path):
    out = tmp_path / "t.csv"
    run("simulate", "--d", "2", "--m", "1", "--beta", "0.5", "--steps", "1000",
        "--seed", "7", "--out", str(out))
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "step,x,z1,eps,novel,excited"
    assert len(lines) == 1002  # header + 1001 rows
    assert lines[-1].endswith(",,,")


def test_oracle_girsanov():
    proc = run("oracle", "girsanov", "--d", "2", "--m", "1", "--beta0", "0",
               "--beta", "0.5", "--n", "4")
    doc = json.loads(proc.stdout)
    assert doc["max_discrepancy"] <= 1e-12


def test_oracle_girsanov_rational():
    proc = run("oracle", "girsanov", "--d", "2", "--m", "2",
               "--rational-beta", "1/2", "--rational-beta0", "1/6", "--n", "4")
    doc = json.loads(proc.stdout)
    assert doc["exact"] is True
    assert doc["max_discrepancy"] == 0.0


def test_estimate_json_schema():
    proc = run("estimate", "derivative", "--d", "2", "--beta", "0.5", "--n", "2000",
               "--replicates", "100", "--seed", "1")
    doc = json.loads(proc.stdout)
    assert doc["schema_version"] == 1
    for r in doc["results"]:
        assert r["observable"] == "speed_derivative"
        assert r["stderr"] == r["stderr"]  # finite, not NaN
        assert r["params"]["beta"] == 0.5


def test_estimate_deterministic():
    args = ("estimate", "speed", "--d", "2", "--beta", "0.4", "--n", "500",
            "--replicates", "64", "--seed", "3")
    a = run(*args).stdout
    b = run(*args, "--threads", "2").stdout
    assert a == b


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({
        "d": 2, "m": 1, "beta": 0.3, "n": 400, "replicates": 32, "seed": 5,
    }))
    proc = run("estimate", "speed", "--config", str(cfg), "--beta", "0.6")
    doc = json.loads(proc.stdout)
    assert doc["config"]["beta_grid"] == [0.6]
    assert doc["config"]["n"] == 400


def test_range_scan_csv():
    proc = run("range-scan", "--d", "3", "--beta-grid", "0", "1", "--n", "2000",
               "--replicates", "50", "--seed", "2", "--format", "csv")
    lines = proc.stdout.strip().splitlines()
    assert lines[0] == "observable,beta,n,count,mean,stderr,method"
    assert len(lines) == 3
    lo = float(lines[1].split(",")[4])
    hi = float(lines[2].split(",")[4])
    assert lo < hi


def test_renewal_stats(tmp_path):
    out = tmp_path / "cycles.csv"
    proc = run("renewal-stats", "--d", "2", "--m", "1", "--beta", "0.5",
               "--horizon", "2000", "--replicates", "10", "--seed", "4",
               "--out", str(out))
    doc = json.loads(proc.stdout)
    assert doc["cycles"] > 100
    header = out.read_text().splitlines()[0]
    assert header == "k,dt,dx,dn,dv"


def test_coupling_check_passes():
    proc = run("coupling-check", "--d", "4", "--beta0", "0.3", "--beta", "0.5",
               "--m", "1", "--horizon", "1000", "--replicates", "10", "--seed", "6")
    doc = json.loads(proc.stdout)
    assert doc["pass"] is True


def test_usage_error_names_flag():
    proc = subprocess.run([BIN, "estimate", "speed", "--bogus"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "--bogus" in proc.stdout + proc.stderr


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{broken")
    proc = subprocess.run([BIN, "estimate", "speed", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 2
