"""The experiment driver: config parsing, reports, determinism, exit codes."""

import json
import os

import pytest

from extclust.cli import ExperimentConfig, demo_remark, load_config, main, run
from extclust.errors import ParameterError
from extclust.models import ModelSpec


def write_config(path, body):
    with open(path, "w") as fh:
        fh.write(body)
    return str(path)


IID_BODY = """
[model]
kind = iid-pareto
alpha = 1.0
seed = 2024

[experiment]
n_grid = 5000
replications = 300
checks = theta
out = {out}
"""


def test_run_theta_iid(tmp_path):
    cfg_path = write_config(tmp_path / "c.ini", IID_BODY.format(out=tmp_path / "rep"))
    code = main(["run", cfg_path])
    assert code == 0
    rows = [json.loads(line) for line in open(tmp_path / "rep" / "report.jsonl")]
    theta_rows = [r for r in rows if r["check"] == "theta"]
    assert len(theta_rows) == 1
    assert theta_rows[0]["reference"] == 1.0
    assert theta_rows[0]["verdict"] == "pass"
    assert abs(theta_rows[0]["value"] - 1.0) < 3 * theta_rows[0]["stderr"]
    assert os.path.exists(tmp_path / "rep" / "theta.tsv")
    schema = {"check", "n", "value", "stderr", "reference", "provenance", "verdict"}
    assert all(set(r) == schema for r in rows)


def test_empty_checks_is_config_error(tmp_path):
    body = IID_BODY.format(out=tmp_path / "rep").replace("checks = theta", "checks =")
    cfg_path = write_config(tmp_path / "c.ini", body)
    assert main(["run", cfg_path]) == 2


def test_unknown_check_is_config_error(tmp_path):
    body = IID_BODY.format(out=tmp_path / "rep").replace("checks = theta", "checks = nope")
    cfg_path = write_config(tmp_path / "c.ini", body)
    assert main(["run", cfg_path]) == 2


def test_missing_config_is_usage_error(tmp_path):
    assert main(["run", str(tmp_path / "missing.ini")]) == 2


def test_same_seed_reports_byte_identical(tmp_path):
    body = """
[model]
kind = moving-maximum
alpha = 1.0
c = 1.0, 1.0
seed = 77

[experiment]
n_grid = 2000, 5000
replications = 150
checks = theta, clusters, m1demo
out = {out}
"""
    cfg1 = write_config(tmp_path / "a.ini", body.format(out=tmp_path / "r1"))
    cfg2 = write_config(tmp_path / "b.ini", body.format(out=tmp_path / "r2"))
    assert main(["run", cfg1]) == 0
    assert main(["run", cfg2]) == 0
    b1 = open(tmp_path / "r1" / "report.jsonl", "rb").read()
    b2 = open(tmp_path / "r2" / "report.jsonl", "rb").read()
    assert b1 == b2
    for name in ("theta.tsv", "clusters.tsv", "m1demo.tsv"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_jobs_parallel_identical_report(tmp_path):
    body = IID_BODY.format(out=tmp_path / "seq")
    cfg = write_config(tmp_path / "c.ini", body)
    assert main(["run", cfg]) == 0
    cfg2 = write_config(tmp_path / "c2.ini", IID_BODY.format(out=tmp_path / "par"))
    assert main(["run", cfg2, "--jobs", "2"]) == 0
    assert (tmp_path / "seq" / "report.jsonl").read_bytes() == (tmp_path / "par" / "report.jsonl").read_bytes()


def test_seed_override_changes_report(tmp_path):
    cfg = write_config(tmp_path / "c.ini", IID_BODY.format(out=tmp_path / "r1"))
    assert main(["run", cfg]) == 0
    cfg2 = write_config(tmp_path / "c2.ini", IID_BODY.format(out=tmp_path / "r2"))
    assert main(["run", cfg2, "--seed", "999"]) == 0
    assert (tmp_path / "r1" / "report.jsonl").read_bytes() != (tmp_path / "r2" / "report.jsonl").read_bytes()


def test_demo_remark_rows():
    rows = demo_remark()
    j1_rows = [r for r in rows if r["check"] == "m1demo:j1"]
    assert len(j1_rows) == 9  # n = 4, 8, ..., 1024
    assert all(r["verdict"] == "pass" for r in j1_rows)
    final = [r for r in rows if r["check"] == "m1demo:m1-final"][0]
    assert final["value"] < 0.01 and final["verdict"] == "pass"
    trend = [r for r in rows if r["check"] == "m1demo:m1-trend"][0]
    assert trend["verdict"] == "pass"


def test_demo_remark_verb(tmp_path, capsys):
    code = main(["demo-remark", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "remark.tsv").exists()


def test_version_verb(capsys):
    assert main(["version"]) == 0
    out = capsys.readouterr().out
    assert "extclust" in out and "kernels" in out


def test_config_validation_direct():
    spec = ModelSpec(kind="iid-pareto", alpha=1.0, seed=1)
    with pytest.raises(ParameterError):
        ExperimentConfig(model=spec, n_grid=(), checks=("theta",))
    with pytest.raises(ParameterError):
        ExperimentConfig(model=spec, n_grid=(100, 50), checks=("theta",))
    with pytest.raises(ParameterError):
        ExperimentConfig(model=spec, n_grid=(100,), checks=("theta",), replications=0)


def test_incompatible_check_fails_run(tmp_path):
    # laplace needs a catalog extremal index: ar1 with signed innovations has none
    body = """
[model]
kind = ar1
alpha = 1.0
phi = 0.5
p = 0.9
seed = 3

[experiment]
n_grid = 2000
replications = 100
checks = laplace
out = {out}
"""
    cfg = write_config(tmp_path / "c.ini", body.format(out=tmp_path / "rep"))
    assert main(["run", cfg]) == 1
    rows = [json.loads(line) for line in open(tmp_path / "rep" / "report.jsonl")]
    assert rows[0]["verdict"] == "fail"
