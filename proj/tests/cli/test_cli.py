"""Exit codes and outputs of the edlab command line (0 ok, 1 failure, 2 usage)."""

import csv
import json
import os
import subprocess

import pytest

BIN = os.environ.get("EDLAB_BIN", "edlab")

TINY = ["--set", "train.iters=10", "--set", "eval.eval_every=5", "--set", "eval.grid=8",
        "--set", "eval.logz_n=100", "--set", "sample.n=10", "--set", "sample.langevin_steps=2",
        "--set", "model.hidden=8", "--set", "model.layers=2"]


def run(*args, cwd=None):
    return subprocess.run([BIN, *args], capture_output=True, text=True, cwd=cwd, timeout=300)


def test_help_is_ok():
    assert run("--help").returncode == 0


@pytest.mark.parametrize("args", [
    [],
    ["bogus"],
    ["train", "--set", "train.nope=1"],
    ["train", "--set", "train.iters=abc"],
    ["train", "--set", "loss.kind=magic"],
    ["train", "--set", "noequals"],
    ["train", "--config", "/nonexistent/cfg.toml"],
    ["verify", "no_such_check"],
    ["experiment", "no_such_experiment"],
    ["datasets", "dump", "--name", "nope", "--out", "x.csv"],
])
def test_usage_errors_exit_2(args, tmp_path):
    assert run(*args, cwd=tmp_path).returncode == 2


def test_missing_checkpoint_exits_1(tmp_path):
    r = run("eval-density", "--ckpt", str(tmp_path / "missing.ckpt"))
    assert r.returncode == 1
    assert "error" in r.stderr


def test_train_then_sample_and_eval(tmp_path):
    out = tmp_path / "run"
    r = run("train", *TINY, "--seed", "3", "--out", str(out))
    assert r.returncode == 0, r.stderr
    with open(out / "metrics.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["iter", "loss", "density_mse", "logz"]
    assert [row[0] for row in rows[1:]] == ["0", "5", "10"]
    status = json.loads((out / "status.json").read_text())
    assert status["status"] == "ok"

    samples = tmp_path / "s.csv"
    r = run("sample", "--ckpt", str(out / "model.ckpt"), "--n", "7", "--steps", "2", "--out", str(samples))
    assert r.returncode == 0, r.stderr
    assert samples.read_text().splitlines()[0] == "x1,x2"
    assert len(samples.read_text().splitlines()) == 8

    r = run("eval-density", "--ckpt", str(out / "model.ckpt"), "--grid", "8", "--logz-n", "100")
    assert r.returncode == 0, r.stderr
    report = json.loads(r.stdout)
    assert set(report) == {"logz", "density_mse"}


def test_train_replays_byte_for_byte(tmp_path):
    for d in ("a", "b"):
        assert run("train", *TINY, "--out", str(tmp_path / d)).returncode == 0
    for f in ("metrics.csv", "energy_grid.csv", "samples.csv", "model.ckpt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_verify_single_check(tmp_path):
    out = tmp_path / "reports.jsonl"
    r = run("verify", "thm2_gap", "--out", str(out))
    assert r.returncode == 0
    lines = [json.loads(x) for x in r.stdout.splitlines()]
    assert len(lines) == 9 and all(x["pass"] for x in lines)
    assert out.read_text() == r.stdout


def test_experiment_prints_json(tmp_path):
    r = run("experiment", "wstudy", "--set", "wstudy.epochs=2", "--set", "wstudy.n=128",
            "--out", str(tmp_path / "w"))
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["experiment"] == "wstudy"


def test_datasets_dump(tmp_path):
    out = tmp_path / "d.csv"
    assert run("datasets", "dump", "--name", "gauss25", "--n", "5", "--out", str(out)).returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x1,x2,logp" and len(lines) == 6
