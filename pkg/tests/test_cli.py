"""Command-line interface tests over the replay, report, and eval commands."""

from __future__ import annotations

import json
import signal
import socket
import subprocess
import sys
import time

import pytest
import requests
from click.testing import CliRunner

from conftest import DATA_DIR
from corpus import separable_corpus

from evacnet.cli import main

SCENARIO = str(DATA_DIR / "scenario_dorian_like.jsonl")
REGISTRY = str(DATA_DIR / "registry_fixture.csv")
GEOMETRY = str(DATA_DIR / "counties_fixture.geojson")


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


def replay_args(tmp_path, **extra):
    args = [
        "replay",
        "--scenario", SCENARIO,
        "--registry", REGISTRY,
        "--geometry", GEOMETRY,
        "--out", str(tmp_path / "snapshot.geojson"),
    ]
    for flag, value in extra.items():
        args += [f"--{flag.replace('_', '-')}", str(value)]
    return args


# ----------------------------------------------------------------- replay


def test_replay_writes_golden_snapshot(runner, tmp_path):
    result = runner.invoke(main, replay_args(tmp_path))
    assert result.exit_code == 0, result.output
    written = (tmp_path / "snapshot.geojson").read_bytes()
    assert written == (DATA_DIR / "golden_snapshot.geojson").read_bytes()
    # Event log lands on stdout by default; the summary goes to stderr.
    assert '"event": "notice_upserted"' in result.stdout
    assert "replay complete: 1 active notice(s)" in result.stderr


def test_replay_log_and_store_outputs(runner, tmp_path):
    result = runner.invoke(
        main,
        replay_args(
            tmp_path,
            log_out=tmp_path / "events.jsonl",
            store_out=tmp_path / "store.jsonl",
        ),
    )
    assert result.exit_code == 0, result.output
    log_text = (tmp_path / "events.jsonl").read_text(encoding="utf-8")
    assert log_text == (DATA_DIR / "golden_replay_log.jsonl").read_text(encoding="utf-8")
    assert result.stdout == ""
    assert (tmp_path / "store.jsonl").exists()


def test_replay_bad_scenario_exits_2(runner, tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("not json\n", encoding="utf-8")
    args = replay_args(tmp_path)
    args[args.index("--scenario") + 1] = str(bad)
    result = runner.invoke(main, args)
    assert result.exit_code == 2
    assert "error:" in result.stderr


def test_replay_remote_backend_requires_endpoint(runner, tmp_path):
    result = runner.invoke(main, replay_args(tmp_path, backend="remote"))
    assert result.exit_code == 2
    assert "--endpoint" in result.stderr


def test_replay_missing_scenario_file(runner, tmp_path):
    args = replay_args(tmp_path)
    args[args.index("--scenario") + 1] = str(tmp_path / "nope.jsonl")
    result = runner.invoke(main, args)
    assert result.exit_code == 2


# ----------------------------------------------------------------- report


@pytest.fixture()
def saved_store(runner, tmp_path):
    path = tmp_path / "store.jsonl"
    result = runner.invoke(main, replay_args(tmp_path, store_out=path))
    assert result.exit_code == 0
    return path


def test_report_by_year(runner, saved_store):
    result = runner.invoke(main, ["report", "--store", str(saved_store)])
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0].split() == ["Year", "Count"]
    assert lines[1].split() == ["2019", "2"]


def test_report_by_label_with_plot_data(runner, saved_store, tmp_path):
    plot = tmp_path / "plot.csv"
    result = runner.invoke(
        main, ["report", "--store", str(saved_store), "--by", "label", "--plot-out", str(plot)]
    )
    assert result.exit_code == 0
    assert "Mandatory" in result.stdout
    rows = plot.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "key,series,count"
    assert "Mandatory,All,1" in rows


def test_report_unreadable_store_exits_2(runner, tmp_path):
    garbage = tmp_path / "garbage.jsonl"
    garbage.write_text("not json\n", encoding="utf-8")
    result = runner.invoke(main, ["report", "--store", str(garbage)])
    assert result.exit_code == 2
    assert "error:" in result.stderr


# ------------------------------------------------------------------- eval


def write_labeled_csv(tmp_path) -> str:
    path = tmp_path / "labeled.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        import csv

        writer = csv.writer(fh)
        writer.writerow(["text", "gold", "origin", "year", "fips"])
        for ex in separable_corpus(per_class=8, seed=2):
            writer.writerow([ex.text, ex.gold.value, ex.origin.value, ex.year, ex.fips])
    return str(path)


def test_eval_lexical_three_class(runner, tmp_path):
    data = write_labeled_csv(tmp_path)
    json_out = tmp_path / "report.json"
    result = runner.invoke(
        main,
        ["eval", "--data", data, "--k", "4", "--seed", "1", "--json-out", str(json_out)],
    )
    assert result.exit_code == 0, result.output
    assert "Accuracy" in result.stdout
    assert "1.000 (0.000)" in result.stdout
    payload = json.loads(json_out.read_text(encoding="utf-8"))
    assert payload["k"] == 4
    assert payload["task"] == "three"
    assert len(payload["folds"]) == 4


def test_eval_binary_task(runner, tmp_path):
    data = write_labeled_csv(tmp_path)
    result = runner.invoke(main, ["eval", "--data", data, "--task", "binary", "--k", "4"])
    assert result.exit_code == 0, result.output
    assert "Notice" in result.stdout
    assert "Accuracy" in result.stdout


def test_eval_no_stratify(runner, tmp_path):
    data = write_labeled_csv(tmp_path)
    result = runner.invoke(main, ["eval", "--data", data, "--k", "4", "--no-stratify"])
    assert result.exit_code == 0, result.output


def test_eval_remote_requires_endpoint(runner, tmp_path):
    data = write_labeled_csv(tmp_path)
    result = runner.invoke(main, ["eval", "--data", data, "--backend", "remote"])
    assert result.exit_code == 2
    assert "--endpoint" in result.stderr


def test_eval_unreachable_remote_exits_3(runner, tmp_path):
    data = write_labeled_csv(tmp_path)
    result = runner.invoke(
        main,
        [
            "eval",
            "--data", data,
            "--k", "4",
            "--backend", "remote",
            "--endpoint", "http://127.0.0.1:9",
        ],
    )
    assert result.exit_code == 3
    assert "error:" in result.stderr


def test_help_lists_commands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in ("replay", "report", "eval", "serve"):
        assert command in result.stdout


# ------------------------------------------------------------------ serve


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _wait_for_health(port: int, deadline_secs: float = 20.0) -> None:
    start = time.monotonic()
    while time.monotonic() - start < deadline_secs:
        try:
            if requests.get(f"http://127.0.0.1:{port}/api/health", timeout=1).ok:
                return
        except requests.RequestException:
            time.sleep(0.15)
    raise AssertionError("service never became healthy")


def test_serve_sigterm_persists_feedback(saved_store):
    """Events recorded while serving must survive a SIGTERM shutdown.

    uvicorn re-raises a captured SIGTERM after its graceful shutdown; the
    serve command has to turn that into a normal exit so the store save
    still runs.
    """
    before = len(saved_store.read_text(encoding="utf-8").splitlines())
    port = _free_port()
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "evacnet.cli", "serve",
            "--registry", REGISTRY,
            "--geometry", GEOMETRY,
            "--store", str(saved_store),
            "--reviewer-token", "tok",
            "--port", str(port),
            "--alert-poll-secs", "3600",
            "--harvest-interval-secs", "3600",
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        _wait_for_health(port)
        resp = requests.post(
            f"http://127.0.0.1:{port}/api/feedback",
            json={"notice_id": "n-000003", "action": "Confirm"},
            headers={"X-Reviewer-Token": "tok"},
            timeout=5,
        )
        assert resp.status_code == 200
        proc.send_signal(signal.SIGTERM)
        assert proc.wait(timeout=20) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait(timeout=5)

    lines = [json.loads(line) for line in saved_store.read_text(encoding="utf-8").splitlines()]
    assert len(lines) == before + 1
    assert lines[-1]["type"] == "feedback"
    assert lines[-1]["entry"]["notice_id"] == "n-000003"
    assert lines[-1]["entry"]["action"] == "Confirm"
