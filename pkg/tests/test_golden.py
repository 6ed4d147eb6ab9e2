"""Golden streams: committed bytes must be reproducible end to end."""
import subprocess
import sys
from pathlib import Path

import pytest

from streetwatch.jsonl import read_alarm_events, read_tracked_objects, read_truth_records
from streetwatch.evaluation import score

GOLDEN = Path(__file__).parent / "golden"
SCENARIOS = ["single-crosser", "approach-head-on"]


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "streetwatch", *args],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.mark.parametrize("name", SCENARIOS)
def test_simulation_reproduces_the_committed_streams(tmp_path, name):
    det = tmp_path / "detections.jsonl"
    truth = tmp_path / "truth.jsonl"
    run_cli("simulate", "--suite", name, "--out-detections", str(det), "--out-truth", str(truth))
    assert det.read_bytes() == (GOLDEN / f"{name}.detections.jsonl").read_bytes()
    assert truth.read_bytes() == (GOLDEN / f"{name}.truth.jsonl").read_bytes()


@pytest.mark.parametrize("name", SCENARIOS)
def test_replay_reproduces_the_committed_streams(tmp_path, name):
    tracked = tmp_path / "tracked.jsonl"
    events = tmp_path / "events.jsonl"
    run_cli(
        "replay", str(GOLDEN / f"{name}.detections.jsonl"),
        "--out-tracked", str(tracked), "--out-events", str(events),
    )
    assert tracked.read_bytes() == (GOLDEN / f"{name}.tracked.jsonl").read_bytes()
    assert events.read_bytes() == (GOLDEN / f"{name}.events.jsonl").read_bytes()


@pytest.mark.parametrize("name", SCENARIOS)
def test_committed_streams_score_perfectly(name):
    tracked = read_tracked_objects(GOLDEN / f"{name}.tracked.jsonl")
    truth = read_truth_records(GOLDEN / f"{name}.truth.jsonl")
    report = score(tracked, truth)
    assert report.category_accuracy == 1.0
    assert report.direction_accuracy_overall == 1.0
    assert report.id_switches == 0


def test_committed_event_sequences():
    single = read_alarm_events(GOLDEN / "single-crosser.events.jsonl")
    assert [(e.t_ms, e.stage, e.message) for e in single] == [
        (0, 1, "Car ahead"),
        (1500, 1, "Car moving right"),
        (3000, 1, "Car moving right"),
    ]
    approach = read_alarm_events(GOLDEN / "approach-head-on.events.jsonl")
    # the walker reaches each band's far edge exactly at 600, 300 and 150 cm
    assert [(e.t_ms, e.stage, round(e.distance_cm, 6)) for e in approach] == [
        (2000, 1, 600.0),
        (5000, 2, 300.0),
        (6500, 3, 150.0),
    ]
    assert all(e.message == "Person moving forward" for e in approach)
