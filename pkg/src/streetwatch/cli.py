"""Command-line front end.

Four commands: simulate a scenario into detection + truth streams, replay
a detection stream through the pipeline, evaluate a tracked stream against
truth, and inspect which alarm stage a distance falls into.

Exit codes: 0 success, 1 validation or parse failure, 2 stream-order or
alignment failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from typing import List, Optional

from .alarm import stage_for_distance
from .config import ConfigError, load_config
from .evaluation import (
    AlignmentError,
    BandPartition,
    EvalError,
    ExcuseConfig,
    TruthProjector,
    score,
)
from .jsonl import (
    ParseError,
    decode_detection_frame,
    encode_alarm_event,
    encode_detection_frame,
    encode_tracked_object,
    encode_truth_record,
    read_records,
    read_tracked_objects,
    read_truth_records,
    write_lines,
)
from .pipeline import Pipeline, StreamOrderError
from .simulator import ScenarioError, generate, scenario_by_name, scenario_from_dict, with_seed
from .types import FrameValidationError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streetwatch",
        description="post-detection hazard pipeline: distance, direction and staged alarms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a scenario into detection and truth streams")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("scenario", nargs="?", help="scenario JSON file")
    src.add_argument("--suite", metavar="NAME", help="use a bundled scenario by name")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--out-detections", required=True, metavar="PATH")
    p.add_argument("--out-truth", required=True, metavar="PATH")

    p = sub.add_parser("replay", help="run a detection stream through the pipeline")
    p.add_argument("detections", help="detection stream (JSON-Lines)")
    p.add_argument("--config", metavar="PATH", help="pipeline config INI (defaults used when omitted)")
    p.add_argument("--out-tracked", required=True, metavar="PATH")
    p.add_argument("--out-events", required=True, metavar="PATH")

    p = sub.add_parser("eval", help="score a tracked stream against simulator truth")
    p.add_argument("tracked", help="tracked stream (JSON-Lines)")
    p.add_argument("truth", help="truth stream (JSON-Lines)")
    p.add_argument("--bands", metavar="CM,CM,...", help="band boundaries in cm (default 300,600)")
    p.add_argument(
        "--config",
        metavar="PATH",
        help="pipeline config INI; enables projected-center alignment and the excusable-forward rule",
    )
    p.add_argument("--report", required=True, metavar="PATH", help="write the report as JSON here")

    p = sub.add_parser("stage", help="show the alarm stage for a distance")
    p.add_argument("distance_cm", type=float)
    p.add_argument("--config", metavar="PATH", help="pipeline config INI (defaults used when omitted)")

    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.suite:
        spec = scenario_by_name(args.suite)
    else:
        try:
            with open(args.scenario, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{args.scenario}: invalid JSON: {exc}") from None
        spec = scenario_from_dict(data)
    if args.seed is not None:
        spec = with_seed(spec, args.seed)
    frames, truth = generate(spec)
    write_lines(args.out_detections, (encode_detection_frame(f) for f in frames))
    write_lines(args.out_truth, (encode_truth_record(r) for r in truth))
    print(f"scenario: {spec.name}")
    print(f"frames: {len(frames)}")
    print(f"actors: {len(spec.actors)}")
    print(f"emitted detections: {sum(len(f.detections) for f in frames)}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    pipeline = Pipeline(cfg)
    stage_counts: Counter = Counter()
    frames = 0
    total_events = 0
    with open(args.out_tracked, "w", encoding="utf-8", newline="") as tracked_out, open(
        args.out_events, "w", encoding="utf-8", newline=""
    ) as events_out:
        for frame in read_records(args.detections, decode_detection_frame):
            tracked, events = pipeline.process_frame(frame)
            frames += 1
            for obj in tracked:
                tracked_out.write(encode_tracked_object(obj) + "\n")
            for event in events:
                events_out.write(encode_alarm_event(event) + "\n")
                stage_counts[event.stage] += 1
                total_events += 1
    print(f"frames: {frames}")
    for stage in (1, 2, 3):
        print(f"stage {stage} events: {stage_counts.get(stage, 0)}")
    print(f"total events: {total_events}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    tracked = read_tracked_objects(args.tracked)
    truth = read_truth_records(args.truth)
    bands = None
    if args.bands:
        try:
            boundaries = tuple(float(part) for part in args.bands.split(","))
        except ValueError:
            raise EvalError(f"--bands must be comma-separated numbers, got {args.bands!r}") from None
        bands = BandPartition(boundaries)
    excuse = None
    projector = None
    if args.config:
        cfg = load_config(args.config)
        excuse = ExcuseConfig(
            focal_px=cfg.camera.focal_px,
            gap=cfg.direction.gap,
            dead_zone_px=cfg.direction.dead_zone_px,
        )
        projector = TruthProjector(
            camera=cfg.camera,
            camera_height_cm=cfg.camera_height_cm,
            heights=cfg.heights,
        )
    report = score(tracked, truth, bands, excuse=excuse, projector=projector)
    with open(args.report, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(report.to_dict(), indent=2) + "\n")
    print(report.render_text())
    return 0


def _cmd_stage(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    st = stage_for_distance(args.distance_cm, cfg.alarm)
    if st is None:
        print("none")
    else:
        print(f"stage {st.stage}, vibration {st.vibration_s:g} s")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "replay": _cmd_replay,
    "eval": _cmd_eval,
    "stage": _cmd_stage,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; that code is reserved for
        # stream-order/alignment failures here
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except (StreamOrderError, AlignmentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ParseError, ScenarioError, EvalError, FrameValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
