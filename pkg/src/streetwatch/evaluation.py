"""Scoring tracked streams against simulator ground truth.

Alignment is per frame_id. Within a frame the default is positional:
the simulator documents that the k-th detection is the k-th emitted
truth record, and the pipeline preserves detection order, so the k-th
tracked object pairs with the k-th emitted record. When a projector is
supplied (camera known), greedy nearest-center assignment between
tracked boxes and projected truth positions is used instead, which also
covers streams whose within-frame order is not trustworthy.

Fractions with an empty denominator are reported as None ("n/a"),
never as 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .camera import CameraIntrinsics, HeightTable
from .direction import DirectionConfig, DirectionLabel, default_dead_zone_px
from .matcher import MatchConfig
from .pipeline import Pipeline, PipelineConfig, TrackedObject
from .simulator import ScenarioSpec, TruthRecord, generate
from .types import Category, DetectionFrame


class AlignmentError(Exception):
    """Tracked and truth streams do not describe the same run."""


class EvalError(ValueError):
    """Evaluation inputs are unusable (bad bands, missing heights, ...)."""


@dataclass(frozen=True)
class BandPartition:
    """Depth bands over (0, inf), split at the given ascending boundaries.

    The default splits at 300 and 600 cm. Every band is half-open
    (lo, hi], the last one open-ended; banding uses the true depth.
    These edges are harness conventions, not calibrated values, and are
    echoed in the report's assumptions.
    """

    boundaries_cm: Tuple[float, ...] = (300.0, 600.0)

    def __post_init__(self):
        if not isinstance(self.boundaries_cm, tuple):
            object.__setattr__(self, "boundaries_cm", tuple(self.boundaries_cm))
        if not self.boundaries_cm:
            raise EvalError("at least one band boundary is required")
        previous = 0.0
        for b in self.boundaries_cm:
            if not (isinstance(b, (int, float)) and math.isfinite(b) and b > previous):
                raise EvalError(f"band boundaries must be positive and strictly ascending, got {self.boundaries_cm}")
            previous = b

    def labels(self) -> List[str]:
        out = []
        lo = 0.0
        for hi in self.boundaries_cm:
            out.append(f"{lo:g}-{hi:g}")
            lo = hi
        out.append(f"{lo:g}+")
        return out

    def index_for(self, depth_cm: float) -> int:
        for k, hi in enumerate(self.boundaries_cm):
            if depth_cm <= hi:
                return k
        return len(self.boundaries_cm)


@dataclass(frozen=True)
class ExcuseConfig:
    """What the excusable-forward rule needs to project truth displacement."""

    focal_px: float
    gap: int
    dead_zone_px: float

    def __post_init__(self):
        if not self.focal_px > 0:
            raise EvalError(f"focal_px must be positive, got {self.focal_px!r}")
        if not isinstance(self.gap, int) or self.gap < 1:
            raise EvalError(f"gap must be an integer >= 1, got {self.gap!r}")
        if not self.dead_zone_px > 0:
            raise EvalError(f"dead_zone_px must be positive, got {self.dead_zone_px!r}")


@dataclass(frozen=True)
class TruthProjector:
    """Projects truth records back into pixel centers for alignment."""

    camera: CameraIntrinsics
    camera_height_cm: float
    heights: HeightTable

    def center(self, rec: TruthRecord) -> Tuple[float, float]:
        real_height = self.heights.lookup(rec.true_category)
        if real_height is None:
            raise EvalError(f"no height entry for category {rec.true_category.label!r}; cannot project truth")
        f = self.camera.focal_px
        z = rec.true_depth_cm
        h = f * real_height / z
        cx = self.camera.image_w / 2.0 + f * rec.true_lateral_cm / z
        cy = self.camera.image_h / 2.0 + f * self.camera_height_cm / z - h / 2.0
        return cx, cy


@dataclass(frozen=True)
class EvalReport:
    """Headline fractions plus the raw counts they were computed from."""

    category_accuracy: Optional[float]
    direction_accuracy_overall: Optional[float]
    direction_accuracy_by_band: Dict[str, Optional[float]]
    matched_fraction: Optional[float]
    id_switches: int
    counts: Dict[str, object]
    assumptions: Dict[str, object]

    def to_dict(self) -> Dict[str, object]:
        return {
            "category_accuracy": self.category_accuracy,
            "direction_accuracy_overall": self.direction_accuracy_overall,
            "direction_accuracy_by_band": dict(self.direction_accuracy_by_band),
            "matched_fraction": self.matched_fraction,
            "id_switches": self.id_switches,
            "counts": self.counts,
            "assumptions": self.assumptions,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "EvalReport":
        return cls(
            category_accuracy=data["category_accuracy"],
            direction_accuracy_overall=data["direction_accuracy_overall"],
            direction_accuracy_by_band=dict(data["direction_accuracy_by_band"]),
            matched_fraction=data["matched_fraction"],
            id_switches=int(data["id_switches"]),
            counts=dict(data["counts"]),
            assumptions=dict(data["assumptions"]),
        )

    def render_text(self) -> str:
        def fmt(v: Optional[float]) -> str:
            return "n/a" if v is None else f"{v:.4f}"

        rows = [
            ("category accuracy:", fmt(self.category_accuracy)),
            ("direction accuracy overall:", fmt(self.direction_accuracy_overall)),
        ]
        for label, value in self.direction_accuracy_by_band.items():
            rows.append((f"  band {label} cm:", fmt(value)))
        rows.append(("matched fraction:", fmt(self.matched_fraction)))
        rows.append(("id switches:", str(self.id_switches)))
        width = max(len(name) for name, _ in rows) + 2
        return "\n".join(f"{name:<{width}}{value}" for name, value in rows)


def _group_by_frame(records: Iterable, key=lambda r: r.frame_id) -> Dict[int, List]:
    grouped: Dict[int, List] = {}
    for rec in records:
        grouped.setdefault(key(rec), []).append(rec)
    return grouped


def _align_frame(
    tracked: List[TrackedObject],
    emitted: List[TruthRecord],
    projector: Optional[TruthProjector],
) -> List[Tuple[TrackedObject, TruthRecord]]:
    if projector is None:
        return list(zip(tracked, emitted))
    # greedy nearest-center assignment; counts are equal, so everything pairs
    candidates = []
    centers = [projector.center(r) for r in emitted]
    for ti, obj in enumerate(tracked):
        cx, cy = obj.bbox.center()
        for rj, (rx, ry) in enumerate(centers):
            candidates.append((math.hypot(cx - rx, cy - ry), ti, rj))
    candidates.sort()
    taken_t = [False] * len(tracked)
    taken_r = [False] * len(emitted)
    pairs = []
    for _cost, ti, rj in candidates:
        if taken_t[ti] or taken_r[rj]:
            continue
        taken_t[ti] = True
        taken_r[rj] = True
        pairs.append((tracked[ti], emitted[rj]))
    return pairs


def score(
    tracked: Sequence[TrackedObject],
    truth: Sequence[TruthRecord],
    bands: Optional[BandPartition] = None,
    *,
    excuse: Optional[ExcuseConfig] = None,
    projector: Optional[TruthProjector] = None,
) -> EvalReport:
    """Score a tracked stream against the truth stream of the same run.

    category accuracy counts emitted detections whose label survived;
    direction accuracy counts only objects that carry a direction (the
    matched fraction reports how many that is). With an ExcuseConfig, a
    'forward' label on a moving actor is accepted when the actor's true
    projected displacement over the gap stays inside the dead zone; without
    one, scoring is strict. Raises AlignmentError when per-frame counts of
    tracked objects and emitted truth records disagree.
    """
    bands = bands or BandPartition()
    labels = bands.labels()

    tracked_by_frame = _group_by_frame(tracked)
    truth_by_frame = _group_by_frame(truth)
    truth_by_actor_frame: Dict[Tuple[int, int], TruthRecord] = {
        (r.actor_id, r.frame_id): r for r in truth
    }

    aligned = 0
    category_correct = 0
    dir_classified = [0] * len(labels)
    dir_correct = [0] * len(labels)
    actor_last_id: Dict[int, int] = {}
    id_switches = 0

    for frame_id in sorted(set(tracked_by_frame) | set(truth_by_frame)):
        tracked_here = tracked_by_frame.get(frame_id, [])
        emitted_here = [r for r in truth_by_frame.get(frame_id, []) if r.emitted]
        if len(tracked_here) != len(emitted_here):
            raise AlignmentError(
                f"frame {frame_id}: {len(tracked_here)} tracked objects vs "
                f"{len(emitted_here)} emitted truth records"
            )
        for obj, rec in _align_frame(tracked_here, emitted_here, projector):
            aligned += 1
            if obj.category == rec.true_category:
                category_correct += 1
            last = actor_last_id.get(rec.actor_id)
            if last is not None and last != obj.object_id:
                id_switches += 1
            actor_last_id[rec.actor_id] = obj.object_id
            if obj.direction is None:
                continue
            band = bands.index_for(rec.true_depth_cm)
            dir_classified[band] += 1
            if obj.direction == rec.true_direction:
                dir_correct[band] += 1
            elif (
                excuse is not None
                and obj.direction == DirectionLabel.FORWARD
                and rec.true_direction != DirectionLabel.FORWARD
            ):
                past = truth_by_actor_frame.get((rec.actor_id, rec.frame_id - excuse.gap))
                if past is not None:
                    disp = excuse.focal_px * (
                        rec.true_lateral_cm / rec.true_depth_cm
                        - past.true_lateral_cm / past.true_depth_cm
                    )
                    if abs(disp) <= excuse.dead_zone_px:
                        dir_correct[band] += 1

    classified_total = sum(dir_classified)
    correct_total = sum(dir_correct)

    def ratio(num: int, den: int) -> Optional[float]:
        return None if den == 0 else num / den

    by_band = {labels[k]: ratio(dir_correct[k], dir_classified[k]) for k in range(len(labels))}
    counts = {
        "aligned": aligned,
        "category_correct": category_correct,
        "direction": {"classified": classified_total, "correct": correct_total},
        "direction_by_band": {
            labels[k]: {"classified": dir_classified[k], "correct": dir_correct[k]}
            for k in range(len(labels))
        },
    }
    assumptions = {
        "band_boundaries_cm": list(bands.boundaries_cm),
        "direction_scoring": "strict" if excuse is None else "excusable-forward",
        "alignment": "positional" if projector is None else "projected-center",
    }
    return EvalReport(
        category_accuracy=ratio(category_correct, aligned),
        direction_accuracy_overall=ratio(correct_total, classified_total),
        direction_accuracy_by_band=by_band,
        matched_fraction=ratio(classified_total, aligned),
        id_switches=id_switches,
        counts=counts,
        assumptions=assumptions,
    )


def config_for_scenario(
    spec: ScenarioSpec,
    *,
    gap: int = 2,
    dead_zone_px: Optional[float] = None,
    secondary_match: bool = True,
) -> PipelineConfig:
    """A pipeline config that mirrors a scenario: same camera, same heights."""
    heights: Dict[str, float] = {}
    for actor in spec.actors:
        label = actor.category.label
        if label in heights and heights[label] != actor.real_height_cm:
            raise EvalError(f"actors disagree on the height of {label!r}; cannot derive a height table")
        heights[label] = actor.real_height_cm
    dz = default_dead_zone_px(spec.camera.image_w) if dead_zone_px is None else dead_zone_px
    return PipelineConfig(
        camera=spec.camera,
        camera_height_cm=spec.camera_height_cm,
        heights=HeightTable(heights),
        matcher=MatchConfig(max_center_dist_px=0.25 * spec.camera.image_w),
        direction=DirectionConfig(gap=gap, dead_zone_px=dz),
        secondary_match=secondary_match,
    )


@dataclass(frozen=True)
class ScenarioRun:
    """Everything one simulated run produced, plus its report."""

    spec: ScenarioSpec
    frames: List[DetectionFrame]
    truth: List[TruthRecord]
    tracked: List[TrackedObject]
    events: List
    report: EvalReport


def run_scenario(
    spec: ScenarioSpec,
    *,
    config: Optional[PipelineConfig] = None,
    bands: Optional[BandPartition] = None,
    strict: bool = False,
) -> ScenarioRun:
    """Simulate, replay through the pipeline, and score in one call.

    Unless strict is set, the excusable-forward rule is applied using the
    run's own focal length, gap and dead zone.
    """
    cfg = config or config_for_scenario(spec)
    frames, truth = generate(spec)
    pipeline = Pipeline(cfg)
    tracked: List[TrackedObject] = []
    events: List = []
    for frame in frames:
        t, e = pipeline.process_frame(frame)
        tracked.extend(t)
        events.extend(e)
    excuse = None
    if not strict:
        excuse = ExcuseConfig(
            focal_px=cfg.camera.focal_px,
            gap=cfg.direction.gap,
            dead_zone_px=cfg.direction.dead_zone_px,
        )
    report = score(tracked, truth, bands, excuse=excuse)
    return ScenarioRun(spec=spec, frames=frames, truth=truth, tracked=tracked, events=events, report=report)


@dataclass(frozen=True)
class GapComparison:
    gap1: EvalReport
    gap2: EvalReport


def compare_gap_strategies(spec: ScenarioSpec, dead_zone_px: float) -> GapComparison:
    """Score the same run under a one-frame and a two-frame lookback.

    Scoring is strict on purpose: the comparison exists to expose labels
    that hide inside the dead zone, so the excusable-forward rule would
    defeat its point.
    """
    frames, truth = generate(spec)
    reports: Dict[int, EvalReport] = {}
    for gap in (1, 2):
        cfg = config_for_scenario(spec, gap=gap, dead_zone_px=dead_zone_px)
        pipeline = Pipeline(cfg)
        tracked: List[TrackedObject] = []
        for frame in frames:
            t, _ = pipeline.process_frame(frame)
            tracked.extend(t)
        reports[gap] = score(tracked, truth)
    return GapComparison(gap1=reports[1], gap2=reports[2])
