"""Shared builders and a brute-force association oracle."""
from typing import Dict, List, Optional, Sequence, Tuple

import pytest

from streetwatch.camera import CameraIntrinsics, HeightTable
from streetwatch.matcher import MatchConfig, euclidean_cost, iou_cost
from streetwatch.types import BoundingBox, Category, Detection, DetectionFrame


def make_det(
    label: str = "car",
    cx: float = 320.0,
    cy: float = 240.0,
    w: float = 40.0,
    h: float = 40.0,
    confidence: float = 1.0,
) -> Detection:
    """Detection built from its center, the way most tests think about it."""
    box = BoundingBox(x=cx - w / 2.0, y=cy - h / 2.0, w=w, h=h)
    return Detection(category=Category(label), bbox=box, confidence=confidence)


def make_frame(frame_id: int, t_ms: int, detections: Sequence[Detection]) -> DetectionFrame:
    return DetectionFrame(frame_id=frame_id, t_ms=t_ms, detections=tuple(detections))


@pytest.fixture
def intrinsics() -> CameraIntrinsics:
    return CameraIntrinsics(focal_px=1000.0, image_w=640.0, image_h=480.0)


@pytest.fixture
def heights() -> HeightTable:
    return HeightTable({"car": 140.0, "person": 165.0, "bus": 320.0})


# --- association oracle ---------------------------------------------------
#
# Small instances only: enumerates every injective partial mapping per
# category, so keep sides at <= 5 detections.

def gated_edges(
    current: DetectionFrame, reference: DetectionFrame, cfg: MatchConfig
) -> List[Tuple[int, int, float]]:
    """All (current, reference, cost) pairs that pass category and gate."""
    edges = []
    for i, a in enumerate(current.detections):
        for j, b in enumerate(reference.detections):
            if cfg.strategy == "euclidean":
                cost = euclidean_cost(a, b)
                if cost is not None and cost <= cfg.max_center_dist_px:
                    edges.append((i, j, cost))
            else:
                overlap = iou_cost(a, b)
                if overlap is not None and overlap >= cfg.min_iou:
                    edges.append((i, j, overlap))
    return edges


def _best_for_group(
    cur_indices: List[int],
    edge_cost: Dict[Tuple[int, int], float],
    ref_indices: List[int],
    maximize: bool,
) -> Tuple[int, float]:
    """(count, total) of the best assignment inside one category group."""
    best = (0, 0.0)

    def better(a: Tuple[int, float], b: Tuple[int, float]) -> bool:
        if a[0] != b[0]:
            return a[0] > b[0]
        return a[1] > b[1] if maximize else a[1] < b[1]

    def rec(k: int, used: set, count: int, total: float) -> None:
        nonlocal best
        if k == len(cur_indices):
            if better((count, total), best):
                best = (count, total)
            return
        i = cur_indices[k]
        rec(k + 1, used, count, total)
        for j in ref_indices:
            if j in used:
                continue
            cost = edge_cost.get((i, j))
            if cost is None:
                continue
            used.add(j)
            rec(k + 1, used, count + 1, total + cost)
            used.remove(j)

    rec(0, set(), 0, 0.0)
    return best


def best_assignment_bruteforce(
    current: DetectionFrame, reference: DetectionFrame, cfg: MatchConfig
) -> Tuple[int, float]:
    """Exhaustive optimum: most pairs, then min total distance (or max IoU).

    Categories never mix, so each category group is solved independently
    and the results summed.
    """
    edges = gated_edges(current, reference, cfg)
    edge_cost = {(i, j): c for i, j, c in edges}
    maximize = cfg.strategy == "iou"

    by_label: Dict[str, Tuple[List[int], List[int]]] = {}
    for i, d in enumerate(current.detections):
        by_label.setdefault(d.category.label, ([], []))[0].append(i)
    for j, d in enumerate(reference.detections):
        by_label.setdefault(d.category.label, ([], []))[1].append(j)

    count, total = 0, 0.0
    for cur_indices, ref_indices in by_label.values():
        c, t = _best_for_group(cur_indices, edge_cost, ref_indices, maximize)
        count += c
        total += t
    return count, total


def is_mutual_nn_instance(
    current: DetectionFrame,
    reference: DetectionFrame,
    cfg: MatchConfig,
    min_gap: float = 1e-6,
) -> bool:
    """True when every gated detection pairs up with its mutual nearest.

    Requires all relevant cost gaps to exceed min_gap so the optimum is
    unique; on such instances the greedy result must equal the exhaustive
    one.
    """
    edges = gated_edges(current, reference, cfg)
    if not edges:
        return False
    sign = -1.0 if cfg.strategy == "iou" else 1.0
    best_for_cur: Dict[int, Tuple[float, int]] = {}
    best_for_ref: Dict[int, Tuple[float, int]] = {}
    cur_costs: Dict[int, List[float]] = {}
    ref_costs: Dict[int, List[float]] = {}
    for i, j, c in edges:
        key = sign * c
        cur_costs.setdefault(i, []).append(key)
        ref_costs.setdefault(j, []).append(key)
        if i not in best_for_cur or key < best_for_cur[i][0]:
            best_for_cur[i] = (key, j)
        if j not in best_for_ref or key < best_for_ref[j][0]:
            best_for_ref[j] = (key, i)
    for costs in list(cur_costs.values()) + list(ref_costs.values()):
        ordered = sorted(costs)
        for a, b in zip(ordered, ordered[1:]):
            if b - a <= min_gap:
                return False
    for i, (_, j) in best_for_cur.items():
        if best_for_ref[j][1] != i:
            return False
    for j, (_, i) in best_for_ref.items():
        if best_for_cur[i][1] != j:
            return False
    return True
