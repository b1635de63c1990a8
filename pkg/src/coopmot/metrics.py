"""CLEAR-style frame matching and AMOTA-family sequence metrics.

Ground truth rows are (object_id, box) pairs, predictions are
(track_id, box, score) triples; boxes may be Detections or 7-vectors.
Matching is Hungarian on IoU gated at the overlap threshold (0.25 by
default). Identity switches use the per-object id-consistency rule with
carry-over: a switch is counted whenever an object's newly matched track
id differs from the last id it was ever matched to.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import assign, geometry

DEFAULT_IOU_THRESHOLD = 0.25
DEFAULT_NUM_THRESHOLDS = 40
MT_COVERAGE = 0.8


class NoGroundTruth(ValueError):
    """Metrics requested for a sequence with zero ground-truth boxes."""


@dataclass
class FrameCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    idsw: int = 0
    matched_iou_sum: float = 0.0
    gt_count: int = 0

    def add(self, other: "FrameCounts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        self.idsw += other.idsw
        self.matched_iou_sum += other.matched_iou_sum
        self.gt_count += other.gt_count


def _gated_pairs(gt_boxes7, pred_boxes7, iou_threshold):
    """Hungarian max-IoU matching gated at the threshold.

    Boxes are (N, 7) arrays; returns [(row, col, iou)].
    """
    if gt_boxes7.shape[0] == 0 or pred_boxes7.shape[0] == 0:
        return []
    iou = geometry.iou_matrix(gt_boxes7, pred_boxes7)
    pairs = assign.hungarian_min_cost(-iou)
    return [(r, c, float(iou[r, c])) for r, c in pairs
            if iou[r, c] >= iou_threshold]


def match_frame(gt, pred, prev_matching=None,
                iou_threshold: float = DEFAULT_IOU_THRESHOLD):
    """Match one frame's predictions to ground truth.

    gt: list of (object_id, box); pred: list of (track_id, box, score);
    prev_matching: object_id -> last matched track id (carried across
    frames by the caller). Returns (FrameCounts, pairs) where pairs is a
    list of (object_id, track_id, iou).
    """
    prev_matching = prev_matching or {}
    gt_boxes = geometry.as_box7_array([g[1] for g in gt])
    pred_boxes = geometry.as_box7_array([p[1] for p in pred])

    counts = FrameCounts(gt_count=len(gt))
    pairs = []
    for r, c, overlap in _gated_pairs(gt_boxes, pred_boxes, iou_threshold):
        obj_id, tid = gt[r][0], pred[c][0]
        counts.tp += 1
        counts.matched_iou_sum += overlap
        last = prev_matching.get(obj_id)
        if last is not None and last != tid:
            counts.idsw += 1
        pairs.append((obj_id, tid, overlap))
    counts.fn = len(gt) - counts.tp
    counts.fp = len(pred) - counts.tp
    return counts, pairs


@dataclass
class SequenceTally:
    """Accumulated counts plus MT bookkeeping for one evaluation pass."""

    totals: FrameCounts = field(default_factory=FrameCounts)
    per_frame: list = field(default_factory=list)
    frames_present: dict = field(default_factory=dict)
    frames_matched: dict = field(default_factory=dict)

    @property
    def recall(self) -> float:
        return self.totals.tp / self.totals.gt_count if self.totals.gt_count else 0.0


def _prepare(gt_frames, pred_frames):
    """Convert per-frame rows to id/box-array form once, for reuse across
    score thresholds."""
    gt_prep = [([g[0] for g in gt], geometry.as_box7_array([g[1] for g in gt]))
               for gt in gt_frames]
    pred_prep = [([p[0] for p in pred],
                  geometry.as_box7_array([p[1] for p in pred]),
                  np.array([p[2] for p in pred], dtype=float))
                 for pred in pred_frames]
    return gt_prep, pred_prep


def _evaluate_prepared(gt_prep, pred_prep, score_threshold,
                       iou_threshold) -> SequenceTally:
    tally = SequenceTally()
    carry = {}
    for (gt_ids, gt_boxes), (tids, pred_boxes, scores) in zip(gt_prep, pred_prep):
        if score_threshold is not None and scores.shape[0]:
            keep = scores >= score_threshold
            pred_boxes = pred_boxes[keep]
            tids = [t for t, k in zip(tids, keep) if k]
        counts = FrameCounts(gt_count=len(gt_ids))
        matched_objs = set()
        for r, c, overlap in _gated_pairs(gt_boxes, pred_boxes, iou_threshold):
            obj_id, tid = gt_ids[r], tids[c]
            counts.tp += 1
            counts.matched_iou_sum += overlap
            last = carry.get(obj_id)
            if last is not None and last != tid:
                counts.idsw += 1
            carry[obj_id] = tid
            matched_objs.add(obj_id)
        counts.fn = len(gt_ids) - counts.tp
        counts.fp = len(tids) - counts.tp
        tally.totals.add(counts)
        tally.per_frame.append(counts)
        for obj_id in gt_ids:
            tally.frames_present[obj_id] = tally.frames_present.get(obj_id, 0) + 1
            if obj_id in matched_objs:
                tally.frames_matched[obj_id] = tally.frames_matched.get(obj_id, 0) + 1
    return tally


def evaluate_sequence(gt_frames, pred_frames,
                      iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> SequenceTally:
    """Run match_frame over a whole sequence with id carry-over."""
    gt_prep, pred_prep = _prepare(gt_frames, pred_frames)
    return _evaluate_prepared(gt_prep, pred_prep, None, iou_threshold)


def mota_motp(totals: FrameCounts):
    """MOTA = 1 - (FP+FN+IDSW)/GT; MOTP = mean matched IoU."""
    if totals.gt_count == 0:
        raise NoGroundTruth("sequence has no ground-truth boxes")
    mota = 1.0 - (totals.fp + totals.fn + totals.idsw) / totals.gt_count
    motp = totals.matched_iou_sum / totals.tp if totals.tp else 0.0
    return mota, motp


def mostly_tracked(frames_present, frames_matched,
                   coverage: float = MT_COVERAGE) -> float:
    """Fraction (in [0,1]) of GT objects matched in >= 80% of their frames."""
    if not frames_present:
        return 0.0
    mt = sum(1 for obj, present in frames_present.items()
             if frames_matched.get(obj, 0) >= coverage * present)
    return mt / len(frames_present)


@dataclass(frozen=True)
class OperatingPoint:
    recall_target: float
    threshold: float | None   # None when no threshold reaches the target
    recall: float
    mota: float
    motp: float
    smota: float
    tp: int
    fp: int
    fn: int
    idsw: int

    def to_dict(self) -> dict:
        return {
            "recall_target": self.recall_target,
            "threshold": self.threshold,
            "recall": self.recall,
            "mota": self.mota,
            "motp": self.motp,
            "smota": self.smota,
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "idsw": self.idsw,
        }


@dataclass(frozen=True)
class MetricsReport:
    """Headline percentages plus the per-recall operating points."""

    amota: float
    amotp: float
    samota: float
    mota: float
    motp: float
    mt: float
    operating_points: tuple

    def to_dict(self) -> dict:
        return {
            "amota": self.amota,
            "amotp": self.amotp,
            "samota": self.samota,
            "mota": self.mota,
            "motp": self.motp,
            "mt": self.mt,
            "operating_points": [p.to_dict() for p in self.operating_points],
        }

    def format_table(self, label: str = "run") -> str:
        header = f"{'Method':<24}{'AMOTA (%)':>11}{'AMOTP (%)':>11}{'sAMOTA (%)':>12}{'MT (%)':>9}"
        row = (f"{label:<24}{self.amota:>11.2f}{self.amotp:>11.2f}"
               f"{self.samota:>12.2f}{self.mt:>9.2f}")
        return header + "\n" + row


def _smota(fp, fn, idsw, gt_total, recall_target):
    value = 1.0 - (fp + fn + idsw - (1.0 - recall_target) * gt_total) \
        / (recall_target * gt_total)
    return min(1.0, max(0.0, value))


def amota_family(gt_frames, pred_frames,
                 num_thresholds: int = DEFAULT_NUM_THRESHOLDS,
                 iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> MetricsReport:
    """Average MOTA/MOTP/sMOTA over evenly spaced recall targets.

    For each target r = k/num_thresholds the score threshold achieving
    recall >= r with the fewest predictions is selected (the highest such
    threshold); targets no threshold can reach contribute zero.
    """
    gt_total = sum(len(f) for f in gt_frames)
    if gt_total == 0:
        raise NoGroundTruth("sequence has no ground-truth boxes")

    gt_prep, pred_prep = _prepare(gt_frames, pred_frames)
    full = _evaluate_prepared(gt_prep, pred_prep, None, iou_threshold)

    # Scan candidate thresholds from the highest score down, assigning each
    # recall target the first (fewest-prediction) threshold that reaches
    # it. Recall grows as the threshold drops, so the scan stops once every
    # target up to the full-prediction recall has been assigned.
    scores = sorted({p[2] for frame in pred_frames for p in frame}, reverse=True)
    targets = [k / num_thresholds for k in range(1, num_thresholds + 1)]
    needed = {k for k, t in enumerate(targets) if t <= full.recall}
    chosen = {}
    for s in scores:
        tally = _evaluate_prepared(gt_prep, pred_prep, s, iou_threshold)
        for k, target in enumerate(targets):
            if k not in chosen and tally.recall >= target:
                chosen[k] = (s, tally)
        if needed <= chosen.keys():
            break

    points = []
    amota_sum = amotp_sum = samota_sum = 0.0
    for k, target in enumerate(targets):
        if k not in chosen:
            points.append(OperatingPoint(target, None, 0.0, 0.0, 0.0, 0.0,
                                         0, 0, 0, 0))
            continue
        s, tally = chosen[k]
        mota, motp = mota_motp(tally.totals)
        smota = _smota(tally.totals.fp, tally.totals.fn, tally.totals.idsw,
                       gt_total, target)
        amota_sum += mota
        amotp_sum += motp
        samota_sum += smota
        points.append(OperatingPoint(target, s, tally.recall, mota, motp, smota,
                                     tally.totals.tp, tally.totals.fp,
                                     tally.totals.fn, tally.totals.idsw))

    mota, motp = mota_motp(full.totals)
    mt = mostly_tracked(full.frames_present, full.frames_matched)

    return MetricsReport(
        amota=100.0 * amota_sum / num_thresholds,
        amotp=100.0 * amotp_sum / num_thresholds,
        samota=100.0 * samota_sum / num_thresholds,
        mota=100.0 * mota,
        motp=100.0 * motp,
        mt=100.0 * mt,
        operating_points=tuple(points),
    )
