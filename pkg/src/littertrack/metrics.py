"""MOT evaluation: CLEAR (MOTA), identity measures (IDF1), and HOTA.

Definitions follow the community standards. CLEAR matches per frame with a
continuity preference: correspondences from the previous frame are kept while
they still meet the IoU threshold, the remainder is matched by the Hungarian
solver maximizing total IoU; identity switches are counted against the last
known correspondence of each ground-truth track. IDF1 solves one global
track-to-track assignment maximizing frame matches. HOTA averages detection
and association accuracy over IoU thresholds alpha = 0.05..0.95.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .association import Assignment, CostMatrix, hungarian
from .errors import DataError, UndefinedMetricError
from .events import EventRecord
from .geometry import BoundingBox, iou

__all__ = [
    "LabeledFrameSet",
    "MetricReport",
    "ClearResult",
    "HotaResult",
    "EventScore",
    "evaluate_clear",
    "evaluate_idf1",
    "evaluate_hota",
    "evaluate",
    "dominant_track_mapping",
    "evaluate_events",
]

HOTA_ALPHAS = np.arange(1, 20) * 0.05
_EPS = np.finfo(float).eps


@dataclass
class LabeledFrameSet:
    """Per-frame (track id, box) lists for ground truth and predictions."""

    ground_truth: dict[int, list[tuple[int, BoundingBox]]]
    predictions: dict[int, list[tuple[int, BoundingBox]]]

    def __post_init__(self) -> None:
        for side in (self.ground_truth, self.predictions):
            for frame, rows in side.items():
                for track_id, _ in rows:
                    if track_id < 1:
                        raise DataError(
                            f"track ids must be positive, got {track_id} at frame {frame}"
                        )

    @classmethod
    def from_rows(cls, gt_rows, pred_rows) -> "LabeledFrameSet":
        """Build from flat (frame, track_id, box) iterables."""

        def collect(rows):
            by_frame: dict[int, list[tuple[int, BoundingBox]]] = {}
            for frame, track_id, box in rows:
                by_frame.setdefault(int(frame), []).append((int(track_id), box))
            return {f: sorted(v, key=lambda r: r[0]) for f, v in sorted(by_frame.items())}

        return cls(collect(gt_rows), collect(pred_rows))

    def frames(self) -> list[int]:
        return sorted(set(self.ground_truth) | set(self.predictions))

    def num_gt(self) -> int:
        return sum(len(v) for v in self.ground_truth.values())

    def num_pred(self) -> int:
        return sum(len(v) for v in self.predictions.values())


@dataclass(frozen=True)
class ClearResult:
    mota: float
    tp: int
    fp: int
    fn: int
    idsw: int
    num_gt: int


@dataclass(frozen=True)
class HotaResult:
    hota: float
    det_a: float
    ass_a: float
    per_alpha: tuple[tuple[float, float, float, float], ...] = ()
    # rows of (alpha, hota_alpha, det_a_alpha, ass_a_alpha)


@dataclass(frozen=True)
class MetricReport:
    mota: float
    idf1: float
    hota: float
    ass_a: float
    det_a: float
    tp: int
    fp: int
    fn: int
    idsw: int
    num_gt: int

    def to_mapping(self) -> dict[str, float | int]:
        return {
            "metrics.mota": self.mota,
            "metrics.idf1": self.idf1,
            "metrics.hota": self.hota,
            "metrics.ass_a": self.ass_a,
            "metrics.det_a": self.det_a,
            "metrics.tp": self.tp,
            "metrics.fp": self.fp,
            "metrics.fn": self.fn,
            "metrics.idsw": self.idsw,
            "metrics.num_gt": self.num_gt,
        }

    def table(self) -> str:
        head = f"{'MOTA':>8} {'IDF1':>8} {'HOTA':>8} {'AssA':>8} {'DetA':>8} {'IDSW':>6}"
        row = (
            f"{self.mota * 100:8.2f} {self.idf1 * 100:8.2f} {self.hota * 100:8.2f} "
            f"{self.ass_a * 100:8.2f} {self.det_a * 100:8.2f} {self.idsw:6d}"
        )
        return head + "\n" + row


def _iou_matrix(gts, preds) -> np.ndarray:
    mat = np.zeros((len(gts), len(preds)))
    for gi, (_, gbox) in enumerate(gts):
        for pi, (_, pbox) in enumerate(preds):
            mat[gi, pi] = iou(gbox, pbox)
    return mat


def _match_max_similarity(similarity: np.ndarray, feasible: np.ndarray) -> Assignment:
    """Hungarian matching maximizing total similarity over feasible pairs."""
    if similarity.size == 0:
        return hungarian(CostMatrix(similarity, feasible))
    costs = float(similarity.max()) - similarity
    return hungarian(CostMatrix(costs, feasible))


def evaluate_clear(data: LabeledFrameSet, iou_threshold: float = 0.5) -> ClearResult:
    """CLEAR-MOT counts and MOTA = 1 - (FN + FP + IDSW) / GT boxes."""
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError("iou_threshold must be in (0, 1)")
    num_gt = data.num_gt()
    if num_gt == 0:
        raise UndefinedMetricError("CLEAR metrics undefined without ground truth")
    tp = fp = fn = idsw = 0
    previous: dict[int, int] = {}  # gt id -> pred id matched in the previous frame
    last_known: dict[int, int] = {}  # gt id -> most recent matched pred id
    for frame in data.frames():
        gts = data.ground_truth.get(frame, [])
        preds = data.predictions.get(frame, [])
        matches: dict[int, int] = {}
        if gts and preds:
            sim = _iou_matrix(gts, preds)
            pred_index = {pid: pi for pi, (pid, _) in enumerate(preds)}
            used_g: set[int] = set()
            used_p: set[int] = set()
            # continuity: keep yesterday's pairs that still clear the threshold
            for gi, (gid, _) in enumerate(gts):
                pid = previous.get(gid)
                if pid is None or pid not in pred_index:
                    continue
                pi = pred_index[pid]
                if sim[gi, pi] >= iou_threshold and pi not in used_p:
                    matches[gid] = pid
                    used_g.add(gi)
                    used_p.add(pi)
            rest_g = [gi for gi in range(len(gts)) if gi not in used_g]
            rest_p = [pi for pi in range(len(preds)) if pi not in used_p]
            if rest_g and rest_p:
                sub = sim[np.ix_(rest_g, rest_p)]
                assignment = _match_max_similarity(sub, sub >= iou_threshold)
                for gi_local, pi_local in assignment.matches:
                    gid = gts[rest_g[gi_local]][0]
                    pid = preds[rest_p[pi_local]][0]
                    matches[gid] = pid
        tp += len(matches)
        fn += len(gts) - len(matches)
        fp += len(preds) - len(matches)
        for gid, pid in matches.items():
            if gid in last_known and last_known[gid] != pid:
                idsw += 1
            last_known[gid] = pid
        previous = matches
    mota = 1.0 - (fn + fp + idsw) / num_gt
    return ClearResult(mota, tp, fp, fn, idsw, num_gt)


def evaluate_idf1(data: LabeledFrameSet, iou_threshold: float = 0.5) -> float:
    """IDF1 from the globally optimal identity mapping between track sets."""
    num_gt = data.num_gt()
    if num_gt == 0:
        raise UndefinedMetricError("IDF1 undefined without ground truth")
    num_pred = data.num_pred()
    if num_pred == 0:
        return 0.0
    gt_ids = sorted({gid for rows in data.ground_truth.values() for gid, _ in rows})
    pred_ids = sorted({pid for rows in data.predictions.values() for pid, _ in rows})
    g_index = {g: i for i, g in enumerate(gt_ids)}
    p_index = {p: i for i, p in enumerate(pred_ids)}
    overlap = np.zeros((len(gt_ids), len(pred_ids)))
    for frame in data.frames():
        for gid, gbox in data.ground_truth.get(frame, []):
            for pid, pbox in data.predictions.get(frame, []):
                if iou(gbox, pbox) >= iou_threshold:
                    overlap[g_index[gid], p_index[pid]] += 1
    assignment = _match_max_similarity(overlap, np.ones_like(overlap, dtype=bool))
    idtp = sum(overlap[g, p] for g, p in assignment.matches)
    return float(2.0 * idtp / (num_gt + num_pred))


def evaluate_hota(data: LabeledFrameSet) -> HotaResult:
    """HOTA with DetA and AssA, averaged over 19 IoU thresholds.

    One matching per frame (maximizing global track alignment weighted by
    IoU) is thresholded at each alpha; per alpha, DetA = TP/(TP+FN+FP) and
    AssA averages TPA/(TPA+FNA+FPA) over the TPs.
    """
    num_gt = data.num_gt()
    if num_gt == 0:
        raise UndefinedMetricError("HOTA undefined without ground truth")
    gt_ids = sorted({gid for rows in data.ground_truth.values() for gid, _ in rows})
    pred_ids = sorted({pid for rows in data.predictions.values() for pid, _ in rows})
    g_index = {g: i for i, g in enumerate(gt_ids)}
    p_index = {p: i for i, p in enumerate(pred_ids)}
    n_g, n_p = len(gt_ids), len(pred_ids)
    gt_count = np.zeros(n_g)
    pred_count = np.zeros(n_p)
    potential = np.zeros((n_g, n_p))
    per_frame: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for frame in data.frames():
        gts = data.ground_truth.get(frame, [])
        preds = data.predictions.get(frame, [])
        g_rows = np.array([g_index[gid] for gid, _ in gts], dtype=int)
        p_cols = np.array([p_index[pid] for pid, _ in preds], dtype=int)
        sim = _iou_matrix(gts, preds)
        gt_count[g_rows] += 1
        pred_count[p_cols] += 1
        if len(gts) and len(preds):
            denom = sim.sum(axis=0)[None, :] + sim.sum(axis=1)[:, None] - sim
            ratio = np.divide(sim, denom, out=np.zeros_like(sim), where=denom > _EPS)
            potential[np.ix_(g_rows, p_cols)] += ratio
        per_frame.append((g_rows, p_cols, sim))
    alignment = potential / np.maximum(
        gt_count[:, None] + pred_count[None, :] - potential, _EPS
    )

    n_alpha = len(HOTA_ALPHAS)
    tp = np.zeros(n_alpha)
    fn = np.zeros(n_alpha)
    fp = np.zeros(n_alpha)
    match_counts = [np.zeros((n_g, n_p)) for _ in range(n_alpha)]
    for g_rows, p_cols, sim in per_frame:
        matched_sims: list[tuple[int, int, float]] = []
        if len(g_rows) and len(p_cols):
            score = alignment[np.ix_(g_rows, p_cols)] * sim
            assignment = _match_max_similarity(score, np.ones_like(score, dtype=bool))
            matched_sims = [
                (g_rows[gi], p_cols[pi], sim[gi, pi]) for gi, pi in assignment.matches
            ]
        for a, alpha in enumerate(HOTA_ALPHAS):
            hits = [(g, p) for g, p, s in matched_sims if s >= alpha - _EPS]
            tp[a] += len(hits)
            fn[a] += len(g_rows) - len(hits)
            fp[a] += len(p_cols) - len(hits)
            for g, p in hits:
                match_counts[a][g, p] += 1

    per_alpha: list[tuple[float, float, float, float]] = []
    for a, alpha in enumerate(HOTA_ALPHAS):
        det_a = tp[a] / max(tp[a] + fn[a] + fp[a], _EPS)
        counts = match_counts[a]
        union = gt_count[:, None] + pred_count[None, :] - counts
        pair_ass = np.divide(counts, union, out=np.zeros_like(counts), where=union > _EPS)
        ass_a = float((counts * pair_ass).sum() / max(tp[a], 1.0))
        hota_alpha = float(np.sqrt(det_a * ass_a))
        per_alpha.append((float(alpha), hota_alpha, float(det_a), ass_a))
    hota = float(np.mean([row[1] for row in per_alpha]))
    det_a = float(np.mean([row[2] for row in per_alpha]))
    ass_a = float(np.mean([row[3] for row in per_alpha]))
    return HotaResult(hota, det_a, ass_a, tuple(per_alpha))


def evaluate(data: LabeledFrameSet, iou_threshold: float = 0.5) -> MetricReport:
    """All five headline metrics plus CLEAR counts."""
    clear = evaluate_clear(data, iou_threshold)
    idf1 = evaluate_idf1(data, iou_threshold)
    hota = evaluate_hota(data)
    return MetricReport(
        mota=clear.mota,
        idf1=idf1,
        hota=hota.hota,
        ass_a=hota.ass_a,
        det_a=hota.det_a,
        tp=clear.tp,
        fp=clear.fp,
        fn=clear.fn,
        idsw=clear.idsw,
        num_gt=clear.num_gt,
    )


def dominant_track_mapping(data: LabeledFrameSet, min_iou: float = 0.3) -> dict[int, int]:
    """Map each prediction track id to the GT id it overlaps most, by total IoU."""
    totals: dict[int, dict[int, float]] = {}
    for frame in data.frames():
        for pid, pbox in data.predictions.get(frame, []):
            for gid, gbox in data.ground_truth.get(frame, []):
                value = iou(gbox, pbox)
                if value >= min_iou:
                    totals.setdefault(pid, {}).setdefault(gid, 0.0)
                    totals[pid][gid] += value
    mapping: dict[int, int] = {}
    for pid, per_gt in totals.items():
        mapping[pid] = max(sorted(per_gt), key=lambda gid: per_gt[gid])
    return mapping


@dataclass(frozen=True)
class EventScore:
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    matched: tuple[tuple[EventRecord, EventRecord], ...] = ()


def evaluate_events(
    predicted: list[EventRecord],
    truth: list[EventRecord],
    track_mapping: dict[int, int] | None = None,
    frame_tolerance: int = 2,
    kind: str | None = None,
) -> EventScore:
    """Match predicted events to ground-truth events.

    A predicted event matches a truth event of the same kind when its litter
    track (after applying `track_mapping`, if given) equals the truth litter
    track and the frames differ by at most `frame_tolerance`. Matching is
    greedy by frame distance; `kind` restricts scoring to one event kind.
    """
    if kind is not None:
        predicted = [e for e in predicted if e.kind == kind]
        truth = [e for e in truth if e.kind == kind]
    remapped = []
    for event in predicted:
        litter = (
            track_mapping.get(event.litter_track, -1)
            if track_mapping is not None
            else event.litter_track
        )
        remapped.append((event, litter))
    candidates = []
    for pi, (pred, litter) in enumerate(remapped):
        for ti, true in enumerate(truth):
            if pred.kind == true.kind and litter == true.litter_track:
                gap = abs(pred.frame - true.frame)
                if gap <= frame_tolerance:
                    candidates.append((gap, pi, ti))
    candidates.sort()
    used_p: set[int] = set()
    used_t: set[int] = set()
    matched: list[tuple[EventRecord, EventRecord]] = []
    for _, pi, ti in candidates:
        if pi in used_p or ti in used_t:
            continue
        used_p.add(pi)
        used_t.add(ti)
        matched.append((remapped[pi][0], truth[ti]))
    tp = len(matched)
    fp = len(remapped) - tp
    fn = len(truth) - tp
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    return EventScore(precision, recall, tp, fp, fn, tuple(matched))
