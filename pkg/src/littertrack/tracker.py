"""Frame-by-frame tracklet lifecycle: predict, associate, update, spawn, retire.

Detections of different class labels are associated independently, so a
person can never steal the identity of a litter object and vice versa. A
tracker instance is a single-writer state machine; run one instance per
sequence.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import association, ukf
from .errors import DataError, SequencingError
from .geometry import BoundingBox, to_measurement

__all__ = [
    "Detection",
    "TrackPoint",
    "TrackStatus",
    "Tracklet",
    "TrackerConfig",
    "TrackSnapshot",
    "Tracker",
    "update_appearance",
]


@dataclass(frozen=True)
class Detection:
    """One detector output: box, confidence, class, optional unit embedding."""

    frame: int
    box: BoundingBox
    confidence: float
    class_label: str = "person"
    embedding: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise DataError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.embedding is not None:
            emb = np.asarray(self.embedding, dtype=float).reshape(-1)
            norm = np.linalg.norm(emb)
            if norm == 0.0:
                raise DataError("detection embedding must be nonzero")
            object.__setattr__(self, "embedding", emb / norm)


@dataclass(frozen=True)
class TrackPoint:
    box: BoundingBox
    interpolated: bool = False


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DELETED = "deleted"


@dataclass
class Tracklet:
    """One tracked object: filter state, lifecycle counters, box history."""

    track_id: int
    state: ukf.MotionState
    class_label: str
    status: TrackStatus = TrackStatus.TENTATIVE
    hits: int = 1
    age: int = 1
    time_since_update: int = 0
    appearance: np.ndarray | None = None
    history: dict[int, TrackPoint] = field(default_factory=dict)
    # transient: predicted-measurement cache for the current frame
    projection: ukf.MeasurementProjection | None = None

    @property
    def first_frame(self) -> int:
        return min(self.history)

    @property
    def last_frame(self) -> int:
        return max(self.history)

    def observed_frames(self) -> list[int]:
        return sorted(f for f, p in self.history.items() if not p.interpolated)

    def sorted_history(self) -> dict[int, TrackPoint]:
        return {f: self.history[f] for f in sorted(self.history)}

    def copy(self) -> "Tracklet":
        return Tracklet(
            track_id=self.track_id,
            state=self.state.copy(),
            class_label=self.class_label,
            status=self.status,
            hits=self.hits,
            age=self.age,
            time_since_update=self.time_since_update,
            appearance=None if self.appearance is None else self.appearance.copy(),
            history=self.sorted_history(),
            projection=None,
        )


@dataclass(frozen=True)
class TrackerConfig:
    n_init: int = 3
    max_age: int = 30
    ema_alpha: float = 0.9
    min_confidence: float = 0.3
    association: association.AssociationConfig = field(
        default_factory=association.AssociationConfig
    )
    ukf: ukf.UkfParams = field(default_factory=ukf.UkfParams)

    def __post_init__(self) -> None:
        if self.n_init < 1 or self.max_age < 1:
            raise ValueError("n_init and max_age must be >= 1")
        if not 0.0 <= self.ema_alpha <= 1.0:
            raise ValueError("ema_alpha must be in [0, 1]")


@dataclass(frozen=True)
class TrackSnapshot:
    """Per-frame output row: a confirmed track observed at this frame."""

    track_id: int
    box: BoundingBox
    class_label: str


def update_appearance(
    track: Tracklet, embedding: np.ndarray, ema_alpha: float
) -> np.ndarray:
    """Exponential moving average of the appearance vector, renormalized.

    Returns the new unit appearance; a degenerate (zero) blend keeps the old
    vector.
    """
    emb = np.asarray(embedding, dtype=float).reshape(-1)
    if track.appearance is None:
        return emb / np.linalg.norm(emb)
    blended = ema_alpha * track.appearance + (1.0 - ema_alpha) * emb
    norm = np.linalg.norm(blended)
    if norm == 0.0:
        return track.appearance
    return blended / norm


class Tracker:
    """Stateful multi-object tracker over a single sequence."""

    def __init__(
        self,
        config: TrackerConfig | None = None,
        model: ukf.TransitionModel = ukf.CONSTANT_VELOCITY,
    ) -> None:
        self.config = config or TrackerConfig()
        self.model = model
        self.tracks: list[Tracklet] = []
        self._finished: list[Tracklet] = []
        self._next_id = 1
        self._last_frame: int | None = None

    def step(
        self, detections: list[Detection], frame: int | None = None
    ) -> list[TrackSnapshot]:
        """Advance one frame. Returns the confirmed tracks observed this frame."""
        frame = self._resolve_frame(detections, frame)
        cfg = self.config
        dt = 1.0 if self._last_frame is None else float(frame - self._last_frame)
        self._last_frame = frame

        for track in self.tracks:
            track.state = ukf.predict(track.state, cfg.ukf, self.model, dt)
            track.projection = ukf.project(track.state, cfg.ukf, self.model)
            track.age += 1

        detections = [d for d in detections if d.confidence >= cfg.min_confidence]
        matches, unmatched_dets, unmatched_trks = self._associate(detections)

        for det_idx, trk_idx in matches:
            det = detections[det_idx]
            track = self.tracks[trk_idx]
            track.state = ukf.update(
                track.state,
                to_measurement(det.box),
                cfg.ukf,
                self.model,
                projection=track.projection,
            )
            track.history[frame] = TrackPoint(det.box)
            track.hits += 1
            track.time_since_update = 0
            if det.embedding is not None:
                track.appearance = update_appearance(track, det.embedding, cfg.ema_alpha)
            if track.status is TrackStatus.TENTATIVE and track.hits >= cfg.n_init:
                track.status = TrackStatus.CONFIRMED

        retained: list[Tracklet] = [self.tracks[trk_idx] for _, trk_idx in matches]
        for trk_idx in unmatched_trks:
            track = self.tracks[trk_idx]
            track.time_since_update += 1
            if track.status is TrackStatus.TENTATIVE:
                track.status = TrackStatus.DELETED
            elif track.time_since_update > cfg.max_age:
                track.status = TrackStatus.DELETED
                self._finished.append(track)
            else:
                retained.append(track)

        for det_idx in unmatched_dets:
            retained.append(self._spawn(detections[det_idx], frame))

        retained.sort(key=lambda t: t.track_id)
        self.tracks = retained
        for track in self.tracks:
            track.projection = None

        return [
            TrackSnapshot(t.track_id, t.history[frame].box, t.class_label)
            for t in self.tracks
            if t.status is TrackStatus.CONFIRMED and t.time_since_update == 0
        ]

    def export_tracks(self) -> list[Tracklet]:
        """Copies of all confirmed tracklets (live or retired), sorted by id."""
        confirmed = [t for t in self.tracks if t.status is TrackStatus.CONFIRMED]
        confirmed.extend(self._finished)
        confirmed.sort(key=lambda t: t.track_id)
        return [t.copy() for t in confirmed]

    def _resolve_frame(self, detections: list[Detection], frame: int | None) -> int:
        frames = {d.frame for d in detections}
        if len(frames) > 1:
            raise SequencingError(f"detections span multiple frames: {sorted(frames)}")
        if frames:
            det_frame = frames.pop()
            if frame is not None and frame != det_frame:
                raise SequencingError(
                    f"explicit frame {frame} disagrees with detections at {det_frame}"
                )
            frame = det_frame
        if frame is None:
            frame = 1 if self._last_frame is None else self._last_frame + 1
        if self._last_frame is not None and frame <= self._last_frame:
            raise SequencingError(
                f"frame {frame} is not after previous frame {self._last_frame}"
            )
        return frame

    def _associate(
        self, detections: list[Detection]
    ) -> tuple[list[tuple[int, int]], list[int], list[int]]:
        """Associate per class label; returns global (det, trk) index pairs."""
        matches: list[tuple[int, int]] = []
        unmatched_dets: list[int] = []
        unmatched_trks: list[int] = []
        labels = sorted(
            {d.class_label for d in detections} | {t.class_label for t in self.tracks}
        )
        for label in labels:
            det_idx = [i for i, d in enumerate(detections) if d.class_label == label]
            trk_idx = [j for j, t in enumerate(self.tracks) if t.class_label == label]
            cost = association.build_cost_matrix(
                [self.tracks[j] for j in trk_idx],
                [detections[i] for i in det_idx],
                self.config.association,
                self.config.ukf,
                self.model,
            )
            result = association.hungarian(cost)
            matches.extend((det_idx[i], trk_idx[j]) for i, j in result.matches)
            unmatched_dets.extend(det_idx[i] for i in result.unmatched_detections)
            unmatched_trks.extend(trk_idx[j] for j in result.unmatched_tracklets)
        matches.sort()
        return matches, sorted(unmatched_dets), sorted(unmatched_trks)

    def _spawn(self, det: Detection, frame: int) -> Tracklet:
        track = Tracklet(
            track_id=self._next_id,
            state=ukf.initiate(to_measurement(det.box), self.config.ukf),
            class_label=det.class_label,
            appearance=None if det.embedding is None else det.embedding.copy(),
            history={frame: TrackPoint(det.box)},
        )
        self._next_id += 1
        if track.hits >= self.config.n_init:
            track.status = TrackStatus.CONFIRMED
        return track
