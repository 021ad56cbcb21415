"""Littering and cleaning detection from person-litter overlap dynamics.

A littering event fires when a sustained person-litter contact ends (the
intersection area drops to zero and stays there) while the two centroids
separate. A cleaning event fires when contact begins and the litter is then
lifted or lowered by a significant vertical shift. Person boxes are expanded
by a configurable margin before overlap is measured.

The detectors operate on any objects exposing `track_id`, `class_label` and a
`history` mapping of frame to TrackPoint; tracker.Tracklet qualifies.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import expand, intersection_area

__all__ = [
    "LITTERING",
    "CLEANING",
    "DEFAULT_LITTER_CLASSES",
    "EventConfig",
    "EventRecord",
    "OverlapSeries",
    "overlap_series",
    "detect_littering",
    "detect_cleaning",
    "attribute_offender",
    "detect_events",
    "StreamingEventDetector",
    "BoxTrack",
]

LITTERING = "littering"
CLEANING = "cleaning"

DEFAULT_LITTER_CLASSES = frozenset(
    {
        "bottle",
        "handbag",
        "backpack",
        "umbrella",
        "banana",
        "apple",
        "cup",
        "book",
        "wallet",
        "suitcase",
        "orange",
        "sports_ball",
        "bowl",
    }
)


@dataclass(frozen=True)
class EventConfig:
    zero_area_epsilon: float = 1.0
    separation_window: int = 15
    min_separation_slope: float = 1.0
    min_contact_frames: int = 5
    vertical_shift_min: float = 15.0
    debounce_frames: int = 5
    person_box_margin: float = 5.0
    person_class: str = "person"
    litter_classes: frozenset[str] = DEFAULT_LITTER_CLASSES

    def __post_init__(self) -> None:
        numeric = (
            self.zero_area_epsilon,
            self.separation_window,
            self.min_separation_slope,
            self.min_contact_frames,
            self.vertical_shift_min,
            self.debounce_frames,
        )
        if any(v <= 0 for v in numeric):
            raise ValueError("event thresholds must all be positive")


@dataclass(frozen=True)
class EventRecord:
    kind: str
    frame: int
    litter_track: int
    person_track: int | None = None
    identity: str | None = None
    confidence: float = 1.0
    attributed: bool = False


@dataclass
class OverlapSeries:
    """Per-frame overlap geometry of one (person, litter) track pair."""

    person_track: int
    litter_track: int
    frames: np.ndarray  # int, increasing; co-visible frames only
    area: np.ndarray  # intersection of expanded person box with litter box
    centroid_distance: np.ndarray
    litter_centroid_y: np.ndarray

    def __len__(self) -> int:
        return len(self.frames)


def overlap_series(person, litter, cfg: EventConfig | None = None) -> OverlapSeries | None:
    """Overlap record for every frame where both tracks have a box.

    Returns None when the tracks share no frames. The person box is expanded
    by `person_box_margin` before intersecting (the expansion leaves the
    centroid unchanged).
    """
    cfg = cfg or EventConfig()
    common = sorted(set(person.history) & set(litter.history))
    if not common:
        return None
    frames = np.array(common, dtype=int)
    area = np.empty(len(common))
    dist = np.empty(len(common))
    litter_y = np.empty(len(common))
    for k, f in enumerate(common):
        pbox = expand(person.history[f].box, cfg.person_box_margin)
        lbox = litter.history[f].box
        area[k] = intersection_area(pbox, lbox)
        pc = pbox.center
        lc = lbox.center
        dist[k] = float(np.hypot(pc[0] - lc[0], pc[1] - lc[1]))
        litter_y[k] = lc[1]
    return OverlapSeries(person.track_id, litter.track_id, frames, area, dist, litter_y)


def _segments(frames: np.ndarray) -> list[tuple[int, int]]:
    """Half-open index ranges of consecutive-frame runs."""
    if len(frames) == 0:
        return []
    breaks = np.where(np.diff(frames) != 1)[0]
    starts = [0, *(breaks + 1)]
    ends = [*(breaks + 1), len(frames)]
    return list(zip(starts, ends))


def _slope(values: np.ndarray) -> float:
    """Least-squares slope over unit-spaced samples."""
    n = len(values)
    if n < 2:
        return 0.0
    t = np.arange(n, dtype=float)
    t -= t.mean()
    return float(t @ (values - values.mean()) / (t @ t))


def detect_littering(series: OverlapSeries, cfg: EventConfig | None = None) -> list[EventRecord]:
    """Events where sustained contact ends and the centroids separate.

    The rule at index k: the area exceeded epsilon for at least
    `min_contact_frames` consecutive frames immediately before, stays at or
    below epsilon for the `debounce_frames` window starting at k (truncated
    at the end of the series), and the centroid distance grows over the next
    `separation_window` frames with slope at least `min_separation_slope`.
    Confidence is the slope ratio scaled by window coverage, capped at 1.
    """
    cfg = cfg or EventConfig()
    eps = cfg.zero_area_epsilon
    events: list[EventRecord] = []
    for lo, hi in _segments(series.frames):
        contact = 0
        for k in range(lo, hi):
            if series.area[k] > eps:
                contact += 1
                continue
            if contact >= cfg.min_contact_frames:
                zero_win = series.area[k : min(k + cfg.debounce_frames, hi)]
                sep_win = series.centroid_distance[k : min(k + cfg.separation_window, hi)]
                slope = _slope(sep_win)
                if np.all(zero_win <= eps) and slope >= cfg.min_separation_slope:
                    coverage = len(sep_win) / cfg.separation_window
                    confidence = min(1.0, slope / cfg.min_separation_slope * coverage)
                    events.append(
                        EventRecord(
                            kind=LITTERING,
                            frame=int(series.frames[k]),
                            litter_track=series.litter_track,
                            person_track=series.person_track,
                            confidence=confidence,
                        )
                    )
            contact = 0
    return events


def detect_cleaning(series: OverlapSeries, cfg: EventConfig | None = None) -> list[EventRecord]:
    """Events where contact begins and the litter shifts vertically.

    The rule at index k: the area transitions from at most epsilon to above
    epsilon, and within the next `separation_window` frames the litter
    centroid moves vertically by at least `vertical_shift_min` from its
    position at contact.
    """
    cfg = cfg or EventConfig()
    eps = cfg.zero_area_epsilon
    events: list[EventRecord] = []
    for lo, hi in _segments(series.frames):
        for k in range(lo + 1, hi):
            if not (series.area[k - 1] <= eps < series.area[k]):
                continue
            window = series.litter_centroid_y[k : min(k + cfg.separation_window, hi)]
            shift = float(np.abs(window - series.litter_centroid_y[k]).max())
            if shift >= cfg.vertical_shift_min:
                confidence = min(1.0, shift / cfg.vertical_shift_min / 2.0 + 0.5)
                events.append(
                    EventRecord(
                        kind=CLEANING,
                        frame=int(series.frames[k]),
                        litter_track=series.litter_track,
                        person_track=series.person_track,
                        confidence=confidence,
                    )
                )
    return events


def _contact_integral(person, litter, before_frame: int, cfg: EventConfig) -> float:
    """Total expanded-box intersection area over frames strictly before an event."""
    total = 0.0
    for f in person.history.keys() & litter.history.keys():
        if f >= before_frame:
            continue
        total += intersection_area(
            expand(person.history[f].box, cfg.person_box_margin), litter.history[f].box
        )
    return total


def attribute_offender(
    event: EventRecord,
    persons,
    litter,
    cfg: EventConfig | None = None,
    identity: str | None = None,
) -> EventRecord:
    """Attach the person with the largest pre-event contact integral.

    Cleaning events attribute by contact up to the end of the window after
    contact begins (the actor touches the litter at and after the event
    frame); littering events attribute strictly before the separation frame.
    Without any positive-contact person the event is returned unattributed.
    """
    cfg = cfg or EventConfig()
    horizon = event.frame if event.kind == LITTERING else event.frame + cfg.separation_window
    best_id: int | None = None
    best = 0.0
    for person in sorted(persons, key=lambda p: p.track_id):
        weight = _contact_integral(person, litter, horizon, cfg)
        if weight > best:
            best = weight
            best_id = person.track_id
    if best_id is None:
        return replace(event, person_track=None, attributed=False, identity=None)
    return replace(event, person_track=best_id, attributed=True, identity=identity)


def _dedupe(events: list[EventRecord]) -> list[EventRecord]:
    """One event per (litter track, kind): earliest frame, then best confidence."""
    events = sorted(
        events, key=lambda e: (e.litter_track, e.kind, e.frame, -e.confidence, e.person_track or 0)
    )
    kept: dict[tuple[int, str], EventRecord] = {}
    for event in events:
        kept.setdefault((event.litter_track, event.kind), event)
    return sorted(kept.values(), key=lambda e: (e.frame, e.litter_track, e.kind))


def detect_events(tracks, cfg: EventConfig | None = None) -> list[EventRecord]:
    """Run both detectors over all (person, litter) pairs and attribute.

    Duplicate candidates for the same litter track and kind are suppressed,
    keeping the earliest. Attribution picks the person with the largest
    pre-event contact integral, which may differ from the pair that fired.
    """
    cfg = cfg or EventConfig()
    persons = sorted(
        (t for t in tracks if t.class_label == cfg.person_class), key=lambda t: t.track_id
    )
    litters = sorted(
        (t for t in tracks if t.class_label in cfg.litter_classes), key=lambda t: t.track_id
    )
    results: list[EventRecord] = []
    for litter in litters:
        candidates: list[EventRecord] = []
        for person in persons:
            series = overlap_series(person, litter, cfg)
            if series is None:
                continue
            candidates.extend(detect_littering(series, cfg))
            candidates.extend(detect_cleaning(series, cfg))
        for event in _dedupe(candidates):
            results.append(attribute_offender(event, persons, litter, cfg))
    return sorted(results, key=lambda e: (e.frame, e.litter_track, e.kind))


@dataclass
class BoxTrack:
    """Minimal track carrier for the detectors: id, class, box history."""

    track_id: int
    class_label: str
    history: dict


class StreamingEventDetector:
    """Incremental event detection over a growing stream of tracked boxes.

    Feed every frame with `push`; events are emitted exactly once, as soon as
    the windows that decide them are complete. The emitted set over a whole
    stream equals `detect_events` on the final tracks: the rule is a pure
    function of the prefix, and the per-(litter, kind) suppression keeps the
    earliest candidate in both modes.
    """

    def __init__(self, cfg: EventConfig | None = None) -> None:
        self.cfg = cfg or EventConfig()
        self._tracks: dict[int, BoxTrack] = {}
        self._emitted: set[tuple[int, str]] = set()
        self._last_frame: int | None = None

    def push(self, frame: int, boxes) -> list[EventRecord]:
        """Add one frame of (track_id, class_label, TrackPoint-or-box) rows.

        Returns the events newly decided by this frame.
        """
        from .tracker import TrackPoint  # local import to avoid cycle at module load

        if self._last_frame is not None and frame <= self._last_frame:
            raise ValueError(f"frame {frame} not after {self._last_frame}")
        self._last_frame = frame
        for track_id, class_label, point in boxes:
            if not isinstance(point, TrackPoint):
                point = TrackPoint(point)
            track = self._tracks.setdefault(track_id, BoxTrack(track_id, class_label, {}))
            track.history[frame] = point
        return self._emit_ready(final=False)

    def finish(self) -> list[EventRecord]:
        """Flush events whose windows were truncated by the end of the stream."""
        return self._emit_ready(final=True)

    def _emit_ready(self, final: bool) -> list[EventRecord]:
        cfg = self.cfg
        horizon = max(cfg.debounce_frames, cfg.separation_window)
        fresh: list[EventRecord] = []
        for event in detect_events(list(self._tracks.values()), cfg):
            key = (event.litter_track, event.kind)
            if key in self._emitted:
                continue
            decided = final or (
                self._last_frame is not None and event.frame + horizon <= self._last_frame
            )
            if decided:
                self._emitted.add(key)
                fresh.append(event)
        return fresh
