"""Seeded synthetic scenarios: ground-truth tracks, events, and detections.

A scenario scripts persons moving along waypoint splines or constant-turn
arcs (always nonlinear in the standard suites), litter drops (a carried phase,
a short ballistic arc, then rest) and cleanup pickups (rest, contact, lift).
Ground-truth event frames are derived from the generated geometry with the
event detector's default thresholds, so a noise-free run of the full pipeline
reproduces them.

Detections are ground-truth boxes with optional jitter, dropout, false
positives, and region occlusions; embeddings are unit vectors drawn per
object identity with a configurable angular noise. Everything is a pure
function of (spec, seed).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DataError
from .events import CLEANING, LITTERING, EventConfig, EventRecord
from .geometry import BoundingBox, expand, intersection_area
from .tracker import Detection

__all__ = [
    "MotionScript",
    "LitterDropSpec",
    "CleanupSpec",
    "NoiseSpec",
    "OcclusionSpec",
    "ScenarioSpec",
    "GroundTruth",
    "SimulationResult",
    "generate",
    "standard_suite",
    "SUITE_PROFILES",
]

PERSON_CLASS = "person"
LITTER_SIZE = (18.0, 22.0)
CARRY_OFFSET = (0.30, 0.08)  # fraction of person box (width, height)
GROUND_OFFSET = 0.30  # rest depth below person center, fraction of height
ARC_FRAMES = 18  # drop arc duration; long enough for gate-friendly accelerations
CLEARANCE_DIST = 75.0  # min center distance of bystanders from carried/resting litter
LIFT_FRAMES = 12
MIN_IDENTITY_ANGLE = math.radians(30.0)

SUITE_PROFILES = ("noise-free", "default-noise", "occlusion-heavy")


@dataclass(frozen=True)
class MotionScript:
    """One person's movement: a waypoint spline or a constant-turn arc."""

    kind: str  # "spline" | "turn"
    box_size: tuple[float, float]
    waypoints: tuple[tuple[float, float], ...] = ()
    # fractions of the scenario at which each waypoint is reached; empty = uniform
    waypoint_times: tuple[float, ...] = ()
    start: tuple[float, float] = (0.0, 0.0)
    heading: float = 0.0
    speed: float = 0.0
    turn_rate: float = 0.0


@dataclass(frozen=True)
class LitterDropSpec:
    person: int
    drop_frame: int
    litter_class: str = "bottle"
    carry_frames: int = 25


@dataclass(frozen=True)
class CleanupSpec:
    person: int
    pickup_frame: int
    litter_class: str = "bottle"
    appear_frame: int = 1
    rest_position: tuple[float, float] | None = None  # default: pickup point


@dataclass(frozen=True)
class NoiseSpec:
    box_jitter_std: float = 0.0
    dropout_prob: float = 0.0
    false_positive_rate: float = 0.0  # expected false boxes per frame
    embedding_noise_angle_std: float = 0.0  # radians


@dataclass(frozen=True)
class OcclusionSpec:
    start_frame: int
    end_frame: int
    region: tuple[float, float, float, float]  # left, top, width, height

    def hides(self, frame: int, cx: float, cy: float) -> bool:
        left, top, width, height = self.region
        return (
            self.start_frame <= frame <= self.end_frame
            and left <= cx <= left + width
            and top <= cy <= top + height
        )


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    seed: int
    frame_count: int
    arena: tuple[float, float] = (960.0, 540.0)
    persons: tuple[MotionScript, ...] = ()
    litter_events: tuple[LitterDropSpec, ...] = ()
    cleaning_events: tuple[CleanupSpec, ...] = ()
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    occlusions: tuple[OcclusionSpec, ...] = ()
    embedding_dim: int = 512


@dataclass
class GroundTruth:
    """True tracks, classes, events, and person identities of a scenario."""

    tracks: dict[int, dict[int, BoundingBox]]
    classes: dict[int, str]
    events: list[EventRecord]
    identities: dict[int, str]

    def frame_lists(self) -> dict[int, list[tuple[int, BoundingBox]]]:
        by_frame: dict[int, list[tuple[int, BoundingBox]]] = {}
        for track_id in sorted(self.tracks):
            for frame, box in self.tracks[track_id].items():
                by_frame.setdefault(frame, []).append((track_id, box))
        return dict(sorted(by_frame.items()))

    def rows(self) -> list[tuple[int, int, BoundingBox]]:
        return [
            (frame, track_id, box)
            for frame, rows in self.frame_lists().items()
            for track_id, box in rows
        ]

    def as_box_tracks(self) -> list:
        """The true tracks as event-detector inputs."""
        from .events import BoxTrack
        from .tracker import TrackPoint

        return [
            BoxTrack(
                track_id,
                self.classes[track_id],
                {f: TrackPoint(b) for f, b in sorted(self.tracks[track_id].items())},
            )
            for track_id in sorted(self.tracks)
        ]


@dataclass
class SimulationResult:
    spec: ScenarioSpec
    truth: GroundTruth
    detections: dict[int, list[Detection]]
    gallery: dict[str, np.ndarray]


def _validate(spec: ScenarioSpec) -> None:
    bad: list[str] = []
    if spec.frame_count < 1:
        bad.append("frame_count")
    if spec.arena[0] <= 0 or spec.arena[1] <= 0:
        bad.append("arena")
    noise = spec.noise
    if not 0.0 <= noise.dropout_prob <= 1.0:
        bad.append("noise.dropout_prob")
    if noise.box_jitter_std < 0 or noise.false_positive_rate < 0:
        bad.append("noise")
    if noise.embedding_noise_angle_std < 0:
        bad.append("noise.embedding_noise_angle_std")
    for i, script in enumerate(spec.persons):
        if script.kind not in ("spline", "turn"):
            bad.append(f"persons[{i}].kind")
        if script.kind == "spline" and len(script.waypoints) < 2:
            bad.append(f"persons[{i}].waypoints")
        if script.waypoint_times:
            times = script.waypoint_times
            if len(times) != len(script.waypoints) or any(
                b <= a for a, b in zip(times, times[1:])
            ):
                bad.append(f"persons[{i}].waypoint_times")
        if script.box_size[0] <= 0 or script.box_size[1] <= 0:
            bad.append(f"persons[{i}].box_size")
    for i, drop in enumerate(spec.litter_events):
        if not 0 <= drop.person < len(spec.persons):
            bad.append(f"litter_events[{i}].person")
        if not 2 <= drop.drop_frame <= spec.frame_count:
            bad.append(f"litter_events[{i}].drop_frame")
        if drop.carry_frames < 1:
            bad.append(f"litter_events[{i}].carry_frames")
    for i, pickup in enumerate(spec.cleaning_events):
        if not 0 <= pickup.person < len(spec.persons):
            bad.append(f"cleaning_events[{i}].person")
        if not 2 <= pickup.pickup_frame <= spec.frame_count:
            bad.append(f"cleaning_events[{i}].pickup_frame")
        if pickup.appear_frame < 1 or pickup.appear_frame >= pickup.pickup_frame:
            bad.append(f"cleaning_events[{i}].appear_frame")
    for i, occ in enumerate(spec.occlusions):
        if occ.end_frame < occ.start_frame:
            bad.append(f"occlusions[{i}]")
    if bad:
        raise DataError(f"inconsistent scenario spec, offending fields: {', '.join(bad)}")


def _person_centers(
    script: MotionScript, frame_count: int, arena: tuple[float, float]
) -> np.ndarray:
    """Per-frame (x, y) centers, clipped so the box stays inside the arena."""
    t = np.arange(frame_count, dtype=float)
    if script.kind == "spline":
        if script.waypoint_times:
            knots = np.asarray(script.waypoint_times, dtype=float) * (frame_count - 1.0)
        else:
            knots = np.linspace(0.0, frame_count - 1.0, len(script.waypoints))
        points = np.asarray(script.waypoints, dtype=float)
        if len(script.waypoints) == 2:
            x = np.interp(t, knots, points[:, 0])
            y = np.interp(t, knots, points[:, 1])
        else:
            x = CubicSpline(knots, points[:, 0], bc_type="natural")(t)
            y = CubicSpline(knots, points[:, 1], bc_type="natural")(t)
    else:
        omega = script.turn_rate
        theta0 = script.heading
        if abs(omega) < 1e-9:
            x = script.start[0] + script.speed * t * math.cos(theta0)
            y = script.start[1] + script.speed * t * math.sin(theta0)
        else:
            x = script.start[0] + script.speed / omega * (
                np.sin(theta0 + omega * t) - math.sin(theta0)
            )
            y = script.start[1] - script.speed / omega * (
                np.cos(theta0 + omega * t) - math.cos(theta0)
            )
    half_w = script.box_size[0] / 2.0
    half_h = script.box_size[1] / 2.0
    centers = np.stack(
        [
            np.clip(x, half_w, arena[0] - half_w),
            np.clip(y, half_h, arena[1] - half_h),
        ],
        axis=1,
    )
    return centers


def _box_at(center: tuple[float, float], size: tuple[float, float]) -> BoundingBox:
    return BoundingBox(center[0] - size[0] / 2.0, center[1] - size[1] / 2.0, size[0], size[1])


def _carry_center(person_center: np.ndarray, box_size: tuple[float, float]) -> tuple[float, float]:
    return (
        float(person_center[0] + CARRY_OFFSET[0] * box_size[0]),
        float(person_center[1] + CARRY_OFFSET[1] * box_size[1]),
    )


def _clip_center(
    cx: float, cy: float, size: tuple[float, float], arena: tuple[float, float]
) -> tuple[float, float]:
    return (
        float(np.clip(cx, size[0] / 2.0, arena[0] - size[0] / 2.0)),
        float(np.clip(cy, size[1] / 2.0, arena[1] - size[1] / 2.0)),
    )


def _hermite(u: float, p0: float, v0: float, p1: float, v1: float, span: float) -> float:
    """Cubic Hermite interpolation with endpoint velocities, u in [0, 1]."""
    u2 = u * u
    u3 = u2 * u
    return (
        (2 * u3 - 3 * u2 + 1) * p0
        + (u3 - 2 * u2 + u) * span * v0
        + (-2 * u3 + 3 * u2) * p1
        + (u3 - u2) * span * v1
    )


def _drop_litter_path(
    spec: ScenarioSpec, drop: LitterDropSpec, person_centers: np.ndarray
) -> dict[int, BoundingBox]:
    """Carried with the person, released into a short tossed arc, then rest.

    The arc is velocity-continuous at release and at landing so the motion
    stays within what the constant-velocity filter tolerates for a small box.
    """
    size = LITTER_SIZE
    person_size = spec.persons[drop.person].box_size
    path: dict[int, BoundingBox] = {}
    first = max(1, drop.drop_frame - drop.carry_frames)
    for frame in range(first, drop.drop_frame):
        center = _carry_center(person_centers[frame - 1], person_size)
        path[frame] = _box_at(_clip_center(*center, size, spec.arena), size)
    release = _carry_center(person_centers[drop.drop_frame - 1], person_size)
    if drop.drop_frame >= 2:
        velocity = person_centers[drop.drop_frame - 1] - person_centers[drop.drop_frame - 2]
    else:
        velocity = np.zeros(2)
    rest = _clip_center(
        release[0] + float(velocity[0]) * ARC_FRAMES * 0.45,
        release[1] + GROUND_OFFSET * person_size[1],
        size,
        spec.arena,
    )
    for frame in range(drop.drop_frame, spec.frame_count + 1):
        u = min(1.0, (frame - drop.drop_frame) / float(ARC_FRAMES))
        cx = _hermite(u, release[0], float(velocity[0]), rest[0], 0.0, ARC_FRAMES)
        cy = _hermite(u, release[1], float(velocity[1]), rest[1], 0.0, ARC_FRAMES)
        path[frame] = _box_at(_clip_center(cx, cy, size, spec.arena), size)
    return path


def _cleanup_litter_path(
    spec: ScenarioSpec, pickup: CleanupSpec, person_centers: np.ndarray
) -> dict[int, BoundingBox]:
    """At rest until touched, lifted to the carry position, then carried."""
    size = LITTER_SIZE
    person_size = spec.persons[pickup.person].box_size
    if pickup.rest_position is not None:
        rest = pickup.rest_position
    else:
        anchor = person_centers[pickup.pickup_frame - 1]
        rest = (float(anchor[0]), float(anchor[1]) + GROUND_OFFSET * person_size[1])
    rest = _clip_center(rest[0], rest[1], size, spec.arena)
    path: dict[int, BoundingBox] = {}
    for frame in range(pickup.appear_frame, spec.frame_count + 1):
        if frame < pickup.pickup_frame:
            center = rest
        else:
            target = _carry_center(person_centers[frame - 1], person_size)
            u = min(1.0, (frame - pickup.pickup_frame) / float(LIFT_FRAMES))
            blend = u * u * (3.0 - 2.0 * u)  # smoothstep: starts and ends at rest
            center = (
                rest[0] + (target[0] - rest[0]) * blend,
                rest[1] + (target[1] - rest[1]) * blend,
            )
        path[frame] = _box_at(_clip_center(*center, size, spec.arena), size)
    return path


def _first_separation_frame(
    person: dict[int, BoundingBox],
    litter: dict[int, BoundingBox],
    start: int,
    cfg: EventConfig,
) -> int | None:
    for frame in sorted(f for f in litter if f >= start):
        if frame not in person:
            return None
        area = intersection_area(expand(person[frame], cfg.person_box_margin), litter[frame])
        if area <= cfg.zero_area_epsilon:
            return frame
    return None


def _contact_start_frame(
    person: dict[int, BoundingBox],
    litter: dict[int, BoundingBox],
    pickup_frame: int,
    cfg: EventConfig,
) -> int | None:
    """Walk back from the pickup to the frame where contact began."""
    frame = pickup_frame
    start = None
    while frame in person and frame in litter:
        area = intersection_area(expand(person[frame], cfg.person_box_margin), litter[frame])
        if area <= cfg.zero_area_epsilon:
            break
        start = frame
        frame -= 1
    return start


def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        vec = rng.standard_normal(dim)
        norm = np.linalg.norm(vec)
        if norm > 1e-9:
            return vec / norm


def _separated_bases(rng: np.random.Generator, count: int, dim: int) -> list[np.ndarray]:
    """Unit vectors with pairwise angle at least MIN_IDENTITY_ANGLE."""
    max_cos = math.cos(MIN_IDENTITY_ANGLE)
    bases: list[np.ndarray] = []
    while len(bases) < count:
        candidate = _random_unit(rng, dim)
        if all(abs(float(candidate @ b)) <= max_cos for b in bases):
            bases.append(candidate)
    return bases


def _noisy_embedding(
    rng: np.random.Generator, base: np.ndarray, angle_std: float
) -> np.ndarray:
    angle = abs(rng.normal(0.0, angle_std)) if angle_std > 0 else 0.0
    direction = rng.standard_normal(base.shape[0])
    direction -= float(direction @ base) * base
    norm = np.linalg.norm(direction)
    if angle == 0.0 or norm < 1e-9:
        return base.copy()
    return math.cos(angle) * base + math.sin(angle) * (direction / norm)


def _jittered_box(
    rng: np.random.Generator, box: BoundingBox, std: float
) -> BoundingBox:
    offsets = rng.normal(0.0, std, size=4) if std > 0 else np.zeros(4)
    return BoundingBox(
        box.left + offsets[0],
        box.top + offsets[1],
        max(box.width + offsets[2], 4.0),
        max(box.height + offsets[3], 4.0),
    )


def _ground_truth(spec: ScenarioSpec, cfg: EventConfig) -> GroundTruth:
    """Tracks, classes, identities, and true event frames (no detections)."""
    person_paths = [
        _person_centers(script, spec.frame_count, spec.arena) for script in spec.persons
    ]
    tracks: dict[int, dict[int, BoundingBox]] = {}
    classes: dict[int, str] = {}
    identities: dict[int, str] = {}
    for i, script in enumerate(spec.persons):
        gt_id = i + 1
        tracks[gt_id] = {
            frame: _box_at(tuple(person_paths[i][frame - 1]), script.box_size)
            for frame in range(1, spec.frame_count + 1)
        }
        classes[gt_id] = PERSON_CLASS
        identities[gt_id] = f"person{gt_id:02d}"

    events: list[EventRecord] = []
    next_id = len(spec.persons) + 1
    for k, drop in enumerate(spec.litter_events):
        litter_id = next_id
        next_id += 1
        path = _drop_litter_path(spec, drop, person_paths[drop.person])
        tracks[litter_id] = path
        classes[litter_id] = drop.litter_class
        event_frame = _first_separation_frame(
            tracks[drop.person + 1], path, drop.drop_frame, cfg
        )
        if event_frame is None:
            raise DataError(
                f"litter_events[{k}]: drop never separates from the person; "
                "adjust the drop frame or the person's path"
            )
        events.append(
            EventRecord(
                kind=LITTERING,
                frame=event_frame,
                litter_track=litter_id,
                person_track=drop.person + 1,
                identity=identities[drop.person + 1],
                attributed=True,
            )
        )
    for k, pickup in enumerate(spec.cleaning_events):
        litter_id = next_id
        next_id += 1
        path = _cleanup_litter_path(spec, pickup, person_paths[pickup.person])
        tracks[litter_id] = path
        classes[litter_id] = pickup.litter_class
        event_frame = _contact_start_frame(
            tracks[pickup.person + 1], path, pickup.pickup_frame, cfg
        )
        if event_frame is None:
            raise DataError(
                f"cleaning_events[{k}]: the person never reaches the litter; "
                "adjust the pickup frame or the person's path"
            )
        events.append(
            EventRecord(
                kind=CLEANING,
                frame=event_frame,
                litter_track=litter_id,
                person_track=pickup.person + 1,
                identity=identities[pickup.person + 1],
                attributed=True,
            )
        )
    events.sort(key=lambda e: (e.frame, e.litter_track))
    return GroundTruth(tracks, classes, events, identities)


def generate(spec: ScenarioSpec, event_cfg: EventConfig | None = None) -> SimulationResult:
    """Build ground truth, the detection stream, and identity embeddings.

    Deterministic per (spec, seed). Ground-truth event frames are the frames
    at which the generated geometry first shows the detection signature
    (separation for drops, contact for pickups) under `event_cfg`.
    """
    _validate(spec)
    cfg = event_cfg or EventConfig()
    rng = np.random.default_rng(spec.seed)
    truth = _ground_truth(spec, cfg)
    tracks, classes, identities = truth.tracks, truth.classes, truth.identities

    bases = _separated_bases(rng, len(tracks), spec.embedding_dim)
    base_by_id = {gt_id: bases[i] for i, gt_id in enumerate(sorted(tracks))}
    gallery = {
        identities[gt_id]: base_by_id[gt_id].copy() for gt_id in sorted(identities)
    }

    noise = spec.noise
    detections: dict[int, list[Detection]] = {}
    for frame in range(1, spec.frame_count + 1):
        rows: list[Detection] = []
        for gt_id in sorted(tracks):
            box = tracks[gt_id].get(frame)
            if box is None:
                continue
            if rng.random() < noise.dropout_prob:
                continue
            cx, cy = box.center
            if any(occ.hides(frame, cx, cy) for occ in spec.occlusions):
                continue
            rows.append(
                Detection(
                    frame=frame,
                    box=_jittered_box(rng, box, noise.box_jitter_std),
                    confidence=float(rng.uniform(0.6, 1.0)),
                    class_label=classes[gt_id],
                    embedding=_noisy_embedding(
                        rng, base_by_id[gt_id], noise.embedding_noise_angle_std
                    ),
                )
            )
        for _ in range(int(rng.poisson(noise.false_positive_rate))):
            width = float(rng.uniform(15.0, 60.0))
            height = float(rng.uniform(25.0, 120.0))
            left = float(rng.uniform(0.0, spec.arena[0] - width))
            top = float(rng.uniform(0.0, spec.arena[1] - height))
            label_pool = (PERSON_CLASS, "bottle", "cup", "handbag")
            rows.append(
                Detection(
                    frame=frame,
                    box=BoundingBox(left, top, width, height),
                    confidence=float(rng.uniform(0.3, 0.7)),
                    class_label=label_pool[int(rng.integers(len(label_pool)))],
                    embedding=_random_unit(rng, spec.embedding_dim),
                )
            )
        detections[frame] = rows

    return SimulationResult(spec, truth, detections, gallery)


# --- standard suites ---------------------------------------------------------

_SUITE_SEEDS = {"noise-free": 1000, "default-noise": 2000, "occlusion-heavy": 3000}
_SUITE_SIZES = {"noise-free": 10, "default-noise": 20, "occlusion-heavy": 20}


def _drop_clearance(
    paths: list[np.ndarray], dropper: int, drop_frame: int, carry: int, frame_count: int
) -> float:
    """Worst-case distance from other persons to the carried litter and its rest point."""
    rest = paths[dropper][min(drop_frame + 10, frame_count) - 1]
    margin = math.inf
    for other, path in enumerate(paths):
        if other == dropper:
            continue
        lo = max(0, drop_frame - carry - 1)
        hi = min(frame_count, drop_frame + 25)
        window = path[lo:hi] - paths[dropper][lo:hi]
        margin = min(margin, float(np.hypot(window[:, 0], window[:, 1]).min()))
        tail = path[min(drop_frame, frame_count) - 1 :]
        tail_dist = float(np.hypot(tail[:, 0] - rest[0], tail[:, 1] - rest[1]).min())
        margin = min(margin, tail_dist / 0.85)
    return margin


def _pickup_clearance(
    paths: list[np.ndarray], collector: int, pickup_frame: int, appear_frame: int
) -> float:
    """Clearance of the rest point from everyone (and the collector's early path)."""
    rest = paths[collector][pickup_frame - 1]
    margin = math.inf
    for other, path in enumerate(paths):
        if other == collector:
            continue
        dist = np.hypot(path[:, 0] - rest[0], path[:, 1] - rest[1])
        margin = min(margin, float(dist.min()))
    # the collector itself must only arrive once, shortly before the pickup
    early = paths[collector][appear_frame - 1 : max(appear_frame, pickup_frame - 20) - 1]
    if len(early):
        approach = float(np.hypot(early[:, 0] - rest[0], early[:, 1] - rest[1]).min())
        margin = min(margin, approach * CLEARANCE_DIST / 45.0)
    return margin


@functools.lru_cache(maxsize=None)
def _build_scenario(profile: str, index: int) -> ScenarioSpec:
    """Deterministic scenario for a suite slot.

    Layouts that cannot host cleanly recoverable events (overcrowded scenes)
    are retried with a derived seed; the retry chain is part of the suite
    definition, so the result is still fixed.
    """
    for attempt in range(8):
        try:
            return _assemble_scenario(profile, index, attempt)
        except DataError:
            continue
    raise DataError(f"could not build a clean {profile} scenario for index {index}")


def _assemble_scenario(profile: str, index: int, attempt: int) -> ScenarioSpec:
    seed = _SUITE_SEEDS[profile] + index + attempt * 7919
    rng = np.random.default_rng(seed)
    frame_count = 150 if profile == "noise-free" else 200
    arena = (960.0, 540.0)
    max_persons = 4 if profile == "noise-free" else 6
    n_persons = int(rng.integers(2, max_persons + 1))
    cross = (
        arena[0] / 2.0 + float(rng.uniform(-80, 80)),
        arena[1] / 2.0 + float(rng.uniform(-60, 60)),
    )

    persons: list[MotionScript] = []
    for i in range(n_persons):
        height = float(rng.uniform(95.0, 130.0))
        width = height * float(rng.uniform(0.32, 0.42))
        if i >= 2 and rng.random() < 0.25:
            persons.append(
                MotionScript(
                    kind="turn",
                    box_size=(width, height),
                    start=(float(rng.uniform(180, 780)), float(rng.uniform(140, 400))),
                    heading=float(rng.uniform(0.0, 2.0 * math.pi)),
                    speed=float(rng.uniform(1.8, 3.0)),
                    turn_rate=float(rng.uniform(-0.018, 0.018)),
                )
            )
            continue
        left_to_right = i % 2 == 0
        x0 = 40.0 + width if left_to_right else arena[0] - 40.0 - width
        x1 = arena[0] - 40.0 - width if left_to_right else 40.0 + width
        y0 = float(rng.uniform(110.0, 430.0))
        y1 = float(rng.uniform(110.0, 430.0))
        mid = (
            cross[0] + float(rng.uniform(-30.0, 30.0)),
            cross[1] + float(rng.uniform(-25.0, 25.0)),
        )
        # persons 0 and 1 meet at the crossing; later ones pass it staggered
        if i == 0:
            mid_time = 0.48
        elif i == 1:
            mid_time = 0.52
        else:
            mid_time = 0.25 + 0.5 * float(rng.uniform(0.0, 1.0))
        persons.append(
            MotionScript(
                kind="spline",
                box_size=(width, height),
                waypoints=((x0, y0), mid, (x1, y1)),
                waypoint_times=(0.0, mid_time, 1.0),
            )
        )

    paths = [_person_centers(p, frame_count, arena) for p in persons]
    litter_classes = ("bottle", "cup", "handbag", "banana", "backpack")
    n_drops = int(rng.integers(1, 4))
    drops: list[LitterDropSpec] = []
    order = list(rng.permutation(n_persons))
    candidate_frames = [int(f) for f in rng.permutation(np.arange(40, frame_count - 45))]
    occlusions: list[OcclusionSpec] = []
    if profile == "occlusion-heavy":
        mid_frame = frame_count // 2
        length = int(rng.integers(16, 25))
        size = (float(rng.uniform(150, 220)), float(rng.uniform(190, 260)))
        occlusions.append(
            OcclusionSpec(
                start_frame=mid_frame - length // 2,
                end_frame=mid_frame - length // 2 + length - 1,
                region=(
                    cross[0] - size[0] / 2.0,
                    cross[1] - size[1] / 2.0,
                    size[0],
                    size[1],
                ),
            )
        )
        if rng.random() < 0.5 and n_persons >= 2:
            victim = int(rng.integers(n_persons))
            at = int(frame_count * 0.75)
            length = int(rng.integers(33, 41))
            center = paths[victim][at - 1 + length // 2]
            occlusions.append(
                OcclusionSpec(
                    start_frame=at,
                    end_frame=at + length - 1,
                    region=(
                        float(center[0]) - 70.0,
                        float(center[1]) - 100.0,
                        140.0,
                        200.0,
                    ),
                )
            )

    def conflicts_occlusion(frame: int) -> bool:
        return any(
            occ.start_frame - 30 <= frame <= occ.end_frame + 30 for occ in occlusions
        )

    def base_spec(drop_list, cleanup_list) -> ScenarioSpec:
        return ScenarioSpec(
            name=f"{profile}-{index:02d}",
            seed=seed,
            frame_count=frame_count,
            arena=arena,
            persons=tuple(persons),
            litter_events=tuple(drop_list),
            cleaning_events=tuple(cleanup_list),
            occlusions=tuple(occlusions),
        )

    # Placement is verification-driven: candidates are ranked by how far the
    # carried litter stays from bystanders, then the first candidate whose
    # injected events are exactly recoverable from the true geometry wins.
    used_frames: list[int] = []
    for k in range(n_drops):
        ranked: list[tuple[float, int, int]] = []
        for offset in range(n_persons):
            dropper = int(order[(k + offset) % n_persons])
            for frame in candidate_frames:
                if any(abs(frame - f) < 35 for f in used_frames):
                    continue
                if conflicts_occlusion(frame):
                    continue
                clearance = _drop_clearance(paths, dropper, frame, 25, frame_count)
                ranked.append((clearance, frame, dropper))
        ranked.sort(key=lambda c: (-c[0], c[1], c[2]))
        for clearance, frame, dropper in ranked[:120]:
            candidate = LitterDropSpec(
                person=dropper,
                drop_frame=frame,
                litter_class=litter_classes[k % len(litter_classes)],
                carry_frames=25,
            )
            if _events_recoverable(base_spec(drops + [candidate], [])):
                drops.append(candidate)
                used_frames.append(frame)
                break

    cleanups: list[CleanupSpec] = []
    if profile != "noise-free" and index % 3 == 0 and n_persons >= 2 and drops:
        collector = int(order[-1])
        ranked_pickups: list[tuple[float, int]] = []
        for frame in candidate_frames:
            if any(abs(frame - f) < 35 for f in used_frames):
                continue
            if conflicts_occlusion(frame):
                continue
            appear = max(1, frame - 60)
            ranked_pickups.append((_pickup_clearance(paths, collector, frame, appear), frame))
        ranked_pickups.sort(key=lambda c: (-c[0], c[1]))
        for clearance, frame in ranked_pickups[:25]:
            candidate = CleanupSpec(
                person=collector,
                pickup_frame=frame,
                litter_class="suitcase",
                appear_frame=max(1, frame - 60),
            )
            if _events_recoverable(base_spec(drops, [candidate])):
                cleanups.append(candidate)
                used_frames.append(frame)
                break

    if profile == "noise-free":
        noise = NoiseSpec()
    elif profile == "default-noise":
        noise = NoiseSpec(
            box_jitter_std=1.0,
            dropout_prob=0.05,
            false_positive_rate=0.3,
            embedding_noise_angle_std=math.radians(8.0),
        )
    else:
        noise = NoiseSpec(
            box_jitter_std=1.0,
            dropout_prob=0.03,
            false_positive_rate=0.2,
            embedding_noise_angle_std=math.radians(8.0),
        )

    spec = replace(base_spec(drops, cleanups), noise=noise)
    if not drops or not _events_recoverable(spec):
        raise DataError(f"suite scenario {spec.name} cannot produce clean events")
    return spec


def _events_recoverable(spec: ScenarioSpec) -> bool:
    """True when the injected events are exactly what the detector recovers."""
    from .events import detect_events

    try:
        truth = _ground_truth(spec, EventConfig())
    except DataError:
        return False
    detected = detect_events(truth.as_box_tracks())
    want = {(e.kind, e.litter_track, e.frame, e.person_track) for e in truth.events}
    got = {(e.kind, e.litter_track, e.frame, e.person_track) for e in detected}
    return want == got


def standard_suite(profile: str) -> list[tuple[ScenarioSpec, GroundTruth]]:
    """The fixed seeded scenario suite for a profile, with its ground truth."""
    if profile not in SUITE_PROFILES:
        raise DataError(f"unknown suite profile {profile!r}; choose from {SUITE_PROFILES}")
    out: list[tuple[ScenarioSpec, GroundTruth]] = []
    for index in range(_SUITE_SIZES[profile]):
        spec = _build_scenario(profile, index)
        out.append((spec, generate(spec).truth))
    return out
