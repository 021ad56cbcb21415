"""Offline track refinement.

Two stages, both optional and config-gated:

* linking: temporally disjoint tracklets of the same class are merged when a
  constant-velocity extrapolation of the earlier tracklet lands close to the
  start of the later one (an appearance-free link score);
* Gaussian-smoothed interpolation (GSI): interior detection gaps are filled
  by Gaussian-process regression of each box coordinate over the frame index.

Linking runs before interpolation so that the gaps created by a merge get
filled too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericsError
from .geometry import BoundingBox
from .tracker import TrackPoint, Tracklet

__all__ = [
    "GsiConfig",
    "AflinkConfig",
    "rbf_kernel",
    "gsi_interpolate",
    "aflink_score",
    "link_tracklets",
]

_MIN_EXTENT = 1e-3  # floor for interpolated widths/heights


@dataclass(frozen=True)
class GsiConfig:
    """Gap interpolation settings.

    `signal_variance` is the kernel amplitude (prior variance of each
    coordinate, px^2); it cancels exactly when `noise_variance` is zero and
    otherwise keeps the zero-mean prior's shrinkage of pixel-scale values
    negligible.
    """

    length_scale: float = 10.0
    noise_variance: float = 0.25
    max_gap: int = 30
    signal_variance: float = 1e4

    def __post_init__(self) -> None:
        if self.length_scale <= 0:
            raise ValueError("length_scale must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")
        if self.max_gap < 1:
            raise ValueError("max_gap must be >= 1")


@dataclass(frozen=True)
class AflinkConfig:
    """Appearance-free tracklet-link settings.

    `max_prediction_error` is a multiple of the earlier tracklet's terminal
    box height: the link score reaches 0 when the extrapolated center misses
    the later tracklet's first center by that many heights.
    """

    max_frame_gap: int = 30
    max_prediction_error: float = 1.0
    min_tracklet_length: int = 3
    score_threshold: float = 0.3

    def __post_init__(self) -> None:
        if self.max_frame_gap < 1:
            raise ValueError("max_frame_gap must be >= 1")


def rbf_kernel(x1, x2, length_scale: float):
    """Unit-amplitude squared-exponential kernel exp(-(x1-x2)^2 / (2 l^2))."""
    if length_scale <= 0:
        raise ValueError("length_scale must be positive")
    diff = np.subtract(x1, x2)
    return np.exp(-(diff**2) / (2.0 * length_scale**2))


def _solve_kernel(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (gram) x = rhs by Cholesky with escalating jitter."""
    jitter = 0.0
    eye = np.eye(gram.shape[0])
    while True:
        try:
            factor = cho_factor(gram + jitter * eye, lower=True)
            return cho_solve(factor, rhs)
        except np.linalg.LinAlgError:
            if jitter == 0.0:
                jitter = 1e-9
            elif jitter >= 1e-5:
                raise NumericsError("kernel matrix singular despite jitter escalation")
            else:
                jitter *= 10.0


def _gp_predict(
    train_x: np.ndarray, train_y: np.ndarray, query_x: np.ndarray, cfg: GsiConfig
) -> np.ndarray:
    """Zero-mean GP posterior mean at query_x; train_y may have columns."""
    gram = cfg.signal_variance * rbf_kernel(
        train_x[:, None], train_x[None, :], cfg.length_scale
    )
    gram += cfg.noise_variance * np.eye(len(train_x))
    weights = _solve_kernel(gram, train_y)
    cross = cfg.signal_variance * rbf_kernel(
        query_x[:, None], train_x[None, :], cfg.length_scale
    )
    return cross @ weights


def gsi_interpolate(track: Tracklet, cfg: GsiConfig | None = None) -> Tracklet:
    """Fill interior detection gaps of at most `max_gap` missing frames.

    Observed entries are preserved verbatim; filled entries are flagged
    interpolated. Each box coordinate (left, top, width, height) is regressed
    independently over the frame index, training on the observed frames
    within three length scales of the gap. Tracks with fewer than two
    observed frames are returned unchanged.
    """
    cfg = cfg or GsiConfig()
    result = track.copy()
    observed = track.observed_frames()
    if len(observed) < 2:
        return result
    frames = np.array(observed, dtype=float)
    coords = np.array(
        [
            (p.left, p.top, p.width, p.height)
            for p in (track.history[f].box for f in observed)
        ]
    )
    radius = 3.0 * cfg.length_scale
    for a, b in zip(observed, observed[1:]):
        gap = b - a - 1
        if gap < 1 or gap > cfg.max_gap:
            continue
        window = (frames >= a - radius) & (frames <= b + radius)
        queries = np.arange(a + 1, b, dtype=float)
        predicted = _gp_predict(frames[window], coords[window], queries, cfg)
        for frame, (left, top, width, height) in zip(range(a + 1, b), predicted):
            box = BoundingBox(
                left, top, max(width, _MIN_EXTENT), max(height, _MIN_EXTENT)
            )
            result.history[frame] = TrackPoint(box, interpolated=True)
    result.history = result.sorted_history()
    return result


def _terminal_velocity(track: Tracklet, fit_frames: int = 5) -> tuple[float, float]:
    """Least-squares center velocity over the last few observed frames."""
    observed = track.observed_frames()[-fit_frames:]
    if len(observed) < 2:
        return (0.0, 0.0)
    t = np.array(observed, dtype=float)
    centers = np.array([track.history[f].box.center for f in observed])
    t = t - t.mean()
    denom = float(t @ t)
    vx = float(t @ (centers[:, 0] - centers[:, 0].mean())) / denom
    vy = float(t @ (centers[:, 1] - centers[:, 1].mean())) / denom
    return (vx, vy)


def aflink_score(
    t1: Tracklet, t2: Tracklet, cfg: AflinkConfig | None = None
) -> float | None:
    """Link plausibility of t2 continuing t1, in [0, 1]; None when ineligible.

    t1's terminal constant-velocity estimate is extrapolated to t2's first
    frame; the score decays linearly with the center prediction error,
    measured in units of `max_prediction_error` times t1's terminal box
    height. Pairs are ineligible when they overlap in time, the frame gap
    exceeds `max_frame_gap`, classes differ, or t1 is too short to estimate
    a velocity.
    """
    cfg = cfg or AflinkConfig()
    if t1.class_label != t2.class_label:
        return None
    gap = t2.first_frame - t1.last_frame
    if gap < 1 or gap > cfg.max_frame_gap:
        return None
    if len(t1.observed_frames()) < cfg.min_tracklet_length:
        return None
    last_frame = t1.last_frame
    last_box = t1.history[last_frame].box
    vx, vy = _terminal_velocity(t1)
    cx, cy = last_box.center
    predicted = (cx + vx * gap, cy + vy * gap)
    first_box = t2.history[t2.first_frame].box
    error = math.hypot(
        predicted[0] - first_box.center[0], predicted[1] - first_box.center[1]
    )
    allowed = cfg.max_prediction_error * last_box.height
    if allowed <= 0:
        return None
    return max(0.0, min(1.0, 1.0 - error / allowed))


def _merge(first: Tracklet, second: Tracklet) -> Tracklet:
    merged = first.copy()
    merged.history.update(second.sorted_history())
    merged.history = merged.sorted_history()
    merged.hits = first.hits + second.hits
    merged.age = max(first.age, second.age)
    merged.state = second.state.copy()
    if second.appearance is not None:
        merged.appearance = second.appearance.copy()
    return merged


def link_tracklets(
    tracks: list[Tracklet], cfg: AflinkConfig | None = None
) -> list[Tracklet]:
    """Greedy highest-score-first merge of eligible tracklet pairs.

    Each tracklet is used at most once as a predecessor and once as a
    successor, so chains merge transitively; a merged track keeps the
    earliest id. Output is sorted by id.
    """
    cfg = cfg or AflinkConfig()
    scored: list[tuple[float, int, int]] = []
    for i, t1 in enumerate(tracks):
        for j, t2 in enumerate(tracks):
            if i == j:
                continue
            score = aflink_score(t1, t2, cfg)
            if score is not None and score >= cfg.score_threshold:
                scored.append((score, tracks[i].track_id, tracks[j].track_id))
    scored.sort(key=lambda s: (-s[0], s[1], s[2]))

    by_id = {t.track_id: t for t in tracks}
    successor: dict[int, int] = {}
    has_predecessor: set[int] = set()
    for _, id1, id2 in scored:
        if id1 in successor or id2 in has_predecessor:
            continue
        successor[id1] = id2
        has_predecessor.add(id2)

    merged: list[Tracklet] = []
    heads = [t for t in tracks if t.track_id not in has_predecessor]
    for head in sorted(heads, key=lambda t: t.track_id):
        chain = head.copy()
        cursor = head.track_id
        while cursor in successor:
            cursor = successor[cursor]
            chain = _merge(chain, by_id[cursor])
        merged.append(chain)
    return merged
