"""Fused motion+appearance assignment between detections and tracklets.

Costs combine squared Mahalanobis distance in measurement space with cosine
distance between appearance embeddings; either term can be gated. The solver
is a dense Jonker-Volgenant shortest-augmenting-path assignment, exact and
deterministic, returning the minimum-cost matching of maximum feasible
cardinality.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .geometry import to_measurement
from . import ukf

__all__ = [
    "AssociationConfig",
    "CostMatrix",
    "Assignment",
    "cosine_distance",
    "build_cost_matrix",
    "hungarian",
]

# 0.95 chi-square quantile for 4 degrees of freedom: gate on the squared
# Mahalanobis distance of the 4-dim measurement innovation.
CHI2_GATE_4DOF = 9.4877


@dataclass(frozen=True)
class AssociationConfig:
    lambda_m: float = 0.5
    lambda_a: float = 0.5
    motion_gate: float = CHI2_GATE_4DOF
    appearance_gate: float = 0.4
    infeasible_cost: float = 1e5

    def __post_init__(self) -> None:
        if self.lambda_m < 0 or self.lambda_a < 0 or self.lambda_m + self.lambda_a <= 0:
            raise ValueError("weights must be nonnegative and not both zero")
        if self.motion_gate <= 0 or self.appearance_gate <= 0:
            raise ValueError("gates must be positive")


@dataclass
class CostMatrix:
    """Detection-by-tracklet costs plus feasibility mask (rows = detections)."""

    costs: np.ndarray
    feasible: np.ndarray
    sentinel: float = 1e5

    def __post_init__(self) -> None:
        self.costs = np.asarray(self.costs, dtype=float)
        self.feasible = np.asarray(self.feasible, dtype=bool)
        if self.costs.shape != self.feasible.shape or self.costs.ndim != 2:
            raise DataError("costs and feasibility mask must be equal 2-d shapes")
        if not np.all(np.isfinite(self.costs[self.feasible])):
            raise DataError("feasible costs must be finite")


@dataclass(frozen=True)
class Assignment:
    """Matched (detection, tracklet) index pairs plus leftovers on both sides."""

    matches: tuple[tuple[int, int], ...]
    unmatched_detections: tuple[int, ...]
    unmatched_tracklets: tuple[int, ...]


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cosine similarity, in [0, 2]."""
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if u.shape != v.shape:
        raise DataError(f"embedding dimensions differ: {u.shape[0]} vs {v.shape[0]}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DataError("cosine distance undefined for zero vectors")
    return float(np.clip(1.0 - u @ v / (nu * nv), 0.0, 2.0))


def build_cost_matrix(
    tracklets,
    detections,
    cfg: AssociationConfig,
    params: ukf.UkfParams = ukf.DEFAULT_PARAMS,
    model: ukf.TransitionModel = ukf.CONSTANT_VELOCITY,
) -> CostMatrix:
    """C[i, j] = lambda_m * d_m(i, j) + lambda_a * d_a(i, j).

    d_m is the squared Mahalanobis distance of detection i's measurement from
    tracklet j's predicted measurement; d_a the cosine distance between the
    detection embedding and the tracklet appearance. Pairs beyond either gate
    are marked infeasible and set to the sentinel. When appearance is absent
    on either side of a pair (or lambda_a == 0) the pair's cost falls back to
    plain d_m.
    """
    n_det = len(detections)
    n_trk = len(tracklets)
    costs = np.full((n_det, n_trk), cfg.infeasible_cost)
    feasible = np.zeros((n_det, n_trk), dtype=bool)
    if n_det == 0 or n_trk == 0:
        return CostMatrix(costs, feasible, cfg.infeasible_cost)

    z = np.empty((n_det, ukf.MEAS_DIM))
    for i, det in enumerate(detections):
        m = to_measurement(det.box)
        z[i] = (m.cx, m.cy, m.aspect, m.h)
    embeddings = [getattr(det, "embedding", None) for det in detections]
    use_appearance = cfg.lambda_a > 0.0

    for j, trk in enumerate(tracklets):
        projection = getattr(trk, "projection", None)
        if projection is None:
            projection = ukf.project(trk.state, params, model)
        d_m = projection.squared_mahalanobis(z)
        ok = d_m <= cfg.motion_gate
        appearance = getattr(trk, "appearance", None) if use_appearance else None
        for i in range(n_det):
            if not ok[i]:
                continue
            if appearance is not None and embeddings[i] is not None:
                d_a = cosine_distance(embeddings[i], appearance)
                if d_a > cfg.appearance_gate:
                    continue
                costs[i, j] = cfg.lambda_m * d_m[i] + cfg.lambda_a * d_a
            else:
                costs[i, j] = d_m[i]
            feasible[i, j] = True
    return CostMatrix(costs, feasible, cfg.infeasible_cost)


def _solve_dense(cost: np.ndarray) -> np.ndarray:
    """Jonker-Volgenant shortest augmenting paths; rows <= cols, all finite.

    Returns col4row, the column matched to each row, for the exact
    minimum-cost perfect matching of the rows. Deterministic: rows are
    augmented in index order and ties fall to the lowest column index.
    """
    n_rows, n_cols = cost.shape
    u = np.zeros(n_rows)
    v = np.zeros(n_cols)
    col4row = np.full(n_rows, -1, dtype=np.intp)
    row4col = np.full(n_cols, -1, dtype=np.intp)
    for cur_row in range(n_rows):
        shortest = np.full(n_cols, np.inf)
        pred_row = np.full(n_cols, cur_row, dtype=np.intp)
        done = np.zeros(n_cols, dtype=bool)
        sink = -1
        i = cur_row
        lowest = 0.0
        while sink == -1:
            d = lowest + cost[i] - u[i] - v
            better = (d < shortest) & ~done
            shortest[better] = d[better]
            pred_row[better] = i
            candidates = np.where(done, np.inf, shortest)
            j = int(np.argmin(candidates))
            lowest = candidates[j]
            done[j] = True
            if row4col[j] == -1:
                sink = j
            else:
                i = row4col[j]
        u[cur_row] += lowest
        done[sink] = False  # potentials update covers scanned columns only
        rows_touched = row4col[done]
        u[rows_touched] += lowest - shortest[done]
        v[done] += shortest[done] - lowest
        j = sink
        while True:
            i = pred_row[j]
            row4col[j] = i
            col4row[i], j = j, col4row[i]
            if i == cur_row:
                break
    return col4row


def hungarian(cost: CostMatrix) -> Assignment:
    """Minimum-cost assignment over feasible pairs at maximum cardinality.

    Infeasible pairs never appear in the output; if nothing is feasible the
    matching is empty. All-empty dimensions are handled trivially.
    """
    n_det, n_trk = cost.costs.shape
    if n_det == 0 or n_trk == 0 or not cost.feasible.any():
        return Assignment(
            (), tuple(range(n_det)), tuple(range(n_trk))
        )
    # Replace infeasible entries with a finite cost so large that the solver
    # first maximizes the number of feasible pairs, then minimizes their cost.
    # A shift keeps the argument valid for negative feasible entries.
    feasible_values = cost.costs[cost.feasible]
    shift = min(0.0, float(feasible_values.min()))
    big = (min(n_det, n_trk) + 1.0) * (float(feasible_values.max()) - shift + 1.0)
    work = np.where(cost.feasible, cost.costs - shift, big)
    transposed = n_det > n_trk
    if transposed:
        work = work.T
    col4row = _solve_dense(work)
    matches = []
    for r, c in enumerate(col4row):
        i, j = (int(c), r) if transposed else (r, int(c))
        if cost.feasible[i, j]:
            matches.append((i, j))
    matches.sort()
    matched_det = {i for i, _ in matches}
    matched_trk = {j for _, j in matches}
    return Assignment(
        tuple(matches),
        tuple(i for i in range(n_det) if i not in matched_det),
        tuple(j for j in range(n_trk) if j not in matched_trk),
    )
