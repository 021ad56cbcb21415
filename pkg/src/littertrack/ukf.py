"""Unscented Kalman filtering for per-tracklet motion estimation.

The tracker state is the 8-vector (cx, cy, aspect, h, vcx, vcy, vaspect, vh):
box center, width/height ratio, height, and their per-frame velocities. The
sigma-point machinery itself is dimension-agnostic so nonlinear transition
models of any (even) dimension can reuse it.

Noise magnitudes follow the box height: position/size standard deviations are
`scale * h`, with small fixed constants for the dimensionless aspect terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericsError
from .geometry import Measurement

__all__ = [
    "STATE_DIM",
    "MEAS_DIM",
    "MotionState",
    "UkfParams",
    "TransitionModel",
    "CONSTANT_VELOCITY",
    "MeasurementProjection",
    "sigma_points",
    "predict",
    "project",
    "update",
    "mahalanobis",
    "initiate",
]

STATE_DIM = 8
MEAS_DIM = 4

# Floor applied to the aspect and height components after an update so the
# state always maps back to a valid box.
_POSITIVE_FLOOR = 1e-6


@dataclass
class MotionState:
    """Gaussian belief over a motion state: mean vector and covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        n = self.mean.shape[0]
        self.cov = np.asarray(self.cov, dtype=float).reshape(n, n)
        # keep the stored covariance exactly symmetric
        self.cov = 0.5 * (self.cov + self.cov.T)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def copy(self) -> "MotionState":
        return MotionState(self.mean.copy(), self.cov.copy())


@dataclass(frozen=True)
class UkfParams:
    """Unscented-transform scaling and height-relative noise scales."""

    alpha: float = 0.5
    beta: float = 2.0
    kappa: float | None = None  # None resolves to 3 - n
    process_pos_scale: float = 1.0 / 20.0
    process_vel_scale: float = 1.0 / 160.0
    process_aspect_std: float = 1e-2
    process_aspect_vel_std: float = 1e-5
    measurement_scale: float = 1.0 / 20.0
    measurement_aspect_std: float = 1e-1

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")

    def resolved_kappa(self, n: int) -> float:
        return 3.0 - n if self.kappa is None else self.kappa

    def scaling(self, n: int) -> float:
        """lambda = alpha^2 (n + kappa) - n; n + lambda must be nonzero."""
        lam = self.alpha**2 * (n + self.resolved_kappa(n)) - n
        if n + lam == 0.0:
            raise ValueError("degenerate unscented scaling: n + lambda == 0")
        return lam


DEFAULT_PARAMS = UkfParams()


@dataclass(frozen=True)
class TransitionModel:
    """State-transition and measurement functions.

    Both functions are vectorized over stacked states: `transition` maps an
    (k, n) array and a time step to an (k, n) array, `measurement` maps
    (k, n) to (k, m). They must be deterministic.
    """

    transition: Callable[[np.ndarray, float], np.ndarray]
    measurement: Callable[[np.ndarray], np.ndarray]


def _cv_transition(points: np.ndarray, dt: float) -> np.ndarray:
    half = points.shape[-1] // 2
    out = points.copy()
    out[..., :half] += dt * points[..., half:]
    return out


def _cv_measurement(points: np.ndarray) -> np.ndarray:
    half = points.shape[-1] // 2
    return points[..., :half]


#: Default model: first half of the state moves at the constant velocity held
#: in the second half; the measurement observes the first half.
CONSTANT_VELOCITY = TransitionModel(_cv_transition, _cv_measurement)


def _safe_cholesky(matrix: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, retrying with doubling jitter before giving up."""
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-9
    eye = np.eye(matrix.shape[0])
    for _ in range(5):
        try:
            return np.linalg.cholesky(matrix + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 2.0
    raise NumericsError("covariance not positive definite despite jitter retries")


def sigma_points(
    state: MotionState, params: UkfParams = DEFAULT_PARAMS
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """2n+1 sigma points with mean and covariance weights.

    Returns (points, w_mean, w_cov) where points has shape (2n+1, n). The
    mean weights always sum to 1; the spread of the off-center points is
    sqrt(n + lambda) times the Cholesky factor columns.
    """
    n = state.dim
    lam = params.scaling(n)
    scale = math.sqrt(n + lam)
    lower = _safe_cholesky(state.cov)
    points = np.empty((2 * n + 1, n))
    points[0] = state.mean
    points[1 : n + 1] = state.mean + scale * lower.T
    points[n + 1 :] = state.mean - scale * lower.T
    w_mean = np.full(2 * n + 1, 1.0 / (2.0 * (n + lam)))
    w_mean[0] = lam / (n + lam)
    w_cov = w_mean.copy()
    w_cov[0] += 1.0 - params.alpha**2 + params.beta
    return points, w_mean, w_cov


def _unscented_moments(
    points: np.ndarray, w_mean: np.ndarray, w_cov: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    mean = w_mean @ points
    dev = points - mean
    cov = (w_cov[:, None] * dev).T @ dev
    return mean, 0.5 * (cov + cov.T)


def process_noise(h: float, dt: float, params: UkfParams = DEFAULT_PARAMS) -> np.ndarray:
    """Diagonal process-noise covariance for an 8-dim box state."""
    std = np.array(
        [
            params.process_pos_scale * h,
            params.process_pos_scale * h,
            params.process_aspect_std,
            params.process_pos_scale * h,
            params.process_vel_scale * h,
            params.process_vel_scale * h,
            params.process_aspect_vel_std,
            params.process_vel_scale * h,
        ]
    )
    return dt * np.diag(std**2)


def measurement_noise(h: float, params: UkfParams = DEFAULT_PARAMS) -> np.ndarray:
    """Diagonal measurement-noise covariance in (cx, cy, aspect, h) space."""
    std = np.array(
        [
            params.measurement_scale * h,
            params.measurement_scale * h,
            params.measurement_aspect_std,
            params.measurement_scale * h,
        ]
    )
    return np.diag(std**2)


def predict(
    state: MotionState,
    params: UkfParams = DEFAULT_PARAMS,
    model: TransitionModel = CONSTANT_VELOCITY,
    dt: float = 1.0,
    process_cov: np.ndarray | None = None,
) -> MotionState:
    """Propagate the belief through the transition via the unscented transform.

    `process_cov` overrides the default height-scaled noise (useful for
    non-box state spaces); pass a zero matrix for a noiseless prediction.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    points, w_mean, w_cov = sigma_points(state, params)
    propagated = model.transition(points, dt)
    mean, cov = _unscented_moments(propagated, w_mean, w_cov)
    if process_cov is None:
        process_cov = process_noise(max(state.mean[3], _POSITIVE_FLOOR), dt, params)
    return MotionState(mean, cov + process_cov)


@dataclass
class MeasurementProjection:
    """Predicted measurement distribution of a state, reused by gating and update."""

    points: np.ndarray  # sigma points of the state, (2n+1, n)
    w_mean: np.ndarray
    w_cov: np.ndarray
    z_points: np.ndarray  # (2n+1, m)
    z_mean: np.ndarray  # (m,)
    innovation_cov: np.ndarray  # S, (m, m)
    chol: np.ndarray  # lower Cholesky factor of S

    def squared_mahalanobis(self, measurements: np.ndarray) -> np.ndarray:
        """Batch squared Mahalanobis distances for an (k, m) array of measurements."""
        diff = np.atleast_2d(measurements) - self.z_mean
        sol = np.linalg.solve(self.chol, diff.T)
        return np.einsum("ij,ij->j", sol, sol)


def project(
    state: MotionState,
    params: UkfParams = DEFAULT_PARAMS,
    model: TransitionModel = CONSTANT_VELOCITY,
    measurement_cov: np.ndarray | None = None,
) -> MeasurementProjection:
    points, w_mean, w_cov = sigma_points(state, params)
    z_points = model.measurement(points)
    z_mean, z_cov = _unscented_moments(z_points, w_mean, w_cov)
    if measurement_cov is None:
        measurement_cov = measurement_noise(max(state.mean[3], _POSITIVE_FLOOR), params)
    s = z_cov + measurement_cov
    try:
        chol = _safe_cholesky(s)
    except NumericsError as exc:
        raise NumericsError(f"singular innovation covariance: {exc}") from exc
    return MeasurementProjection(points, w_mean, w_cov, z_points, z_mean, s, chol)


def _as_vector(z: Measurement | np.ndarray) -> np.ndarray:
    if isinstance(z, Measurement):
        return np.array([z.cx, z.cy, z.aspect, z.h])
    return np.asarray(z, dtype=float).reshape(-1)


def update(
    state: MotionState,
    z: Measurement | np.ndarray,
    params: UkfParams = DEFAULT_PARAMS,
    model: TransitionModel = CONSTANT_VELOCITY,
    projection: MeasurementProjection | None = None,
    measurement_cov: np.ndarray | None = None,
) -> MotionState:
    """Condition the belief on a measurement (unscented Kalman update)."""
    if projection is None:
        projection = project(state, params, model, measurement_cov)
    z_vec = _as_vector(z)
    dev_x = projection.points - state.mean
    dev_z = projection.z_points - projection.z_mean
    cross = (projection.w_cov[:, None] * dev_x).T @ dev_z
    # K = cross @ inv(S), via the Cholesky factor of S
    gain = np.linalg.solve(
        projection.chol.T, np.linalg.solve(projection.chol, cross.T)
    ).T
    mean = state.mean + gain @ (z_vec - projection.z_mean)
    cov = state.cov - gain @ projection.innovation_cov @ gain.T
    if mean.shape[0] == STATE_DIM:
        mean[2] = max(mean[2], _POSITIVE_FLOOR)
        mean[3] = max(mean[3], _POSITIVE_FLOOR)
    return MotionState(mean, cov)


def mahalanobis(
    state: MotionState,
    z: Measurement | np.ndarray,
    params: UkfParams = DEFAULT_PARAMS,
    model: TransitionModel = CONSTANT_VELOCITY,
    projection: MeasurementProjection | None = None,
    measurement_cov: np.ndarray | None = None,
) -> float:
    """Mahalanobis distance of a measurement from the predicted measurement."""
    if projection is None:
        projection = project(state, params, model, measurement_cov)
    d2 = projection.squared_mahalanobis(_as_vector(z))[0]
    return math.sqrt(max(d2, 0.0))


def initiate(z: Measurement, params: UkfParams = DEFAULT_PARAMS) -> MotionState:
    """Fresh 8-dim belief centered on a measurement with zero velocity."""
    mean = np.zeros(STATE_DIM)
    mean[:4] = (z.cx, z.cy, z.aspect, z.h)
    std = np.array(
        [
            2.0 * params.measurement_scale * z.h,
            2.0 * params.measurement_scale * z.h,
            1e-2,
            2.0 * params.measurement_scale * z.h,
            10.0 * params.process_vel_scale * z.h,
            10.0 * params.process_vel_scale * z.h,
            1e-5,
            10.0 * params.process_vel_scale * z.h,
        ]
    )
    return MotionState(mean, np.diag(std**2))
