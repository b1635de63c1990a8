"""Constant-velocity linear Kalman filter for 10-dim track states.

State is [x y z theta h w l ux uy uz] with velocities in meters per
frame; measurements are box 7-vectors. The process noise enters only
through Q (the mean propagation is deterministic).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import Detection, TrackState, TrackStatus, wrap_angle

STATE_DIM = 10
MEAS_DIM = 7


class SingularInnovation(np.linalg.LinAlgError):
    """Innovation covariance H P Ht + R is not invertible."""


def _transition_matrix() -> np.ndarray:
    f = np.eye(STATE_DIM)
    f[0, 7] = f[1, 8] = f[2, 9] = 1.0
    return f


def _measurement_matrix() -> np.ndarray:
    return np.hstack([np.eye(MEAS_DIM), np.zeros((MEAS_DIM, 3))])


@dataclass(frozen=True)
class KalmanModel:
    """Transition/measurement matrices and noise covariances.

    Defaults follow common 3D tracking practice: large initial velocity
    uncertainty, small velocity process noise, unit measurement noise.
    """

    F: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    P0: np.ndarray
    orientation_correction: bool = True

    def __post_init__(self):
        for name, mat, shape in (("F", self.F, (10, 10)), ("H", self.H, (7, 10)),
                                 ("Q", self.Q, (10, 10)), ("R", self.R, (7, 7)),
                                 ("P0", self.P0, (10, 10))):
            arr = np.asarray(mat, dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr.copy())


def default_model(orientation_correction: bool = True) -> KalmanModel:
    p0 = np.diag([10.0] * 7 + [1000.0] * 3)
    q = np.diag([0.0] * 7 + [0.01] * 3)
    r = np.eye(MEAS_DIM)
    return KalmanModel(F=_transition_matrix(), H=_measurement_matrix(),
                       Q=q, R=r, P0=p0,
                       orientation_correction=orientation_correction)


def init_track(d: Detection, track_id: int, model: KalmanModel) -> TrackState:
    """New zero-velocity track from an unmatched detection."""
    state = np.zeros(STATE_DIM)
    state[:7] = d.box7()
    return TrackState(state=state, covariance=model.P0, track_id=track_id,
                      hits=1, misses=0, status=TrackStatus.TENTATIVE,
                      score=d.score)


def predict(t: TrackState, model: KalmanModel) -> TrackState:
    """Propagate mean and covariance one frame ahead."""
    if t.status is TrackStatus.DEAD:
        raise ValueError("cannot predict a dead track")
    state = model.F @ t.state
    state[3] = wrap_angle(state[3])
    cov = model.F @ t.covariance @ model.F.T + model.Q
    cov = 0.5 * (cov + cov.T)
    return replace(t, state=state, covariance=cov)


def _orientation_residual(z_theta: float, pred_theta: float):
    """Yaw residual wrapped to [-pi, pi]; flip by pi when above pi/2.

    Boxes are symmetric under 180-degree flips, so a residual beyond pi/2
    means the detector reported the opposite heading; flipping the
    measurement avoids a spurious half-turn innovation.
    """
    residual = wrap_angle(z_theta - pred_theta)
    if residual > np.pi / 2:
        residual -= np.pi
    elif residual < -np.pi / 2:
        residual += np.pi
    return residual


def update(t: TrackState, z, model: KalmanModel, score: float | None = None) -> TrackState:
    """Standard Kalman measurement update with a box 7-vector.

    Raises SingularInnovation when H P Ht + R cannot be factorized.
    """
    if t.status is TrackStatus.DEAD:
        raise ValueError("cannot update a dead track")
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != MEAS_DIM or not np.all(np.isfinite(z)):
        raise ValueError(f"measurement must be a finite 7-vector, got {z}")

    x_pred = t.state
    p_pred = t.covariance
    innovation = z - model.H @ x_pred
    if model.orientation_correction:
        innovation[3] = _orientation_residual(z[3], x_pred[3])
    else:
        innovation[3] = wrap_angle(innovation[3])

    s = model.H @ p_pred @ model.H.T + model.R
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise SingularInnovation("innovation covariance is singular") from exc
    # K = P Ht S^-1 via the Cholesky factor
    kt = np.linalg.solve(chol.T, np.linalg.solve(chol, model.H @ p_pred))
    gain = kt.T

    state = x_pred + gain @ innovation
    state[3] = wrap_angle(state[3])
    cov = p_pred - gain @ model.H @ p_pred
    cov = 0.5 * (cov + cov.T)
    return replace(t, state=state, covariance=cov,
                   hits=t.hits + 1, misses=0,
                   score=float(score) if score is not None else t.score)
