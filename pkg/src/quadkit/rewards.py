"""Deterministic evaluation of the training reward terms.

Three reward families share a logistic kernel K(x) = 1 / (e^x + 2 + e^-x):
a recurrent reward scored during feet swings, a final reward scored at
stance, and a recovery reward with joint-limit and smoothness penalties.
Kernels and the stability margin enter positively, quadratic and clamp
penalties negatively.  Vector errors are reduced to the kernel's scalar
argument with the Euclidean norm.  All published tables omit coefficients,
so every weight defaults to 1 and a curriculum factor in [0, 1] scales the
summed reward.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np


def logistic_kernel(x: float) -> float:
    """K(x) = 1 / (e^x + 2 + e^-x); even, peaks at K(0) = 0.25."""
    return 1.0 / (np.exp(x) + 2.0 + np.exp(-x))


def _norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=np.float64)))


def _sqnorm(v) -> float:
    a = np.asarray(v, dtype=np.float64)
    return float((a * a).sum())


@dataclass(frozen=True)
class RobotSnapshot:
    """One instant of robot state, as consumed by the reward terms.

    Joint vectors have 12 entries; feet quantities 4 (heights, edge costs)
    or 4x3 / 4x2 (velocities, positions).  ``desired_foot_height`` is the
    scalar target swing height; limits are per-joint magnitudes.
    """

    base_velocity: np.ndarray = (0.0, 0.0, 0.0)
    base_angular_velocity: np.ndarray = (0.0, 0.0, 0.0)
    desired_linear_velocity: np.ndarray = (0.0, 0.0, 0.0)
    desired_angular_velocity: np.ndarray = (0.0, 0.0, 0.0)
    joint_positions: np.ndarray = field(default_factory=lambda: np.zeros(12))
    joint_velocities: np.ndarray = field(default_factory=lambda: np.zeros(12))
    joint_accelerations: np.ndarray = field(default_factory=lambda: np.zeros(12))
    joint_torques: np.ndarray = field(default_factory=lambda: np.zeros(12))
    previous_joint_positions: np.ndarray = field(default_factory=lambda: np.zeros(12))
    foot_velocities: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    previous_foot_velocities: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    foot_heights: np.ndarray = field(default_factory=lambda: np.zeros(4))
    desired_foot_positions: np.ndarray = field(default_factory=lambda: np.zeros((4, 2)))
    nominal_foot_positions: np.ndarray = field(default_factory=lambda: np.zeros((4, 2)))
    desired_foot_height: float = 0.0
    stability_margin: float = 0.0
    edge_costs: np.ndarray = field(default_factory=lambda: np.zeros(4))
    joint_speed_limit: np.ndarray = field(default_factory=lambda: np.full(12, 10.0))
    joint_acceleration_limit: np.ndarray = field(default_factory=lambda: np.full(12, 500.0))

    def __post_init__(self):
        shapes = {
            "base_velocity": (3,), "base_angular_velocity": (3,),
            "desired_linear_velocity": (3,), "desired_angular_velocity": (3,),
            "joint_positions": (12,), "joint_velocities": (12,),
            "joint_accelerations": (12,), "joint_torques": (12,),
            "previous_joint_positions": (12,),
            "foot_velocities": (4, 3), "previous_foot_velocities": (4, 3),
            "foot_heights": (4,), "desired_foot_positions": (4, 2),
            "nominal_foot_positions": (4, 2), "edge_costs": (4,),
            "joint_speed_limit": (12,), "joint_acceleration_limit": (12,),
        }
        for name, shape in shapes.items():
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if name.endswith("limit") and value.ndim == 0:
                value = np.full(shape, float(value))
            object.__setattr__(self, name, value.reshape(shape))
        if (self.joint_speed_limit <= 0).any() or (self.joint_acceleration_limit <= 0).any():
            raise ValueError("joint limits must be positive")


@dataclass(frozen=True)
class RewardWeights:
    """One coefficient per reward term; curriculum scales the summed reward."""

    # recurrent footstep terms
    linear_velocity: float = 1.0
    torque: float = 1.0
    angular_velocity: float = 1.0
    foot_slip: float = 1.0
    stability: float = 1.0
    # final footstep terms
    nominal_deviation: float = 1.0
    edge_distance: float = 1.0
    foot_slip_final: float = 1.0
    stability_final: float = 1.0
    foot_height: float = 1.0
    # recovery-only terms
    foot_acceleration: float = 1.0
    smoothness: float = 1.0
    joint_speed: float = 1.0
    joint_acceleration: float = 1.0
    foot_clearance: float = 1.0
    # tracking terms
    tracking_error: float = 1.0
    tracking_stability: float = 1.0
    curriculum: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise ValueError(f"weight {f.name} must be finite")
        if not 0.0 <= self.curriculum <= 1.0:
            raise ValueError("curriculum factor must lie in [0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "RewardWeights":
        return cls(**d)


def footstep_recurrent_reward(s: RobotSnapshot, w: RewardWeights) -> float:
    """Swing-phase reward: velocity-tracking kernels, torque and slip penalties, margin."""
    value = (w.linear_velocity * logistic_kernel(_norm(s.base_velocity - s.desired_linear_velocity))
             - w.torque * _sqnorm(s.joint_torques)
             + w.angular_velocity * logistic_kernel(_norm(s.base_angular_velocity - s.desired_angular_velocity))
             - w.foot_slip * _sqnorm(s.foot_velocities)
             + w.stability * s.stability_margin)
    return w.curriculum * value


def footstep_final_reward(s: RobotSnapshot, w: RewardWeights) -> float:
    """Stance reward: nominal-stance deviation, edge costs, slip, margin, foot height."""
    height_error = s.desired_foot_height - s.foot_heights
    value = (-w.nominal_deviation * _sqnorm(s.desired_foot_positions - s.nominal_foot_positions)
             - w.edge_distance * float(s.edge_costs.sum())
             - w.foot_slip_final * _sqnorm(s.foot_velocities)
             + w.stability_final * s.stability_margin
             + w.foot_height * logistic_kernel(_norm(height_error)))
    return w.curriculum * value


def recovery_reward(s: RobotSnapshot, w: RewardWeights) -> float:
    """Recovery-policy reward with joint-limit clamps and smoothness penalties."""
    speed_excess = np.maximum(np.abs(s.joint_velocities) - s.joint_speed_limit, 0.0)
    accel_excess = np.maximum(np.abs(s.joint_accelerations) - s.joint_acceleration_limit, 0.0)
    clearance = float((((s.foot_heights - s.desired_foot_height) ** 2)
                       * (np.linalg.norm(s.foot_velocities, axis=1) ** 2)).sum())
    value = (w.linear_velocity * logistic_kernel(_norm(s.base_velocity - s.desired_linear_velocity))
             - w.torque * _sqnorm(s.joint_torques)
             + w.angular_velocity * logistic_kernel(_norm(s.base_angular_velocity - s.desired_angular_velocity))
             - w.foot_acceleration * _sqnorm(s.foot_velocities - s.previous_foot_velocities)
             - w.foot_slip * _sqnorm(s.foot_velocities)
             - w.smoothness * _sqnorm(s.joint_positions - s.previous_joint_positions)
             + w.stability * s.stability_margin
             - w.joint_speed * _sqnorm(speed_excess)
             - w.joint_acceleration * _sqnorm(accel_excess)
             - w.foot_clearance * clearance)
    return w.curriculum * value


def tracking_reward(desired_state, measured_state, stability_margin: float,
                    w: RewardWeights, channel_weights=None) -> float:
    """Negative weighted quadratic state error plus the stability margin."""
    desired = np.asarray(desired_state, dtype=np.float64)
    measured = np.asarray(measured_state, dtype=np.float64)
    if desired.shape != measured.shape:
        raise ValueError(f"state shapes disagree: {desired.shape} vs {measured.shape}")
    error = desired - measured
    if channel_weights is not None:
        cw = np.asarray(channel_weights, dtype=np.float64)
        if cw.shape != error.shape:
            raise ValueError("channel_weights shape must match the state")
        quadratic = float((cw * error * error).sum())
    else:
        quadratic = float((error * error).sum())
    value = -w.tracking_error * quadratic + w.tracking_stability * stability_margin
    return w.curriculum * value
