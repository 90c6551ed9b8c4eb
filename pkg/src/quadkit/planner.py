"""Baseline model-based foothold planning and velocity-command gating.

The planner places each foot by blending three targets: a reference
foothold that follows the commanded velocity (hip projection advanced by
half a stance period plus a capture-point correction), the previous
foothold, and a capture-point stabilization target.  The weighted blend is
clipped to a kinematic disc around the hip projection, which solves the
per-foot quadratic program exactly.  A perceptive variant additionally
searches a small disc of candidate cells for low edge cost and terrain
slope.  Swing trajectories are three-node splines whose apex clears the
terrain by a fixed margin, and a command gate rejects velocities whose
short-horizon path crosses excessive height deviations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import costmap
from .heightfield import ElevationPatch, Heightfield, OutOfExtentError, height_at, heights_along, max_height_on_segment

GRAVITY = 9.81

NOMINAL_STANCE = np.array([
    [0.35, 0.20],    # left front
    [0.35, -0.20],   # right front
    [-0.35, 0.20],   # left hind
    [-0.35, -0.20],  # right hind
])

SWING_CLEARANCE = 0.05

GATE_THRESHOLD = 0.4
GATE_HORIZON = 0.4
GATE_RECHECK_PERIOD = 0.1  # callers re-run the gate every 100 ms

GAIT_NAMES = ("trot", "crawl")


@dataclass(frozen=True)
class GaitConfig:
    """Gait timing parameters loaded from a JSON configuration file."""

    name: str = "trot"
    stance_duration: float = 0.5

    def __post_init__(self):
        if self.name not in GAIT_NAMES:
            raise ValueError(f"gait name must be one of {GAIT_NAMES}, got {self.name!r}")
        if self.stance_duration <= 0:
            raise ValueError("stance_duration must be positive")

    @classmethod
    def from_json(cls, text: str) -> "GaitConfig":
        d = json.loads(text)
        return cls(name=d.get("name", "trot"),
                   stance_duration=d.get("stance_duration", 0.5))


@dataclass(frozen=True)
class FootholdQuery:
    """Inputs to one foothold-planning step (world-frame xy quantities)."""

    base_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)  # x, y, yaw
    base_velocity: np.ndarray = (0.0, 0.0)
    base_yaw_rate: float = 0.0
    desired_velocity: np.ndarray = (0.0, 0.0)
    desired_yaw_rate: float = 0.0
    previous_footholds: np.ndarray = field(default_factory=lambda: NOMINAL_STANCE.copy())
    hip_projections: np.ndarray = field(default_factory=lambda: NOMINAL_STANCE.copy())
    stance_duration: float = 0.5
    com_height: float = 0.45
    kinematic_radius: float = 0.25
    w_ref: float = 1.0
    w_prev: float = 0.0
    w_stab: float = 0.0

    def __post_init__(self):
        for name in ("base_velocity", "desired_velocity"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64).reshape(2))
        for name in ("previous_footholds", "hip_projections"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64).reshape(4, 2))
        if self.stance_duration <= 0:
            raise ValueError("stance_duration must be positive")
        if self.com_height <= 0:
            raise ValueError("com_height must be positive")
        if self.kinematic_radius <= 0:
            raise ValueError("kinematic_radius must be positive")
        if self.w_ref < 0 or self.w_prev < 0 or self.w_stab < 0:
            raise ValueError("weights must be non-negative")
        if self.w_ref + self.w_prev + self.w_stab <= 0:
            raise ValueError("at least one weight must be positive")


def nominal_query(base_pose=(0.0, 0.0, 0.0), com_height: float = 0.45,
                  stance_duration: float = 0.5, **kwargs) -> FootholdQuery:
    """Standing query: hips and previous footholds at the nominal stance."""
    x, y, yaw = base_pose
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s], [s, c]])
    hips = NOMINAL_STANCE @ rot.T + np.array([x, y])
    return FootholdQuery(base_pose=base_pose, previous_footholds=hips.copy(),
                         hip_projections=hips, com_height=com_height,
                         stance_duration=stance_duration, **kwargs)


def reference_footholds(query: FootholdQuery, gravity: float = GRAVITY) -> np.ndarray:
    """Velocity-following reference: hip + v_des * T/2 + sqrt(h/g) * (v - v_des)."""
    advance = query.desired_velocity * (query.stance_duration / 2.0)
    correction = math.sqrt(query.com_height / gravity) * (query.base_velocity - query.desired_velocity)
    return query.hip_projections + advance + correction


def capture_targets(query: FootholdQuery, gravity: float = GRAVITY) -> np.ndarray:
    """Per-leg capture-point stabilization target: hip + sqrt(h/g) * v."""
    return query.hip_projections + math.sqrt(query.com_height / gravity) * query.base_velocity


def optimize_footholds(query: FootholdQuery, gravity: float = GRAVITY) -> np.ndarray:
    """Solve the per-foot foothold QP.

    Minimizes w_ref |p - p_ref|^2 + w_prev |p - p_prev|^2 + w_stab |p - p_cap|^2
    over the disc |p - hip| <= kinematic_radius.  The unconstrained optimum
    is the weighted mean of the three targets; the disc constraint projects
    it radially, which is exact for this isotropic objective.
    """
    refs = reference_footholds(query, gravity)
    caps = capture_targets(query, gravity)
    total = query.w_ref + query.w_prev + query.w_stab
    blend = (query.w_ref * refs + query.w_prev * query.previous_footholds
             + query.w_stab * caps) / total
    out = blend.copy()
    for i in range(4):
        delta = blend[i] - query.hip_projections[i]
        dist = float(np.hypot(*delta))
        if dist > query.kinematic_radius:
            out[i] = query.hip_projections[i] + delta * (query.kinematic_radius / dist)
    return out


def local_slope(patch: ElevationPatch, row: int, col: int) -> float:
    """Central-difference gradient magnitude of the patch at a cell."""
    values = patch.values
    n = values.shape[0]
    r0, r1 = max(row - 1, 0), min(row + 1, n - 1)
    c0, c1 = max(col - 1, 0), min(col + 1, n - 1)
    dzdx = (values[row, c1] - values[row, c0]) / ((c1 - c0) * patch.resolution)
    dzdy = (values[r1, col] - values[r0, col]) / ((r1 - r0) * patch.resolution)
    return float(np.hypot(dzdx, dzdy))


def perceptive_adjust(foothold, patch: ElevationPatch, radius: float = 0.05,
                      w_edge: float = 1.0, w_slope: float = 1.0) -> np.ndarray:
    """Shift a foothold within ``radius`` to cheaper terrain.

    Candidates are patch cells within the disc; each is scored by
    w_edge * foot_edge_cost + w_slope * local slope.  Ties prefer the
    smallest displacement, then the lexicographically smallest offset.
    The adjusted foothold never moves more than ``radius``.
    """
    foothold = np.asarray(foothold, dtype=np.float64).reshape(2)
    n = patch.values.shape[0]
    center = n // 2
    col0 = foothold[0] / patch.resolution + center
    row0 = foothold[1] / patch.resolution + center
    ci, ri = int(round(col0)), int(round(row0))
    half = int(math.floor(radius / patch.resolution))
    if not (half <= ci < n - half and half <= ri < n - half):
        raise ValueError("foothold adjustment disc exits the patch")

    best_key = None
    best_offset = (0.0, 0.0)
    for dr in range(-half, half + 1):
        for dc in range(-half, half + 1):
            dx = dc * patch.resolution
            dy = dr * patch.resolution
            if dx * dx + dy * dy > radius * radius + 1e-12:
                continue
            cand = (foothold[0] + dx, foothold[1] + dy)
            cost = (w_edge * costmap.foot_edge_cost(patch, cand, radius)
                    + w_slope * local_slope(patch, ri + dr, ci + dc))
            key = (cost, dx * dx + dy * dy, dx, dy)
            if best_key is None or key < best_key:
                best_key = key
                best_offset = (dx, dy)
    return foothold + np.asarray(best_offset)


@dataclass(frozen=True)
class SwingSpline:
    """Three-node swing trajectory: start, apex, end.

    Piecewise cubic Hermite in a normalized phase t in [0, 1] with the apex
    at t = 0.5; vertical velocity is zero at all three nodes so the foot
    lifts and lands softly and peaks exactly at the apex.
    """

    start: np.ndarray
    apex: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        for name in ("start", "apex", "end"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64).reshape(3))
        if self.apex[2] < max(self.start[2], self.end[2]) - 1e-12:
            raise ValueError("swing apex must be the highest node")

    def position(self, t: float) -> np.ndarray:
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError("phase must lie in [0, 1]")
        # tangents: clamped (zero) at the ends; xy continues through the
        # apex with a central-difference slope, z peaks there (zero slope)
        apex_tangent = np.array([self.end[0] - self.start[0], self.end[1] - self.start[1], 0.0])
        zero = np.zeros(3)
        if t <= 0.5:
            return _hermite(self.start, zero, self.apex, apex_tangent, t * 2.0, 0.5)
        return _hermite(self.apex, apex_tangent, self.end, zero, (t - 0.5) * 2.0, 0.5)

    def vertical_velocity(self, t: float, dt: float = 1e-6) -> float:
        lo, hi = max(0.0, t - dt), min(1.0, t + dt)
        return float((self.position(hi)[2] - self.position(lo)[2]) / (hi - lo))


def _hermite(p0, m0, p1, m1, s: float, duration: float) -> np.ndarray:
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * p0 + h10 * duration * m0 + h01 * p1 + h11 * duration * m1


def swing_trajectory(start, end, hf: Heightfield,
                     clearance: float = SWING_CLEARANCE) -> SwingSpline:
    """Swing spline whose apex clears the terrain along the segment.

    The apex sits above the xy midpoint at the maximum terrain height
    between the endpoints plus ``clearance``.
    """
    start = np.asarray(start, dtype=np.float64).reshape(3)
    end = np.asarray(end, dtype=np.float64).reshape(3)
    peak = max_height_on_segment(hf, start[:2], end[:2])
    apex = np.array([(start[0] + end[0]) / 2.0, (start[1] + end[1]) / 2.0,
                     max(peak + clearance, start[2], end[2])])
    return SwingSpline(start, apex, end)


# ---------------------------------------------------------------------------
# Velocity command gating.

@dataclass(frozen=True)
class VelocityCommand:
    """Planar base velocity command."""

    v_xy: np.ndarray = (0.0, 0.0)
    yaw_rate: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.v_xy, dtype=np.float64).reshape(2)
        if not (np.isfinite(v).all() and math.isfinite(self.yaw_rate)):
            raise ValueError("velocity command must be finite")
        object.__setattr__(self, "v_xy", v)


@dataclass(frozen=True)
class CommandLimits:
    """Uniform sampling ranges for velocity commands."""

    v_x: tuple[float, float] = (-0.5, 0.5)
    v_y: tuple[float, float] = (-0.5, 0.5)
    yaw_rate: tuple[float, float] = (-0.5, 0.5)

    def __post_init__(self):
        for name in ("v_x", "v_y", "yaw_rate"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} limits must satisfy lo <= hi")


def _command_path(pose, cmd: VelocityCommand, horizon: float, spacing: float) -> np.ndarray:
    """Sampled base path under perfect tracking of a constant twist."""
    x0, y0, yaw0 = pose
    vx, vy = cmd.v_xy
    speed = math.hypot(vx, vy)
    length = speed * horizon
    n = max(1, int(math.ceil(length / spacing)))
    ts = np.linspace(0.0, horizon, n + 1)
    w = cmd.yaw_rate
    if abs(w) < 1e-9:
        c, s = math.cos(yaw0), math.sin(yaw0)
        xs = x0 + (c * vx - s * vy) * ts
        ys = y0 + (s * vx + c * vy) * ts
    else:
        # closed-form integral of a constant body twist
        yaw = yaw0 + w * ts
        xs = x0 + (vx * (np.sin(yaw) - math.sin(yaw0)) + vy * (np.cos(yaw) - math.cos(yaw0))) / w
        ys = y0 + (-vx * (np.cos(yaw) - math.cos(yaw0)) + vy * (np.sin(yaw) - math.sin(yaw0))) / w
    return np.column_stack([xs, ys])


def velocity_gate(hf: Heightfield, pose, cmd: VelocityCommand,
                  threshold: float = GATE_THRESHOLD,
                  horizon: float = GATE_HORIZON) -> bool:
    """Accept a command unless its short-horizon path crosses a big height step.

    The base path is integrated under perfect tracking for ``horizon``
    seconds and terrain heights are sampled along it at sub-resolution
    spacing; the command is rejected when max - min exceeds ``threshold``.
    Raises :class:`OutOfExtentError` when the path leaves the terrain.
    """
    path = _command_path(pose, cmd, horizon, hf.resolution / 2.0)
    heights = heights_along(hf, path)
    return float(heights.max() - heights.min()) <= threshold


def resample_command(hf: Heightfield, pose, seed: int,
                     limits: CommandLimits = CommandLimits(),
                     threshold: float = GATE_THRESHOLD,
                     horizon: float = GATE_HORIZON,
                     max_attempts: int = 1000) -> VelocityCommand:
    """Draw uniform commands until the gate accepts one (seeded).

    Commands whose paths leave the terrain extent count as rejected.
    Raises ``RuntimeError`` when the attempt budget runs out.
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        cmd = VelocityCommand((rng.uniform(*limits.v_x), rng.uniform(*limits.v_y)),
                              float(rng.uniform(*limits.yaw_rate)))
        try:
            if velocity_gate(hf, pose, cmd, threshold, horizon):
                return cmd
        except OutOfExtentError:
            continue
    raise RuntimeError(f"no acceptable command found in {max_attempts} attempts")


# ---------------------------------------------------------------------------
# Canned planner configurations.

def plan_footholds_blind(query: FootholdQuery, hf: Heightfield,
                         gravity: float = GRAVITY) -> np.ndarray:
    """Blind baseline: QP footholds with heights read straight off the terrain."""
    xy = optimize_footholds(query, gravity)
    z = np.array([height_at(hf, float(p[0]), float(p[1])) for p in xy])
    return np.column_stack([xy, z])


def plan_footholds_perceptive(query: FootholdQuery, hf: Heightfield,
                              radius: float = 0.05, w_edge: float = 1.0,
                              w_slope: float = 1.0,
                              gravity: float = GRAVITY) -> np.ndarray:
    """Perceptive baseline: QP footholds nudged off edges and slopes.

    A base-centered patch supplies the cost terrain; each foothold is
    adjusted within ``radius`` before its height is read off the map.
    """
    from .heightfield import slice_patch

    x0, y0, yaw = query.base_pose
    patch = slice_patch(hf, (x0, y0), yaw)
    xy = optimize_footholds(query, gravity)
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s], [s, c]])
    out = []
    for p in xy:
        local = rot.T @ (p - np.array([x0, y0]))
        adjusted_local = perceptive_adjust(local, patch, radius, w_edge, w_slope)
        world = rot @ adjusted_local + np.array([x0, y0])
        out.append([world[0], world[1], height_at(hf, float(world[0]), float(world[1]))])
    return np.asarray(out)
