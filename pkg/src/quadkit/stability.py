"""Analytical stability margin from contact-wrench feasibility.

The margin is the signed distance between the instantaneous capture point
(ICP) and the boundary of the feasible region: the set of ground reference
points for which contact forces exist that balance the gravito-inertial
wrench while respecting friction cones and per-contact force caps.  The
region is computed by two-dimensional iterative projection: directional
support linear programs tighten an inner polygon (hull of support points)
against an outer polygon (intersection of support half-planes) until their
gap drops below a tolerance.

Degenerate stances collapse the region: one point contact admits at most a
single reference point, two contacts a segment along their connecting axis.
A margin is positive only when the ICP lies strictly inside a polygon
region; point/segment regions give non-positive margins and an infeasible
stance reports a flagged unbounded-instability result instead of a number.

Force caps stand in for joint-torque limits: lowering ``f_max`` shrinks the
region strictly inside its friction-only counterpart.  The mapping from a
torque budget to a cap is left to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, LinearProgram, LpNumericalError

DEFAULT_TOLERANCE = 0.01
DEFAULT_FRICTION_EDGES = 4

_DEGENERACY_EPS = 1e-9
_REFERENCE_BOX = 100.0   # |x - contact centroid| bound that keeps support LPs bounded
_MAX_REFINEMENTS = 100


@dataclass(frozen=True)
class Contact:
    """One foot-ground contact: position, unit normal, friction, force cap."""

    position: np.ndarray
    normal: np.ndarray = (0.0, 0.0, 1.0)
    friction_mu: float = 0.6
    f_max: float = math.inf
    active: bool = True

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64).reshape(3))
        normal = np.asarray(self.normal, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(normal) - 1.0) > 1e-9:
            raise ValueError("contact normal must be a unit vector")
        object.__setattr__(self, "normal", normal)
        if self.friction_mu < 0:
            raise ValueError("friction coefficient must be non-negative")
        if not self.f_max > 0:
            raise ValueError("f_max must be positive (or infinite)")


@dataclass(frozen=True)
class ContactSet:
    """Up to four contacts; margin queries need at least one active contact."""

    contacts: tuple[Contact, ...]

    def __post_init__(self):
        contacts = tuple(self.contacts)
        if len(contacts) > 4:
            raise ValueError("at most 4 contacts are supported")
        positions = [c.position for c in contacts]
        for i in range(len(positions)):
            for j in range(i + 1, len(positions)):
                if np.linalg.norm(positions[i] - positions[j]) < 1e-12:
                    raise ValueError("contact positions must be pairwise distinct")
        object.__setattr__(self, "contacts", contacts)

    def active(self) -> list[Contact]:
        return [c for c in self.contacts if c.active]


@dataclass(frozen=True)
class CentroidalState:
    """Centroidal robot state entering the margin computation.

    ``base_orientation`` is a scalar-first (w, x, y, z) unit quaternion
    rotating base-frame vectors into the world frame.  ``inertia`` is an
    optional base inertia matrix; with the default zero matrix the angular
    rates are recorded but contribute no moment.
    """

    com_position: np.ndarray = (0.0, 0.0, 0.5)
    com_velocity: np.ndarray = (0.0, 0.0, 0.0)
    base_orientation: np.ndarray = (1.0, 0.0, 0.0, 0.0)
    angular_velocity: np.ndarray = (0.0, 0.0, 0.0)
    angular_acceleration: np.ndarray = (0.0, 0.0, 0.0)
    external_force: np.ndarray = (0.0, 0.0, 0.0)
    external_torque: np.ndarray = (0.0, 0.0, 0.0)
    mass: float = 30.0
    gravity: float = 9.81
    inertia: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        for name in ("com_position", "com_velocity", "angular_velocity",
                     "angular_acceleration", "external_force", "external_torque"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64).reshape(3))
        quat = np.asarray(self.base_orientation, dtype=np.float64).reshape(4)
        norm = np.linalg.norm(quat)
        if norm < 1e-12:
            raise ValueError("base_orientation quaternion must be non-zero")
        object.__setattr__(self, "base_orientation", quat / norm)
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=np.float64).reshape(3, 3))
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.gravity <= 0:
            raise ValueError("gravity must be positive")

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.base_orientation
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def vertical_axis(self) -> np.ndarray:
        """World up expressed in the base frame (3-d orientation representation)."""
        return self.rotation_matrix().T @ np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class FeasibleRegion:
    """Admissible reference-point set: polygon, segment, point, or empty.

    For polygons ``vertices`` is the counterclockwise inner approximation
    and ``outer_vertices`` the circumscribing half-plane intersection from
    the projection loop; ``achieved_tolerance`` is the final inner/outer
    boundary gap.
    """

    kind: str  # "polygon" | "segment" | "point" | "empty"
    vertices: np.ndarray
    outer_vertices: np.ndarray | None = None
    achieved_tolerance: float = 0.0

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "vertices", vertices)
        if self.outer_vertices is not None:
            object.__setattr__(self, "outer_vertices",
                               np.asarray(self.outer_vertices, dtype=np.float64).reshape(-1, 2))
        counts = {"polygon": 3, "segment": 2, "point": 1, "empty": 0}
        if self.kind not in counts:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == "empty" and len(vertices) != 0:
            raise ValueError("empty region carries no vertices")
        if self.kind != "empty" and len(vertices) < counts[self.kind]:
            raise ValueError(f"{self.kind} region needs >= {counts[self.kind]} vertices")

    @property
    def inner_vertices(self) -> np.ndarray:
        return self.vertices

    def area(self) -> float:
        if self.kind != "polygon":
            return 0.0
        v = self.vertices
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


@dataclass(frozen=True)
class MarginResult:
    """Signed stability margin with its ICP and feasible region.

    ``margin`` is ``None`` exactly when the region is empty; the stance is
    then flagged ``unbounded`` (unstable, no balancing wrench exists).
    """

    margin: float | None
    icp: np.ndarray
    region: FeasibleRegion

    @property
    def unbounded(self) -> bool:
        return self.margin is None


class SupportResult:
    """Outcome of one directional support LP."""

    __slots__ = ("point", "feasible")

    def __init__(self, point: np.ndarray | None, feasible: bool):
        self.point = point
        self.feasible = feasible


def icp(state: CentroidalState, contacts: ContactSet) -> np.ndarray:
    """Instantaneous capture point: com_xy + v_xy * sqrt(h / g).

    ``h`` is the CoM height above the contact reference plane (mean of
    active contact heights) and must be positive.
    """
    active = contacts.active()
    if not active:
        raise ValueError("ICP needs at least one active contact")
    plane_z = float(np.mean([c.position[2] for c in active]))
    h = float(state.com_position[2]) - plane_z
    if h <= 0:
        raise ValueError(f"CoM height above the contact plane must be positive, got {h:.4f}")
    scale = math.sqrt(h / state.gravity)
    return state.com_position[:2] + scale * state.com_velocity[:2]


def _tangent_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ref = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = ref - np.dot(ref, normal) * normal
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(normal, t1)
    return t1, t2


def _wrench_program(contacts: ContactSet, state: CentroidalState,
                    n_friction_edges: int = DEFAULT_FRICTION_EDGES) -> LinearProgram:
    """Assemble the support LP over (contact forces, reference point).

    Equalities are the force balance and the three moment rows about the
    world origin with gravity and the external force applied at the CoM
    whose horizontal position is the free reference point.  Inequalities
    linearize each friction cone as an ``n_friction_edges``-sided pyramid in
    the contact tangent frame, bound the normal force to [0, f_max], and box
    the reference point to keep the program bounded.
    """
    active = contacts.active()
    k = len(active)
    if k == 0:
        raise ValueError("support LP needs at least one active contact")
    n = 3 * k + 2  # per-contact forces + reference point (x, y)
    m, g = state.mass, state.gravity
    f_ext = state.external_force
    tau_ext = state.external_torque
    z_com = float(state.com_position[2])
    # rotational inertia wrench (zero with the default zero inertia matrix)
    h_rot = state.inertia @ state.angular_acceleration \
        + np.cross(state.angular_velocity, state.inertia @ state.angular_velocity)

    a_eq = np.zeros((6, n))
    b_eq = np.zeros(6)
    # force balance: sum f_i = m g z - F_ext
    for i in range(k):
        a_eq[0:3, 3 * i:3 * i + 3] = np.eye(3)
    b_eq[0:3] = np.array([0.0, 0.0, m * g]) - f_ext
    # moment balance about the origin; gravity and F_ext act at (x, y, z_com)
    for i, contact in enumerate(active):
        px, py, pz = contact.position
        cross = np.array([[0.0, -pz, py], [pz, 0.0, -px], [-py, px, 0.0]])
        a_eq[3:6, 3 * i:3 * i + 3] = cross
    ix, iy = n - 2, n - 1
    a_eq[3, iy] = f_ext[2] - m * g
    a_eq[4, ix] = m * g - f_ext[2]
    a_eq[5, ix] = f_ext[1]
    a_eq[5, iy] = -f_ext[0]
    b_eq[3] = z_com * f_ext[1] - tau_ext[0] + h_rot[0]
    b_eq[4] = -z_com * f_ext[0] - tau_ext[1] + h_rot[1]
    b_eq[5] = -tau_ext[2] + h_rot[2]

    rows, rhs = [], []
    for i, contact in enumerate(active):
        normal = contact.normal
        # normal force bounds
        row = np.zeros(n)
        row[3 * i:3 * i + 3] = -normal
        rows.append(row)
        rhs.append(0.0)
        if math.isfinite(contact.f_max):
            row = np.zeros(n)
            row[3 * i:3 * i + 3] = normal
            rows.append(row)
            rhs.append(contact.f_max)
        # friction pyramid edges in the tangent frame
        if math.isfinite(contact.friction_mu):
            t1, t2 = _tangent_basis(normal)
            for j in range(n_friction_edges):
                theta = 2.0 * math.pi * j / n_friction_edges
                edge = math.cos(theta) * t1 + math.sin(theta) * t2
                row = np.zeros(n)
                row[3 * i:3 * i + 3] = edge - contact.friction_mu * normal
                rows.append(row)
                rhs.append(0.0)
    centroid = np.mean([c.position[:2] for c in active], axis=0)
    for axis, sign in ((ix, 1.0), (ix, -1.0), (iy, 1.0), (iy, -1.0)):
        row = np.zeros(n)
        row[axis] = sign
        rows.append(row)
        rhs.append(_REFERENCE_BOX + sign * centroid[0 if axis == ix else 1])
    return LinearProgram(a_eq, b_eq, np.array(rows), np.array(rhs))


def _support(program: LinearProgram, direction: np.ndarray) -> SupportResult:
    n = program.n_free
    c = np.zeros(n)
    c[n - 2:] = direction
    result = program.solve(c)
    if result.status == INFEASIBLE:
        return SupportResult(None, False)
    if result.status != OPTIMAL:
        raise LpNumericalError(f"support LP ended with status {result.status!r}")
    return SupportResult(result.x[n - 2:].copy(), True)


def support_lp(contacts: ContactSet, state: CentroidalState, direction) -> SupportResult:
    """Farthest admissible reference point along ``direction`` (unit R^2)."""
    direction = np.asarray(direction, dtype=np.float64).reshape(2)
    norm = np.linalg.norm(direction)
    if norm < 1e-12:
        raise ValueError("support direction must be non-zero")
    return _support(_wrench_program(contacts, state), direction / norm)


def _collinear_axis(points: np.ndarray) -> np.ndarray | None:
    """Unit direction if the 2D points are collinear (or fewer than 3), else None."""
    if len(points) == 1:
        return np.array([1.0, 0.0])
    centered = points - points.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if len(s) > 1 and s[1] > _DEGENERACY_EPS:
        return None
    axis = vt[0]
    n = np.linalg.norm(axis)
    return axis / n if n > 1e-12 else np.array([1.0, 0.0])


def _segment_region(program: LinearProgram, axis: np.ndarray) -> FeasibleRegion:
    lo = _support(program, -axis)
    if not lo.feasible:
        return FeasibleRegion("empty", np.zeros((0, 2)))
    hi = _support(program, axis)
    if np.linalg.norm(hi.point - lo.point) < _DEGENERACY_EPS:
        return FeasibleRegion("point", [(lo.point + hi.point) / 2.0])
    return FeasibleRegion("segment", [lo.point, hi.point])


def _convex_hull_ccw(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counterclockwise, no repeated endpoint."""
    pts = np.unique(np.round(points, 12), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2:
                u = out[-1] - out[-2]
                v = p - out[-2]
                if u[0] * v[1] - u[1] * v[0] > 0:
                    break
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    return np.asarray(hull)


def _iterative_projection(program: LinearProgram, tolerance: float) -> FeasibleRegion:
    """Inner/outer polygon refinement by directional support LPs."""
    records: list[tuple[float, np.ndarray, np.ndarray, float]] = []  # angle, dir, point, offset
    for theta in (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0):
        d = np.array([math.cos(theta), math.sin(theta)])
        res = _support(program, d)
        if not res.feasible:
            return FeasibleRegion("empty", np.zeros((0, 2)))
        records.append((theta, d, res.point, float(d @ res.point)))

    achieved = math.inf
    for _ in range(_MAX_REFINEMENTS):
        records.sort(key=lambda r: r[0])
        k = len(records)
        best_area, best_gap, best = -1.0, 0.0, None
        max_gap = 0.0
        for i in range(k):
            _, d1, p1, o1 = records[i]
            _, d2, p2, o2 = records[(i + 1) % k]
            det = d1[0] * d2[1] - d1[1] * d2[0]
            if abs(det) < 1e-12:
                continue
            apex = np.array([(o1 * d2[1] - o2 * d1[1]) / det,
                             (d1[0] * o2 - d2[0] * o1) / det])
            edge = p2 - p1
            base = np.linalg.norm(edge)
            if base < _DEGENERACY_EPS:
                continue
            normal = np.array([edge[1], -edge[0]]) / base  # outward for CCW ordering
            gap = float(normal @ (apex - p1))
            max_gap = max(max_gap, gap)
            area = 0.5 * base * gap
            if area > best_area + 1e-15:
                best_area, best_gap, best = area, gap, (i, normal)
        achieved = max_gap
        if best is None or max_gap <= tolerance:
            break
        _, normal = best
        res = _support(program, normal)
        if not res.feasible:  # cannot happen once the first LP was feasible
            return FeasibleRegion("empty", np.zeros((0, 2)))
        angle = math.atan2(normal[1], normal[0]) % (2.0 * math.pi)
        if any(abs(angle - r[0]) < 1e-12 for r in records):
            break  # direction already probed; outer boundary is tight here
        records.append((angle, normal, res.point, float(normal @ res.point)))

    points = np.array([r[2] for r in records])
    hull = _convex_hull_ccw(points)
    if len(hull) == 1 or (len(hull) >= 2 and np.ptp(points, axis=0).max() < _DEGENERACY_EPS):
        return FeasibleRegion("point", [points.mean(axis=0)], achieved_tolerance=achieved)
    if len(hull) == 2:
        return FeasibleRegion("segment", hull, achieved_tolerance=achieved)

    records.sort(key=lambda r: r[0])
    outer = []
    k = len(records)
    for i in range(k):
        _, d1, _, o1 = records[i]
        _, d2, _, o2 = records[(i + 1) % k]
        det = d1[0] * d2[1] - d1[1] * d2[0]
        if abs(det) < 1e-12:
            continue
        outer.append([(o1 * d2[1] - o2 * d1[1]) / det,
                      (d1[0] * o2 - d2[0] * o1) / det])
    return FeasibleRegion("polygon", hull, outer_vertices=np.array(outer),
                          achieved_tolerance=achieved)


def feasible_region(contacts: ContactSet, state: CentroidalState,
                    tolerance: float = DEFAULT_TOLERANCE) -> FeasibleRegion:
    """Admissible reference-point region for the given stance and state.

    Three or more non-collinear active contacts yield a polygon refined to
    ``tolerance``; two (or collinear) contacts a segment along their axis;
    one contact at most a single point; an infeasible wrench balance yields
    an empty region.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    active = contacts.active()
    if not active:
        raise ValueError("feasible region needs at least one active contact")
    program = _wrench_program(contacts, state)
    if len(active) == 1:
        res = _support(program, np.array([1.0, 0.0]))
        if not res.feasible:
            return FeasibleRegion("empty", np.zeros((0, 2)))
        return FeasibleRegion("point", [res.point])
    xy = np.array([c.position[:2] for c in active])
    axis = _collinear_axis(xy)
    if axis is not None:
        if len(active) == 2 and np.linalg.norm(xy[1] - xy[0]) < 1e-12:
            raise ValueError("two contacts with coincident ground projections are degenerate")
        return _segment_region(program, axis)
    return _iterative_projection(program, tolerance)


# ---------------------------------------------------------------------------
# Signed distances and the margin.

def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom < 1e-300 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def signed_distance(p, region: FeasibleRegion) -> float:
    """Positive inside a polygon region, negative outside, zero on the boundary.

    Segment and point regions have no interior, so the result is always
    non-positive for them.  Raises ``ValueError`` for empty regions.
    """
    p = np.asarray(p, dtype=np.float64).reshape(2)
    if region.kind == "empty":
        raise ValueError("signed distance to an empty region is undefined")
    if region.kind == "point":
        return -float(np.linalg.norm(p - region.vertices[0]))
    if region.kind == "segment":
        return -_point_segment_distance(p, region.vertices[0], region.vertices[1])
    verts = region.vertices
    nxt = np.roll(verts, -1, axis=0)
    edges = nxt - verts
    rel = p[None, :] - verts
    crosses = edges[:, 0] * rel[:, 1] - edges[:, 1] * rel[:, 0]
    if (crosses >= 0).all():  # inside or on the boundary (CCW)
        lengths = np.linalg.norm(edges, axis=1)
        line_dists = crosses / np.maximum(lengths, 1e-300)
        return float(line_dists.min())
    return -min(_point_segment_distance(p, verts[i], nxt[i]) for i in range(len(verts)))


def stability_margin(state: CentroidalState, contacts: ContactSet,
                     tolerance: float = DEFAULT_TOLERANCE) -> MarginResult:
    """ICP-to-region signed distance; flagged unbounded for empty regions."""
    region = feasible_region(contacts, state, tolerance)
    icp_point = icp(state, contacts)
    if region.kind == "empty":
        return MarginResult(None, icp_point, region)
    return MarginResult(signed_distance(icp_point, region), icp_point, region)


# ---------------------------------------------------------------------------
# Feature-row schema for margin surrogate datasets.

STABILITY_FEATURE_NAMES: tuple[str, ...] = tuple(
    [f"vert_axis_{a}" for a in "xyz"]
    + [f"lin_vel_{a}" for a in "xyz"]
    + [f"ang_vel_{a}" for a in "xyz"]
    + [f"ang_acc_{a}" for a in "xyz"]
    + [f"ext_force_{a}" for a in "xyz"]
    + [f"ext_torque_{a}" for a in "xyz"]
    + [f"foot{i}_{a}" for i in range(4) for a in "xyz"]
    + [f"contact{i}" for i in range(4)]
    + [f"normal{i}_{a}" for i in range(4) for a in "xyz"]
    + ["reserved"]
)

MARGIN_LABEL_NAME = "margin"


def margin_record(state: CentroidalState, contacts: ContactSet, feet_base,
                  tolerance: float = DEFAULT_TOLERANCE) -> tuple[np.ndarray, float]:
    """Pack one 47-feature row plus its analytic margin label.

    Layout: base vertical axis (3), linear velocity (3), angular velocity
    (3), angular acceleration (3), external force (3), external torque (3),
    feet positions in the base frame (12), contact flags (4), contact
    normals (12), and one reserved padding column that rounds the listed
    46 quantities up to the declared width of 47.  The label is the margin
    in meters, NaN when the stance is flagged unbounded.
    """
    feet = np.asarray(feet_base, dtype=np.float64).reshape(4, 3)
    if len(contacts.contacts) != 4:
        raise ValueError("margin records expect a four-leg contact set")
    flags = np.array([1.0 if c.active else 0.0 for c in contacts.contacts])
    normals = np.vstack([c.normal for c in contacts.contacts])
    row = np.concatenate([
        state.vertical_axis(),
        state.com_velocity,
        state.angular_velocity,
        state.angular_acceleration,
        state.external_force,
        state.external_torque,
        feet.ravel(),
        flags,
        normals.ravel(),
        [0.0],
    ])
    assert row.shape == (len(STABILITY_FEATURE_NAMES),)
    result = stability_margin(state, contacts, tolerance)
    label = float("nan") if result.unbounded else float(result.margin)
    return row, label
