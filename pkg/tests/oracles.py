"""Independent oracles for stability checks.

Everything here is deliberately built without quadkit's LP machinery: the
wrench constraints are re-derived from scratch and feasibility is decided
by scipy's linprog, so agreement with the library is a genuine dual-route
check.
"""

import math

import numpy as np
from scipy.optimize import linprog


def _tangent_basis(normal):
    ref = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = ref - np.dot(ref, normal) * normal
    t1 /= np.linalg.norm(t1)
    return t1, np.cross(normal, t1)


def point_feasible(contacts, state, point, n_edges=4):
    """Can contact forces balance the wrench with the reference at ``point``?

    Re-derives force balance, the three moment rows about the origin (with
    gravity and the external force applied at (x, y, z_com)), the friction
    pyramid, and the normal force caps, then asks scipy for feasibility.
    """
    active = [c for c in contacts.contacts if c.active]
    k = len(active)
    x, y = float(point[0]), float(point[1])
    m, g = state.mass, state.gravity
    f_ext = state.external_force
    tau = state.external_torque
    z_com = float(state.com_position[2])
    h_rot = state.inertia @ state.angular_acceleration + np.cross(
        state.angular_velocity, state.inertia @ state.angular_velocity)

    a_eq = np.zeros((6, 3 * k))
    b_eq = np.zeros(6)
    for i in range(k):
        a_eq[0:3, 3 * i:3 * i + 3] = np.eye(3)
    b_eq[0:3] = np.array([0.0, 0.0, m * g]) - f_ext
    for i, c in enumerate(active):
        px, py, pz = c.position
        a_eq[3:6, 3 * i:3 * i + 3] = np.array([[0, -pz, py], [pz, 0, -px], [-py, px, 0]])
    b_eq[3] = (m * g - f_ext[2]) * y + z_com * f_ext[1] - tau[0] + h_rot[0]
    b_eq[4] = (f_ext[2] - m * g) * x - z_com * f_ext[0] - tau[1] + h_rot[1]
    b_eq[5] = f_ext[0] * y - f_ext[1] * x - tau[2] + h_rot[2]

    rows, rhs = [], []
    for i, c in enumerate(active):
        row = np.zeros(3 * k)
        row[3 * i:3 * i + 3] = -c.normal
        rows.append(row)
        rhs.append(0.0)
        if math.isfinite(c.f_max):
            row = np.zeros(3 * k)
            row[3 * i:3 * i + 3] = c.normal
            rows.append(row)
            rhs.append(c.f_max)
        if math.isfinite(c.friction_mu):
            t1, t2 = _tangent_basis(c.normal)
            for j in range(n_edges):
                theta = 2 * math.pi * j / n_edges
                edge = math.cos(theta) * t1 + math.sin(theta) * t2
                row = np.zeros(3 * k)
                row[3 * i:3 * i + 3] = edge - c.friction_mu * c.normal
                rows.append(row)
                rhs.append(0.0)
    res = linprog(np.zeros(3 * k), A_ub=np.array(rows), b_ub=np.array(rhs),
                  A_eq=a_eq, b_eq=b_eq, bounds=[(None, None)] * (3 * k),
                  method="highs")
    return res.status == 0


def feasibility_grid(contacts, state, pitch=0.01, margin=0.05):
    """Brute-force per-cell feasibility scan over the contact bounding box."""
    xy = np.array([c.position[:2] for c in contacts.contacts if c.active])
    x_lo, y_lo = xy.min(axis=0) - margin
    x_hi, y_hi = xy.max(axis=0) + margin
    xs = np.arange(x_lo, x_hi + pitch / 2, pitch)
    ys = np.arange(y_lo, y_hi + pitch / 2, pitch)
    feasible = np.zeros((len(ys), len(xs)), dtype=bool)
    for yi, y in enumerate(ys):
        for xi, x in enumerate(xs):
            feasible[yi, xi] = point_feasible(contacts, state, (x, y))
    return xs, ys, feasible


def polygon_signed_distance(point, vertices):
    """Plain point-polygon signed distance (positive inside, CCW vertices)."""
    p = np.asarray(point, dtype=float)
    verts = np.asarray(vertices, dtype=float)
    nxt = np.roll(verts, -1, axis=0)
    inside = True
    best = math.inf
    for a, b in zip(verts, nxt):
        edge = b - a
        cross = edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])
        if cross < 0:
            inside = False
        t = np.clip(np.dot(p - a, edge) / max(np.dot(edge, edge), 1e-300), 0.0, 1.0)
        best = min(best, float(np.linalg.norm(p - (a + t * edge))))
    return best if inside else -best
