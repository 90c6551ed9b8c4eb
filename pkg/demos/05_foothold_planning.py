"""Baseline foothold planning: blind vs perceptive, swing splines, gating.

On a staircase tile the blind planner drops feet wherever the QP puts them;
the perceptive variant nudges each foot within a 5 cm disc to avoid tread
edges.  Swing trajectories then clear the terrain by construction, and the
velocity gate screens commands whose short-horizon path crosses a ledge.
"""

import numpy as np

from quadkit.planner import (
    CommandLimits,
    VelocityCommand,
    nominal_query,
    plan_footholds_blind,
    plan_footholds_perceptive,
    resample_command,
    swing_trajectory,
    velocity_gate,
)
from quadkit.terrain import Stairs, TerrainObjectSpec, compose_eval_terrain

hf = compose_eval_terrain(TerrainObjectSpec(Stairs(4, 0.3, 0.3), footprint=2.4),
                          length=2.4, seed=5)
query = nominal_query(base_pose=(-0.3, 0.0, 0.0))

blind = plan_footholds_blind(query, hf)
percep = plan_footholds_perceptive(query, hf, radius=0.05)
names = ["LF", "RF", "LH", "RH"]
print("Foothold plans on a staircase (world frame):")
print("  foot   blind (x, y, z)              perceptive (x, y, z)        shift")
for name, b, p in zip(names, blind, percep):
    shift = np.linalg.norm(p[:2] - b[:2]) * 100
    print(f"  {name}   ({b[0]:+.3f}, {b[1]:+.3f}, {b[2]:.3f})   "
          f"({p[0]:+.3f}, {p[1]:+.3f}, {p[2]:.3f})   {shift:4.1f} cm")

print("\nSwing trajectory for the left-front foot:")
spline = swing_trajectory(start=(blind[0, 0], blind[0, 1], blind[0, 2]),
                          end=(blind[0, 0] + 0.3, blind[0, 1], 0.15), hf=hf)
print(f"  apex at ({spline.apex[0]:+.3f}, {spline.apex[1]:+.3f}) "
      f"z = {spline.apex[2]:.3f} m (terrain max + 5 cm clearance)")
for t in (0.0, 0.25, 0.5, 0.75, 1.0):
    p = spline.position(t)
    print(f"  t = {t:4.2f}: ({p[0]:+.3f}, {p[1]:+.3f}, {p[2]:.3f})")

print("\nVelocity gate on a 0.5 m ledge 0.05 m ahead (0.4 s horizon):")
from quadkit.heightfield import Heightfield, meters_to_code

ledge = Heightfield.zeros(201, 201)
cells = ledge.cells.copy()
xs = ledge.origin[0] + np.arange(ledge.cols) * ledge.resolution
cells[:, xs >= 0.05] = meters_to_code(0.5, ledge.z_scale)
ledge = Heightfield(cells, ledge.resolution, ledge.z_scale, ledge.origin)

for vx in (0.1, 0.3):
    cmd = VelocityCommand((vx, 0.0), 0.0)
    verdict = "accept" if velocity_gate(ledge, (0, 0, 0), cmd) else "reject"
    print(f"  forward {vx:.1f} m/s covers {vx * 0.4:.2f} m -> {verdict}")

print("\nRejection-sampling a safe command in front of the ledge (seeded):")
cmd = resample_command(ledge, (0, 0, 0), seed=11,
                       limits=CommandLimits(v_x=(-0.5, 0.5), v_y=(-0.2, 0.2)))
print(f"  accepted command: v = ({cmd.v_xy[0]:+.3f}, {cmd.v_xy[1]:+.3f}) m/s, "
      f"yaw rate {cmd.yaw_rate:+.3f} rad/s")
