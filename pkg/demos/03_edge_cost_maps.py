"""Edge cost maps: from an elevation patch to per-foot edge penalties.

Renders a coarse ASCII view of the cost map around a step edge and sweeps a
foot across it to show how the disc-weighted cost peaks on the edge and
fades with distance.
"""

import numpy as np

from quadkit.costmap import edge_cost_map, foot_edge_cost
from quadkit.heightfield import slice_patch
from quadkit.terrain import Stairs, TerrainObjectSpec, compose_eval_terrain

hf = compose_eval_terrain(TerrainObjectSpec(Stairs(4, 0.4, 0.3), footprint=2.8),
                          length=2.8, seed=3)
patch = slice_patch(hf, center=(0.0, 0.0), yaw=0.0)
cost = edge_cost_map(patch)

print("Cost map (downsampled ASCII, '#' = strong edge):")
shades = " .:-=+*#"
sub = cost.values[::6, ::6]
scale = sub.max() or 1.0
for row in sub:
    print("   " + "".join(shades[min(int(v / scale * (len(shades) - 1)), 7)] for v in row))

print("\nSweeping a foot across one step edge (radius 0.05 m):")
for x in np.arange(-0.30, 0.31, 0.05):
    c = foot_edge_cost(patch, (float(x), 0.0), radius=0.05)
    bar = "#" * int(c / (cost.values.max() + 1e-12) * 40)
    print(f"  x = {x:+5.2f} m  cost {c:8.5f}  {bar}")

print("\nCosts are zero on flat ground, peak on tread edges, and a doubled")
print("terrain doubles every cost (the pipeline is linear up to the")
print("absolute value).")
