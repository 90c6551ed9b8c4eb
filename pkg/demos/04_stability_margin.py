"""Feasible regions and ICP stability margins across stance configurations.

Walks through the four-leg polygon case (with friction and force-cap
variations), the two-leg segment and one-leg point cases, an infeasible
stance, and ends with a timing measurement of the iterative projection.
"""

import time

import numpy as np

from quadkit.stability import (
    CentroidalState,
    Contact,
    ContactSet,
    feasible_region,
    stability_margin,
)

FEET = [(0.35, 0.2), (0.35, -0.2), (-0.35, 0.2), (-0.35, -0.2)]


def stance(points, mu=0.6, f_max=float("inf")):
    return ContactSet(tuple(Contact((x, y, 0.0), friction_mu=mu, f_max=f_max)
                            for x, y in points))


def show(title, result):
    region = result.region
    if result.unbounded:
        print(f"  {title:34s} region {region.kind:8s} margin: unbounded instability")
        return
    print(f"  {title:34s} region {region.kind:8s} margin {result.margin:+.3f} m "
          f"(area {region.area():.3f} m^2)")


state = CentroidalState(com_position=(0.0, 0.0, 0.45))
moving = CentroidalState(com_position=(0.0, 0.0, 0.45), com_velocity=(0.6, 0.0, 0.0))
weight = 30.0 * 9.81

print("Four-leg stance (0.70 x 0.40 m):")
show("standing, mu = 0.6", stability_margin(state, stance(FEET), 0.005))
show("walking fast (ICP shifts forward)", stability_margin(moving, stance(FEET), 0.005))
show("force caps at 40% of the weight",
     stability_margin(state, stance(FEET, f_max=0.4 * weight), 0.005))
show("caps below 25% of the weight",
     stability_margin(state, stance(FEET, f_max=0.22 * weight), 0.005))

print("\nDegenerate stances:")
diag = [(0.35, 0.2), (-0.35, -0.2)]
show("two-leg diagonal support", stability_margin(state, stance(diag), 0.005))
single = stance([(0.35, 0.2)])
lean = CentroidalState(com_position=(0.35, 0.2, 0.45))
show("one leg, CoM above the foot", stability_margin(lean, single, 0.005))
show("one leg, CoM at the center", stability_margin(state, single, 0.005))

print("\nRegion geometry detail (standing four-leg stance):")
region = feasible_region(stance(FEET), state, 0.005)
print(f"  inner vertices ({len(region.vertices)}):")
for v in region.vertices:
    print(f"    ({v[0]:+.3f}, {v[1]:+.3f})")
print(f"  achieved inner/outer gap: {region.achieved_tolerance * 1000:.2f} mm")

times = []
for _ in range(101):
    t0 = time.perf_counter()
    stability_margin(state, stance(FEET), 0.01)
    times.append(time.perf_counter() - t0)
print(f"\nMedian margin query at 1 cm tolerance: {np.median(times) * 1e3:.2f} ms")
