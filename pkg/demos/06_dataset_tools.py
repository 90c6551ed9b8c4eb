"""Dataset tooling: SMOGN rebalancing, randomization draws, KDE surfaces.

Builds an imbalanced synthetic regression set and rebalances it, prints a
table of domain-randomization draws for each policy flavor, and estimates a
success-rate surface from noisy trials, writing CSV and PGM artifacts.
"""

from pathlib import Path

import numpy as np

from quadkit.analysis import GridSpec, TrialRecord, grid_to_csv, grid_to_pgm, kde_success_grid
from quadkit.datasets import (
    RandomizationConfig,
    RecordSet,
    RelevanceSpec,
    damping_filter,
    records_to_csv,
    sample_randomization,
    smogn_resample,
)

OUT = Path(__file__).resolve().parent.parent / "demo_output"
OUT.mkdir(exist_ok=True)

# --- SMOGN -----------------------------------------------------------------
rng = np.random.default_rng(0)
common = np.column_stack([rng.normal(0, 1, (450, 3)), rng.choice([-0.1, 0.0, 0.1], 450)])
rare = np.column_stack([rng.normal(4, 1, (50, 3)), rng.choice([4.9, 5.0, 5.1], 50)])
rows = RecordSet(("f0", "f1", "f2", "label"), np.vstack([common, rare]))
spec = RelevanceSpec(method="histogram-rarity", threshold=0.5, k_neighbors=5)
balanced, provenance = smogn_resample(rows, spec, seed=1, return_provenance=True)
kinds = {k: sum(p.kind == k for p in provenance) for k in ("original", "smoter", "noise")}
print("SMOGN rebalancing a 90/10 regression set:")
print(f"  input: {len(rows)} rows, rare share {float((rows.labels > 2).mean()):.2f}")
print(f"  output: {len(balanced)} rows, rare share "
      f"{float((balanced.labels > 2).mean()):.2f}")
print(f"  row provenance: {kinds}")
(OUT / "balanced.csv").write_text(records_to_csv(balanced))

# --- Domain randomization ----------------------------------------------------
print("\nDomain randomization draws (seed 7):")
cfg = RandomizationConfig()
print("  policy     gravity  torque  mass   size   damping  force (N)        dur")
for kind in ("footstep", "tracking", "recovery"):
    d = sample_randomization(cfg, kind, seed=7)
    print(f"  {kind:9s}  {d.gravity:6.3f}  {d.torque_scale:5.3f}  {d.mass_scale:5.3f} "
          f"{d.size_scale:6.3f}  {d.damping_gain:6.3f}  "
          f"({d.force_xy[0]:+6.1f}, {d.force_xy[1]:+6.1f})  {d.duration:4.2f}")

print("\nActuator damping filter pulling joints toward a step command:")
target = np.full(3, 1.0)
state = np.zeros(3)
for step in range(5):
    state = damping_filter(target, state, damping_gain=0.8)
    print(f"  step {step}: {state[0]:.4f}")

# --- KDE success surface -----------------------------------------------------
print("\nKDE success surface over (push force, push duration):")
trial_rng = np.random.default_rng(3)
trials = []
for _ in range(400):
    force = trial_rng.uniform(0, 200)
    duration = trial_rng.uniform(0.5, 2.5)
    # synthetic ground truth: failures grow with the force-duration product
    p_success = 1.0 / (1.0 + np.exp((force * duration - 150) / 40))
    trials.append(TrialRecord(force, duration, bool(trial_rng.uniform() < p_success)))
grid = kde_success_grid(trials, GridSpec(0, 200, 0.5, 2.5, 40, 30))
(OUT / "success_surface.csv").write_text(grid_to_csv(grid))
(OUT / "success_surface.pgm").write_bytes(grid_to_pgm(grid))
supported = grid.values[grid.supported]
print(f"  bandwidths: {grid.bandwidth[0]:.1f} N, {grid.bandwidth[1]:.2f} s")
print(f"  probability range over supported cells: "
      f"[{supported.min():.2f}, {supported.max():.2f}]")
print(f"  artifacts: {OUT / 'success_surface.csv'}, {OUT / 'success_surface.pgm'}")
