"""Model-based computational core for quadruped locomotion.

Subpackages cover procedural terrain synthesis and 16-bit PNG encoding,
robot-local elevation patches, edge-avoidance cost maps, the ICP/feasible
region stability margin with its LP machinery, baseline foothold planning,
reward-term evaluation, dataset resampling and domain-randomization
samplers, and kernel-weighted success-rate analysis.
"""

__version__ = "0.1.0"
