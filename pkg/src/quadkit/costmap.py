"""Edge-avoidance cost maps from elevation patches.

The pipeline runs three 3x3 correlations over an elevation patch: smoothing,
a Laplacian second-derivative approximation whose absolute value marks edges,
and a box blur that spreads the edge intensity.  A circular distance filter
then turns a local neighborhood of the cost map into a single per-foot cost.
All convolutions use replicate (clamp-to-edge) padding so outputs keep the
input dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heightfield import ElevationPatch

SMOOTHING_KERNEL = np.array([[0.1, 0.1, 0.1],
                             [0.1, 0.2, 0.1],
                             [0.1, 0.1, 0.1]])

LAPLACIAN_KERNEL = np.array([[-1.0, -1.0, -1.0],
                             [-1.0, 8.0, -1.0],
                             [-1.0, -1.0, -1.0]])

BLUR_KERNEL = np.full((3, 3), 1.0 / 9.0)

DEFAULT_FOOT_RADIUS = 0.05

# each 3x3 stage reads one cell beyond its output; the 3-stage pipeline
# therefore needs 3 context cells for sub-patch results to match the full map
_PIPELINE_MARGIN = 3


@dataclass(frozen=True)
class CostMap:
    """Non-negative edge costs aligned cell-for-cell with a source patch."""

    values: np.ndarray
    resolution: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("cost map must be 2D")
        if values.min() < 0:
            raise ValueError("cost map values must be non-negative")
        object.__setattr__(self, "values", values)


def convolve3(field: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Replicate-padded 2D correlation with a 3x3 kernel; output keeps shape.

    Ring terms are summed pairwise before the center term is added, so a
    constant field cancels exactly under the zero-sum Laplacian kernel
    instead of leaving round-off residue.
    """
    field = np.asarray(field, dtype=np.float64)
    if field.ndim != 2 or field.shape[0] < 3 or field.shape[1] < 3:
        raise ValueError(f"field must be at least 3x3, got shape {field.shape}")
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape != (3, 3):
        raise ValueError("kernel must be 3x3")
    rows, cols = field.shape
    padded = np.pad(field, 1, mode="edge")

    def term(dr, dc):
        return kernel[dr + 1, dc + 1] * padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]

    ring = (((term(-1, -1) + term(-1, 0)) + (term(-1, 1) + term(0, -1)))
            + ((term(0, 1) + term(1, -1)) + (term(1, 0) + term(1, 1))))
    return ring + term(0, 0)


def _edge_cost_values(field: np.ndarray) -> np.ndarray:
    smoothed = convolve3(field, SMOOTHING_KERNEL)
    edges = np.abs(convolve3(smoothed, LAPLACIAN_KERNEL))
    return convolve3(edges, BLUR_KERNEL)


def edge_cost_map(patch: ElevationPatch) -> CostMap:
    """Full edge-cost map of a patch: smooth, Laplacian, absolute value, blur."""
    return CostMap(_edge_cost_values(patch.values), patch.resolution)


def disc_weights(radius: float, resolution: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Circular distance filter on the cell grid.

    Returns (weights, mask, half_width).  Weights fall linearly from the
    center, w(r) = max(0, 1 - r/radius), and are normalized to sum to one
    over the disc.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    half = int(np.floor(radius / resolution))
    offs = np.arange(-half, half + 1) * resolution
    dx, dy = np.meshgrid(offs, offs)
    r = np.hypot(dx, dy)
    weights = np.maximum(0.0, 1.0 - r / radius)
    mask = weights > 0.0
    total = weights.sum()
    if total <= 0.0:  # radius below one cell: degenerate single-cell disc
        weights = np.zeros_like(weights)
        weights[half, half] = 1.0
        mask = weights > 0.0
        total = 1.0
    return weights / total, mask, half


def foot_edge_cost(patch: ElevationPatch, foot_xy, radius: float = DEFAULT_FOOT_RADIUS) -> float:
    """Disc-weighted edge cost around a foot position (patch-frame meters).

    Only a sub-patch around the foot is filtered; with replicate padding the
    result equals the disc sum over the full-patch cost map.
    """
    weights, _, half = disc_weights(radius, patch.resolution)
    n = patch.values.shape[0]
    center = n // 2
    col = foot_xy[0] / patch.resolution + center
    row = foot_xy[1] / patch.resolution + center
    ci, ri = int(round(col)), int(round(row))
    if not (0 <= ci < n and 0 <= ri < n):
        raise ValueError(f"foot position {tuple(foot_xy)} outside the patch")

    reach = half + _PIPELINE_MARGIN
    r_lo, r_hi = ri - reach, ri + reach + 1
    c_lo, c_hi = ci - reach, ci + reach + 1
    pad_top, pad_bottom = max(0, -r_lo), max(0, r_hi - n)
    pad_left, pad_right = max(0, -c_lo), max(0, c_hi - n)
    sub = patch.values[max(0, r_lo):min(n, r_hi), max(0, c_lo):min(n, c_hi)]
    if pad_top or pad_bottom or pad_left or pad_right:
        sub = np.pad(sub, ((pad_top, pad_bottom), (pad_left, pad_right)), mode="edge")
    cost = _edge_cost_values(sub)
    m = _PIPELINE_MARGIN
    window = cost[m:m + 2 * half + 1, m:m + 2 * half + 1]
    return float((window * weights).sum())
