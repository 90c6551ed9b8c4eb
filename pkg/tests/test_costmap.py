import numpy as np
import pytest

from quadkit.costmap import (
    BLUR_KERNEL,
    LAPLACIAN_KERNEL,
    SMOOTHING_KERNEL,
    CostMap,
    convolve3,
    disc_weights,
    edge_cost_map,
    foot_edge_cost,
)
from quadkit.heightfield import PATCH_SIZE, ElevationPatch


def brute_force_correlate(field: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Independent direct-summation correlation with clamp-to-edge padding."""
    rows, cols = field.shape
    out = np.zeros_like(field, dtype=np.float64)
    for r in range(rows):
        for c in range(cols):
            acc = 0.0
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr = min(max(r + dr, 0), rows - 1)
                    cc = min(max(c + dc, 0), cols - 1)
                    acc += field[rr, cc] * kernel[dr + 1, dc + 1]
            out[r, c] = acc
    return out


def brute_force_pipeline(field: np.ndarray) -> np.ndarray:
    smoothed = brute_force_correlate(field, SMOOTHING_KERNEL)
    edges = np.abs(brute_force_correlate(smoothed, LAPLACIAN_KERNEL))
    return brute_force_correlate(edges, BLUR_KERNEL)


def patch_with(values_center: np.ndarray) -> ElevationPatch:
    """Embed a small block at the middle of an otherwise flat patch."""
    values = np.zeros((PATCH_SIZE, PATCH_SIZE))
    r0 = (PATCH_SIZE - values_center.shape[0]) // 2
    c0 = (PATCH_SIZE - values_center.shape[1]) // 2
    values[r0:r0 + values_center.shape[0], c0:c0 + values_center.shape[1]] = values_center
    return ElevationPatch(values)


def edge_patch(step_col: int = PATCH_SIZE // 2, height: float = 0.1) -> ElevationPatch:
    values = np.zeros((PATCH_SIZE, PATCH_SIZE))
    values[:, step_col:] = height
    return ElevationPatch(values)


class TestKernels:
    def test_smoothing_kernel_definition(self):
        assert SMOOTHING_KERNEL[1, 1] == 0.2
        ring = SMOOTHING_KERNEL.copy()
        ring[1, 1] = 0.0
        assert np.all(ring[ring != 0] == 0.1)
        assert SMOOTHING_KERNEL.sum() == pytest.approx(1.0)

    def test_laplacian_kernel_definition(self):
        assert LAPLACIAN_KERNEL[1, 1] == 8.0
        assert LAPLACIAN_KERNEL.sum() == pytest.approx(0.0)

    def test_blur_kernel_definition(self):
        assert np.allclose(BLUR_KERNEL, 1.0 / 9.0)
        assert BLUR_KERNEL.sum() == pytest.approx(1.0)


class TestConvolve3:
    def test_constant_field_smoothing_preserved(self):
        field = np.full((10, 10), 3.7)
        assert np.allclose(convolve3(field, SMOOTHING_KERNEL), 3.7, atol=1e-12)

    def test_constant_field_laplacian_zero(self):
        field = np.full((10, 10), 3.7)
        assert np.allclose(convolve3(field, LAPLACIAN_KERNEL), 0.0, atol=1e-12)

    def test_step_field_matches_hand_convolution(self):
        field = np.zeros((6, 6))
        field[:, 3:] = 1.0
        for kernel in (SMOOTHING_KERNEL, LAPLACIAN_KERNEL, BLUR_KERNEL):
            assert np.allclose(convolve3(field, kernel),
                               brute_force_correlate(field, kernel), atol=1e-12)

    def test_random_fields_match_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            field = rng.normal(size=(10, 10))
            kernel = rng.choice([SMOOTHING_KERNEL, LAPLACIAN_KERNEL, BLUR_KERNEL])
            assert np.allclose(convolve3(field, kernel),
                               brute_force_correlate(field, kernel), atol=1e-12)

    def test_too_small_field_rejected(self):
        with pytest.raises(ValueError, match="3x3"):
            convolve3(np.zeros((2, 5)), SMOOTHING_KERNEL)

    def test_output_keeps_shape(self):
        field = np.random.default_rng(1).normal(size=(7, 9))
        assert convolve3(field, BLUR_KERNEL).shape == (7, 9)


class TestEdgeCostMap:
    def test_zero_patch_zero_cost(self):
        patch = ElevationPatch(np.zeros((PATCH_SIZE, PATCH_SIZE)))
        cost = edge_cost_map(patch)
        assert np.all(cost.values == 0.0)

    def test_step_edge_band_positive_far_field_zero(self):
        patch = edge_patch()
        cost = edge_cost_map(patch).values
        mid = PATCH_SIZE // 2
        assert cost[:, mid - 1:mid + 1].min() > 0.0
        assert np.all(cost[:, :mid - 3] == pytest.approx(0.0, abs=1e-15))
        assert np.all(cost[:, mid + 4:] == pytest.approx(0.0, abs=1e-15))

    def test_doubling_heights_doubles_cost(self):
        rng = np.random.default_rng(2)
        values = rng.uniform(0, 0.5, (PATCH_SIZE, PATCH_SIZE))
        single = edge_cost_map(ElevationPatch(values)).values
        double = edge_cost_map(ElevationPatch(2 * values)).values
        assert np.allclose(double, 2 * single, atol=1e-12)

    def test_constant_offset_invariance(self):
        rng = np.random.default_rng(3)
        values = rng.uniform(0, 0.5, (PATCH_SIZE, PATCH_SIZE))
        base = edge_cost_map(ElevationPatch(values)).values
        lifted = edge_cost_map(ElevationPatch(values + 0.75)).values
        assert np.allclose(base, lifted, atol=1e-10)

    def test_rotation_and_mirror_equivariance(self):
        rng = np.random.default_rng(4)
        values = rng.uniform(0, 0.5, (PATCH_SIZE, PATCH_SIZE))
        base = edge_cost_map(ElevationPatch(values)).values
        rot = edge_cost_map(ElevationPatch(np.rot90(values))).values
        assert np.allclose(rot, np.rot90(base), atol=1e-12)
        mirrored = edge_cost_map(ElevationPatch(values[:, ::-1])).values
        assert np.allclose(mirrored, base[:, ::-1], atol=1e-12)

    def test_matches_brute_force_pipeline(self):
        rng = np.random.default_rng(5)
        values = np.zeros((PATCH_SIZE, PATCH_SIZE))
        values[40:60, 30:50] = rng.uniform(0, 0.3, (20, 20))
        got = edge_cost_map(ElevationPatch(values)).values
        assert np.allclose(got, brute_force_pipeline(values), atol=1e-12)

    def test_costmap_rejects_negative_values(self):
        with pytest.raises(ValueError):
            CostMap(np.array([[-1.0, 0.0], [0.0, 0.0]]), 0.02)


class TestFootEdgeCost:
    def test_flat_patch_zero(self):
        patch = ElevationPatch(np.zeros((PATCH_SIZE, PATCH_SIZE)))
        assert foot_edge_cost(patch, (0.0, 0.0)) == 0.0

    def test_on_edge_costs_more_than_beside(self):
        patch = edge_patch()
        on_edge = foot_edge_cost(patch, (0.0, 0.0))
        away = foot_edge_cost(patch, (-0.4, 0.0))
        assert on_edge > away
        assert away == pytest.approx(0.0, abs=1e-15)

    def test_matches_full_map_disc_sum(self):
        # oracle: full-map pipeline then explicit disc-weighted summation
        patch = edge_patch(step_col=48, height=0.2)
        full = edge_cost_map(patch).values
        radius = 0.05
        weights, _, half = disc_weights(radius, patch.resolution)
        for foot in [(0.0, 0.0), (0.04, -0.06), (-0.5, 0.3)]:
            ci = int(round(foot[0] / patch.resolution)) + PATCH_SIZE // 2
            ri = int(round(foot[1] / patch.resolution)) + PATCH_SIZE // 2
            window = full[ri - half:ri + half + 1, ci - half:ci + half + 1]
            oracle = float((window * weights).sum())
            assert foot_edge_cost(patch, foot, radius) == pytest.approx(oracle, abs=1e-12)

    def test_single_cell_disc_returns_center_value(self):
        patch = edge_patch()
        tiny = 0.25 * patch.resolution  # below one cell: degenerate disc
        full = edge_cost_map(patch).values
        mid = PATCH_SIZE // 2
        assert foot_edge_cost(patch, (0.0, 0.0), radius=tiny) == \
            pytest.approx(full[mid, mid], abs=1e-12)

    def test_monotone_decrease_away_from_edge(self):
        patch = edge_patch()
        xs = np.arange(0.0, -0.5, -0.02)
        costs = [foot_edge_cost(patch, (x, 0.0)) for x in xs]
        assert all(a >= b - 1e-15 for a, b in zip(costs, costs[1:]))

    def test_outside_patch_rejected(self):
        patch = edge_patch()
        with pytest.raises(ValueError, match="outside"):
            foot_edge_cost(patch, (2.0, 0.0))

    def test_disc_weights_normalized_and_peaked(self):
        weights, mask, half = disc_weights(0.05, 0.02)
        assert weights.sum() == pytest.approx(1.0)
        assert weights[half, half] == weights.max()
        corner = weights[0, 0]
        assert corner == 0.0  # corner lies beyond the disc radius
