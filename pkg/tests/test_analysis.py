import numpy as np
import pytest

from quadkit.analysis import (
    GridSpec,
    SuccessGrid,
    TrialRecord,
    grid_to_csv,
    grid_to_pgm,
    kde_success_grid,
    silverman_bandwidth,
    trials_from_csv,
)


def trials_at(points, outcomes):
    return [TrialRecord(x, y, ok) for (x, y), ok in zip(points, outcomes)]


def scattered(n, seed, success_fn):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1, (n, 2))
    return [TrialRecord(x, y, success_fn(x, y)) for x, y in pts]


class TestGridSpec:
    def test_bad_bounds_rejected(self):
        with pytest.raises(ValueError):
            GridSpec(1.0, 0.0, 0.0, 1.0)

    def test_covering_includes_data(self):
        trials = scattered(50, 0, lambda x, y: True)
        spec = GridSpec.covering(trials)
        xs = [t.x for t in trials]
        assert spec.x_min <= min(xs) and spec.x_max >= max(xs)


class TestKdeSuccessGrid:
    def test_all_success_gives_ones(self):
        trials = scattered(40, 1, lambda x, y: True)
        grid = kde_success_grid(trials, GridSpec(0, 1, 0, 1, 21, 21))
        assert np.all(grid.values[grid.supported] == pytest.approx(1.0))

    def test_all_failure_gives_zeros(self):
        trials = scattered(40, 2, lambda x, y: False)
        grid = kde_success_grid(trials, GridSpec(0, 1, 0, 1, 21, 21))
        assert np.all(grid.values[grid.supported] == pytest.approx(0.0))

    def test_colocated_mixed_gives_exact_ratio(self):
        # 3 successes and 3 failures at the same parameter point
        trials = trials_at([(0.5, 0.5)] * 6, [True, True, True, False, False, False])
        grid = kde_success_grid(trials, GridSpec(0, 1, 0, 1, 21, 21), bandwidth=(0.1, 0.1))
        xi = 10  # node exactly at (0.5, 0.5)
        assert grid.values[xi, xi] == pytest.approx(0.5, abs=1e-12)
        # every supported node sees the same 0.5 ratio (weights cancel)
        assert np.all(grid.values[grid.supported] == pytest.approx(0.5))

    def test_duplicating_trials_is_invariant(self):
        trials = scattered(30, 3, lambda x, y: x > 0.5)
        spec = GridSpec(0, 1, 0, 1, 15, 15)
        once = kde_success_grid(trials, spec, bandwidth=(0.2, 0.2))
        twice = kde_success_grid(trials + trials, spec, bandwidth=(0.2, 0.2))
        assert np.allclose(once.values, twice.values, equal_nan=True)

    def test_axis_swap_transposes(self):
        trials = scattered(30, 4, lambda x, y: x + y > 1)
        spec = GridSpec(0, 1, 0, 1, 15, 15)
        base = kde_success_grid(trials, spec, bandwidth=(0.15, 0.25))
        swapped_trials = [TrialRecord(t.y, t.x, t.success) for t in trials]
        swapped = kde_success_grid(swapped_trials, spec, bandwidth=(0.25, 0.15))
        assert np.allclose(swapped.values, base.values.T, equal_nan=True)

    def test_small_bandwidth_recovers_cluster_means(self):
        cluster_a = trials_at([(0.2, 0.2)] * 4, [True, True, False, False])
        cluster_b = trials_at([(0.8, 0.8)] * 5, [True] * 4 + [False])
        grid = kde_success_grid(cluster_a + cluster_b,
                                GridSpec(0, 1, 0, 1, 11, 11), bandwidth=(0.01, 0.01))
        # nodes exactly on the clusters
        assert grid.values[2, 2] == pytest.approx(0.5, abs=1e-9)
        assert grid.values[8, 8] == pytest.approx(0.8, abs=1e-9)

    def test_far_cells_flagged_unsupported(self):
        trials = trials_at([(0.1, 0.1)] * 4, [True, False, True, False])
        grid = kde_success_grid(trials, GridSpec(0, 10, 0, 10, 11, 11),
                                bandwidth=(0.05, 0.05))
        assert not grid.supported[-1, -1]
        assert np.isnan(grid.values[-1, -1])

    def test_bounded_probabilities(self):
        trials = scattered(200, 5, lambda x, y: x * y > 0.3)
        grid = kde_success_grid(trials, GridSpec(0, 1, 0, 1, 31, 31))
        vals = grid.values[grid.supported]
        assert vals.min() >= 0.0 and vals.max() <= 1.0

    def test_too_few_trials_rejected(self):
        with pytest.raises(ValueError):
            kde_success_grid([TrialRecord(0, 0, True)], GridSpec(0, 1, 0, 1))

    def test_zero_bandwidth_rejected(self):
        trials = scattered(10, 6, lambda x, y: True)
        with pytest.raises(ValueError):
            kde_success_grid(trials, GridSpec(0, 1, 0, 1), bandwidth=(0.0, 0.1))

    def test_silverman_default_used(self):
        trials = scattered(50, 7, lambda x, y: True)
        grid = kde_success_grid(trials, GridSpec(0, 1, 0, 1, 5, 5))
        xs = np.array([t.x for t in trials])
        assert grid.bandwidth[0] == pytest.approx(silverman_bandwidth(xs))


class TestIo:
    def test_trials_csv_round_trip(self):
        text = "x,y,success,metadata\n0.1,0.2,1,alpha\n0.3,0.4,false,\n"
        trials = trials_from_csv(text)
        assert trials[0] == TrialRecord(0.1, 0.2, True, "alpha")
        assert trials[1].success is False

    def test_missing_columns_rejected(self):
        with pytest.raises(ValueError, match="columns"):
            trials_from_csv("a,b\n1,2\n")

    def test_grid_csv_contains_all_cells(self):
        trials = scattered(20, 8, lambda x, y: True)
        grid = kde_success_grid(trials, GridSpec(0, 1, 0, 1, 4, 3))
        lines = grid_to_csv(grid).splitlines()
        assert lines[0] == "x,y,probability,supported"
        assert len(lines) == 1 + 4 * 3

    def test_pgm_header_and_size(self):
        trials = scattered(20, 9, lambda x, y: True)
        grid = kde_success_grid(trials, GridSpec(0, 1, 0, 1, 7, 5))
        data = grid_to_pgm(grid)
        assert data.startswith(b"P5\n7 5\n255\n")
        assert len(data) == len(b"P5\n7 5\n255\n") + 7 * 5

    def test_grid_type_validates_probabilities(self):
        with pytest.raises(ValueError):
            SuccessGrid(np.arange(2.0), np.arange(2.0),
                        np.array([[1.5, 0.0], [0.0, 0.0]]),
                        np.ones((2, 2), dtype=bool), (1.0, 1.0))
