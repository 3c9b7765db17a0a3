#!/usr/bin/env python3
"""
Unit Tests for Synthetic Dataset Generation
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the respa_bench directory to sys.path for imports
current_dir = Path(__file__).parent
app_dir = current_dir.parent.parent
sys.path.insert(0, str(app_dir))

from core.data import SyntheticSpec, desk_datasets, generate_synthetic, nearest_mean_accuracy
from core.utils.errors import BenchError


class TestSyntheticSpec:
    """
    Construction and validation of blob specifications
    """

    def test_random_means_shape_and_distance(self):
        spec = SyntheticSpec.with_random_means(d=16, num_classes=4, seed=2)
        assert spec.means.shape == (4, 16)
        assert spec.d == 16 and spec.num_classes == 4
        # orthonormal directions at radius 0.3 from the cube center
        offsets = spec.means - 0.5
        assert np.allclose(np.linalg.norm(offsets, axis=1), 0.3)
        assert np.allclose(offsets @ offsets.T, 0.09 * np.eye(4), atol=1e-12)

    def test_means_depend_only_on_seed(self):
        a = SyntheticSpec.with_random_means(d=8, num_classes=3, seed=5)
        b = SyntheticSpec.with_random_means(d=8, num_classes=3, seed=5, samples_per_class=3)
        c = SyntheticSpec.with_random_means(d=8, num_classes=3, seed=6)
        assert np.array_equal(a.means, b.means)
        assert not np.array_equal(a.means, c.means)

    def test_duplicate_means_rejected(self):
        with pytest.raises(BenchError):
            SyntheticSpec(means=[[0.2, 0.2], [0.2, 0.2]], sigma=0.1, samples_per_class=1)

    @pytest.mark.parametrize("kwargs", [
        {'means': [[0.2, 0.2]], 'sigma': 0.1, 'samples_per_class': 1},
        {'means': [[0.2, 0.2], [0.8, 0.8]], 'sigma': 0.0, 'samples_per_class': 1},
        {'means': [[0.2, 0.2], [0.8, 0.8]], 'sigma': 0.1, 'samples_per_class': -1},
    ])
    def test_invalid_specs_rejected(self, kwargs):
        with pytest.raises(BenchError):
            SyntheticSpec(**kwargs)

    def test_more_classes_than_dimensions_rejected(self):
        with pytest.raises(BenchError):
            SyntheticSpec.with_random_means(d=2, num_classes=3)

    def test_split_keeps_means_and_changes_stream(self):
        base = SyntheticSpec.with_random_means(d=8, num_classes=3, seed=1)
        train = base.with_split("train", 10)
        evaluation = base.with_split("eval", 5)
        assert np.array_equal(train.means, base.means)
        assert train.samples_per_class == 10
        assert train.seed != evaluation.seed


class TestGeneration:
    """
    Sample generation
    """

    def test_counts_order_and_range(self):
        spec = SyntheticSpec.with_random_means(d=8, num_classes=3, samples_per_class=7, seed=4)
        samples = generate_synthetic(spec)
        assert len(samples) == 21
        assert [s.label for s in samples[:6]] == [0, 1, 2, 0, 1, 2]
        xs = np.stack([s.x for s in samples])
        assert xs.min() >= 0.0 and xs.max() <= 1.0

    def test_generation_is_deterministic(self):
        spec = SyntheticSpec.with_random_means(d=8, num_classes=3, samples_per_class=4, seed=4)
        a = generate_synthetic(spec)
        b = generate_synthetic(spec)
        assert all(np.array_equal(sa.x, sb.x) for sa, sb in zip(a, b))

    def test_zero_samples(self):
        spec = SyntheticSpec.with_random_means(d=4, num_classes=2, samples_per_class=0)
        assert generate_synthetic(spec) == []
        assert nearest_mean_accuracy(spec, []) == 0.0

    def test_desk_task_is_separable(self):
        base, train_set, eval_set = desk_datasets(train_per_class=50, eval_per_class=25, seed=0)
        assert base.d == 64 and base.num_classes == 4
        assert len(train_set) == 200 and len(eval_set) == 100
        assert nearest_mean_accuracy(base, eval_set) >= 0.99

    def test_train_and_eval_draws_differ(self):
        _, train_set, eval_set = desk_datasets(d=8, num_classes=2, train_per_class=3, eval_per_class=3)
        assert not np.array_equal(train_set[0].x, eval_set[0].x)
