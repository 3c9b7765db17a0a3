#!/usr/bin/env python3
"""
Unit Tests for Model Training

Checks determinism, separability of the desk task and divergence handling.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the respa_bench directory to sys.path for imports
current_dir = Path(__file__).parent
app_dir = current_dir.parent.parent
sys.path.insert(0, str(app_dir))

from core.data import SyntheticSpec, generate_synthetic, nearest_mean_accuracy
from core.models import ArchitectureSpec, TrainConfig, accuracy, initialize_model, train, train_with_report
from core.tensor import SeededRng
from core.utils.errors import BenchError, DataError, DimensionError, TrainingDivergedError


@pytest.fixture(scope="module")
def separated_task():
    """Means 0.3*sqrt(2) apart, more than 6 sigma sqrt(d)"""
    spec = SyntheticSpec.with_random_means(d=8, num_classes=3, sigma=0.02, samples_per_class=60, seed=11)
    return spec, generate_synthetic(spec)


class TestTraining:
    """
    Test the SGD trainer
    """

    def test_same_seed_same_model(self, separated_task):
        _, data = separated_task
        arch = ArchitectureSpec(8, 3, (6,))
        cfg = TrainConfig(epochs=3, seed=5)
        a = train(arch, data, cfg, model_id="a")
        b = train(arch, data, cfg, model_id="a")
        for wa, wb in zip(a.weights + a.biases, b.weights + b.biases):
            assert np.array_equal(wa, wb)

    def test_different_seed_different_model(self, separated_task):
        _, data = separated_task
        arch = ArchitectureSpec(8, 3, (6,))
        a = train(arch, data, TrainConfig(epochs=1, seed=1))
        b = train(arch, data, TrainConfig(epochs=1, seed=2))
        assert not np.array_equal(a.weights[0], b.weights[0])

    def test_linear_model_separates_blobs(self, separated_task):
        spec, data = separated_task
        assert nearest_mean_accuracy(spec, data) >= 0.99
        model, report = train_with_report(ArchitectureSpec(8, 3), data, TrainConfig(epochs=30, seed=0))
        assert accuracy(model, data) >= 0.99
        assert report.final_accuracy == accuracy(model, data)
        assert report.epoch_losses[-1] < report.epoch_losses[0]
        assert model.metadata['train_accuracy'] == report.final_accuracy

    def test_zero_epochs_returns_seeded_initialization(self, separated_task):
        _, data = separated_task
        arch = ArchitectureSpec(8, 3, (6,))
        model, report = train_with_report(arch, data, TrainConfig(epochs=0, seed=9), model_id="init")
        expected = initialize_model(arch, SeededRng(9).derive("init"), seed=9)
        for got, want in zip(model.weights + model.biases, expected.weights + expected.biases):
            assert np.array_equal(got, want)
        assert report.epoch_losses == []
        assert report.final_loss is None

    def test_huge_learning_rate_diverges(self, separated_task):
        _, data = separated_task
        with pytest.raises(TrainingDivergedError) as exc_info:
            train(ArchitectureSpec(8, 3, (6,)), data, TrainConfig(learning_rate=1e300, epochs=3))
        assert exc_info.value.error_type == "LOSS_NAN"

    def test_dimension_mismatch(self, separated_task):
        _, data = separated_task
        with pytest.raises(DimensionError):
            train(ArchitectureSpec(9, 3), data, TrainConfig(epochs=1))

    def test_empty_dataset_rejected(self):
        with pytest.raises(DataError) as exc_info:
            train(ArchitectureSpec(8, 3), [], TrainConfig(epochs=1))
        assert exc_info.value.error_type == "EMPTY_DATASET"


class TestTrainConfig:
    """
    Test training hyperparameter validation
    """

    def test_round_trip(self):
        cfg = TrainConfig(learning_rate=0.1, epochs=4, batch_size=8, seed=9)
        assert TrainConfig.from_dict(cfg.to_dict()) == cfg

    @pytest.mark.parametrize("kwargs", [{'learning_rate': 0.0}, {'epochs': -1}, {'batch_size': 0}])
    def test_invalid_values(self, kwargs):
        with pytest.raises(BenchError):
            TrainConfig(**kwargs)
