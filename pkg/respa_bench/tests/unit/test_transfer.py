#!/usr/bin/env python3
"""
Unit Tests for Transfer Evaluation

Uses hand-set linear threshold classifiers on [0,1]^2 so every success rate
can be counted by hand.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the respa_bench directory to sys.path for imports
current_dir = Path(__file__).parent
app_dir = current_dir.parent.parent
sys.path.insert(0, str(app_dir))

from core.attacks import AttackConfig
from core.evaluation import (
    TransferReport, attack_success_rate, coerce_sweep_values, evaluation_set, score_adversarial_sets,
    summarize_reports, sweep_parameter, sweep_to_csv, transfer_matrix,
)
from core.models import ArchitectureSpec, ClassifierModel, LabeledSample
from core.utils.errors import ConfigError, EvaluationError


def threshold_model(axis: int, model_id: str) -> ClassifierModel:
    """Class 0 when x[axis] > 0.5, class 1 otherwise"""
    w = np.zeros((2, 2))
    w[axis] = [1.0, -1.0]
    return ClassifierModel(ArchitectureSpec(2, 2), [w], [np.array([-0.5, 0.5])], model_id=model_id)


@pytest.fixture
def on_x():
    return threshold_model(0, "on_x")


@pytest.fixture
def on_y():
    return threshold_model(1, "on_y")


def sample(x0: float, x1: float, label: int) -> LabeledSample:
    return LabeledSample.from_label([x0, x1], label, 2)


class TestAttackSuccessRate:
    """
    Prediction flips under the target model
    """

    def test_unchanged_inputs_score_zero(self, on_x):
        pairs = [(np.array([0.8, 0.1]), np.array([0.8, 0.1])), (np.array([0.2, 0.9]), np.array([0.3, 0.9]))]
        assert attack_success_rate(on_x, pairs) == 0.0

    def test_three_of_four_flipped(self, on_x):
        pairs = [
            (np.array([0.8, 0.5]), np.array([0.4, 0.5])),
            (np.array([0.7, 0.5]), np.array([0.45, 0.5])),
            (np.array([0.2, 0.5]), np.array([0.6, 0.5])),
            (np.array([0.2, 0.5]), np.array([0.3, 0.5])),
        ]
        assert attack_success_rate(on_x, pairs) == 0.75

    def test_labels_play_no_part(self, on_x):
        """A misclassified clean input that keeps its prediction is not a success"""
        pairs = [(np.array([0.9, 0.0]), np.array([0.8, 0.0]))]
        assert attack_success_rate(on_x, pairs) == 0.0

    def test_empty_input(self, on_x):
        with pytest.raises(EvaluationError) as info:
            attack_success_rate(on_x, [])
        assert info.value.error_type == "EMPTY_INPUT"

    def test_dimension_mismatch(self, on_x):
        with pytest.raises(EvaluationError) as info:
            attack_success_rate(on_x, [(np.zeros(3), np.zeros(3))])
        assert info.value.error_type == "DIMENSION_MISMATCH"


class TestEvaluationSet:
    """
    Restriction to samples every model gets right
    """

    def test_keeps_jointly_correct_samples(self, on_x, on_y):
        samples = [sample(0.9, 0.9, 0), sample(0.9, 0.1, 0), sample(0.1, 0.1, 1), sample(0.1, 0.9, 1)]
        assert evaluation_set([on_x, on_y], samples) == [0, 2]

    def test_incompatible_models(self, on_x):
        other = ClassifierModel(ArchitectureSpec(3, 2), [np.zeros((3, 2))], [np.zeros(2)], model_id="wide")
        with pytest.raises(EvaluationError):
            evaluation_set([on_x, other], [])


class TestTransferReport:
    """
    Report layout and summaries
    """

    def make_report(self, seed: int = 0, transfer: float = 0.25) -> TransferReport:
        return TransferReport(
            surrogate_id="s", target_ids=["s", "t1", "t2"],
            asr={"respa": {"s": 1.0, "t1": transfer, "t2": 0.75}, "none": {"s": 0.0, "t1": 0.0, "t2": 0.0}},
            counts={"respa": {"s": 4, "t1": 4, "t2": 4}, "none": {"s": 4, "t1": 4, "t2": 4}},
            seed=seed)

    def test_csv_stars_white_box_cell(self):
        lines = self.make_report().to_csv().splitlines()
        assert lines[0] == "attack,s,t1,t2"
        assert lines[1] == "respa,1.0*,0.25,0.75"
        assert lines[2] == "none,0.0*,0.0,0.0"

    def test_mean_transfer_excludes_surrogate(self):
        report = self.make_report()
        assert report.white_box("respa") == 1.0
        assert report.mean_transfer("respa") == 0.5

    def test_dict_round_trip(self):
        report = self.make_report(seed=4)
        assert TransferReport.from_dict(report.to_dict()) == report

    def test_summary_averages_over_seeds(self):
        summary = summarize_reports([self.make_report(0, 0.25), self.make_report(1, 0.75)])
        assert summary["respa"].white_box == 1.0
        assert summary["respa"].transfer == pytest.approx(0.625)
        assert summary["respa"].reports == 2
        assert summary["none"].transfer == 0.0

    def test_summary_without_held_out_targets(self):
        report = TransferReport(surrogate_id="s", target_ids=["s"], asr={"respa": {"s": 0.5}})
        assert summarize_reports([report])["respa"].transfer is None

    def test_summary_needs_reports(self):
        with pytest.raises(EvaluationError):
            summarize_reports([])


class TestTransferMatrix:
    """
    End-to-end scoring on the threshold models
    """

    def dataset(self):
        return [sample(0.55, 0.55, 0), sample(0.58, 0.9, 0), sample(0.45, 0.45, 1), sample(0.42, 0.2, 1)]

    def test_surrogate_scored_first(self, on_x, on_y):
        pairs = {"none": [(np.array([0.8, 0.8]), np.array([0.8, 0.8]))]}
        report = score_adversarial_sets(on_x, [on_y, on_x], pairs)
        assert report.target_ids == ["on_x", "on_y"]

    def test_identity_attack_has_zero_asr(self, on_x, on_y):
        reports = transfer_matrix([on_x], [on_y], ["none"], self.dataset(), AttackConfig(T=2))
        assert len(reports) == 1
        assert reports[0].asr["none"] == {"on_x": 0.0, "on_y": 0.0}

    def test_fgsm_flips_surrogate_near_boundary(self, on_x, on_y):
        cfg = AttackConfig(epsilon=0.1, alpha=0.05, T=2)
        report = transfer_matrix([on_x], [on_y], ["fgsm"], self.dataset(), cfg)[0]
        # every sample sits within 0.1 of the x boundary; the y gradient is zero
        assert report.white_box("fgsm") == 1.0
        assert report.asr["fgsm"]["on_y"] == 0.0
        assert report.counts["fgsm"]["on_x"] == 4

    def test_no_correct_samples(self, on_x, on_y):
        with pytest.raises(EvaluationError) as info:
            transfer_matrix([on_x], [on_y], ["none"], [sample(0.9, 0.1, 0)], AttackConfig())
        assert info.value.error_type == "EMPTY_INPUT"


class TestSweeps:
    """
    Hyperparameter sweeps
    """

    def test_coerce_integer_parameter(self):
        assert coerce_sweep_values("N", [1, 2.0, "3"]) == [1, 2, 3]

    def test_fractional_integer_rejected(self):
        with pytest.raises(ConfigError) as info:
            coerce_sweep_values("N", [2.5])
        assert info.value.error_type == "BAD_VALUE"

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError) as info:
            coerce_sweep_values("alpha", [0.1])
        assert info.value.error_type == "UNKNOWN_PARAMETER"

    def test_one_row_per_value(self, on_x, on_y):
        dataset = [sample(0.55, 0.55, 0), sample(0.45, 0.45, 1)]
        rows = sweep_parameter("gamma", [0.0, 0.5, 1.0], [on_x], [on_y], dataset,
                               AttackConfig(epsilon=0.1, alpha=0.05, T=2, N=2), seeds=(0, 1))
        assert [r.value for r in rows] == [0.0, 0.5, 1.0]
        assert all(r.white_box == 1.0 for r in rows)
        csv = sweep_to_csv(rows).splitlines()
        assert csv[0] == "param,value,white_box_asr,transfer_asr"
        assert csv[1].startswith("gamma,0.0,1.0,")
