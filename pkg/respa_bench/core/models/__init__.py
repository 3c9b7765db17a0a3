"""Differentiable classifiers: forward pass, exact input gradients, training, checkpoints."""

from .classifier_model import (
    Activation, ArchitectureSpec, ClassifierModel, LabeledSample, LOG_FLOOR,
    cross_entropy_loss, forward, initialize_model, input_gradient, one_hot, softmax,
)
from .training import TrainConfig, TrainingReport, accuracy, stack_samples, train, train_with_report
from .checkpoint import FORMAT_VERSION, load_model, parse_model, render_model, save_model

__all__ = [
    'Activation', 'ArchitectureSpec', 'ClassifierModel', 'LabeledSample', 'LOG_FLOOR',
    'cross_entropy_loss', 'forward', 'initialize_model', 'input_gradient', 'one_hot', 'softmax',
    'TrainConfig', 'TrainingReport', 'accuracy', 'stack_samples', 'train', 'train_with_report',
    'FORMAT_VERSION', 'load_model', 'parse_model', 'render_model', 'save_model',
]
