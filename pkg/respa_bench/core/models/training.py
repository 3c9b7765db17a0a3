#!/usr/bin/env python3
"""
Model Training - Mini-batch SGD for the desk-scale classifiers

Trains surrogate and target models on LabeledSample sets. Training is
single-threaded and fully determined by the TrainConfig seed: the
initialization stream and the per-epoch shuffle stream are both derived
from it.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from tqdm import tqdm

from core.models.classifier_model import (
    ArchitectureSpec, ClassifierModel, LabeledSample, initialize_model,
)
from core.tensor import SeededRng
from core.utils.errors import BenchError, DataError, DimensionError, TrainingDivergedError
from core.utils.logger import progress_enabled

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """
    Data class holding training hyperparameters
    """
    learning_rate: float = 0.5
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise BenchError(f"learning_rate must be positive, got {self.learning_rate}", "BAD_VALUE")
        if self.epochs < 0:
            raise BenchError(f"epochs must be non-negative, got {self.epochs}", "BAD_VALUE")
        if self.batch_size < 1:
            raise BenchError(f"batch_size must be positive, got {self.batch_size}", "BAD_VALUE")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'learning_rate': self.learning_rate,
            'epochs': self.epochs,
            'batch_size': self.batch_size,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TrainConfig':
        return cls(**data)


@dataclass
class TrainingReport:
    """Per-epoch losses and the final training accuracy"""
    epoch_losses: List[float] = field(default_factory=list)
    final_accuracy: float = 0.0

    @property
    def final_loss(self) -> Optional[float]:
        return self.epoch_losses[-1] if self.epoch_losses else None


def stack_samples(samples: Sequence[LabeledSample]) -> Tuple[np.ndarray, np.ndarray]:
    """Stack samples into (inputs, one-hot labels) matrices"""
    xs = np.stack([s.x for s in samples])
    ys = np.stack([s.y for s in samples])
    return xs, ys


def accuracy(model: ClassifierModel, samples: Sequence[LabeledSample]) -> float:
    """Fraction of samples the model classifies correctly"""
    if not samples:
        return 0.0
    xs, ys = stack_samples(samples)
    predictions = model.predict_batch(xs)
    return float(np.mean(predictions == np.argmax(ys, axis=1)))


def train_with_report(architecture: ArchitectureSpec, dataset: Sequence[LabeledSample],
                      cfg: TrainConfig, model_id: str = "model",
                      show_progress: bool = False) -> Tuple[ClassifierModel, TrainingReport]:
    """
    Train a classifier with mini-batch SGD on mean cross-entropy

    Args:
        architecture: Layer sizes and activation
        dataset: Non-empty list of samples matching the architecture
        cfg: Training hyperparameters and seed
        model_id: Identifier stored in the model and its checkpoint
        show_progress: Show a tqdm bar over epochs

    Returns:
        (trained model, training report)
    """
    if not dataset:
        raise DataError("Cannot train on an empty dataset")
    xs, ys = stack_samples(dataset)
    if xs.shape[1] != architecture.input_dim or ys.shape[1] != architecture.num_classes:
        raise DimensionError(
            f"Dataset shape {xs.shape[1]}/{ys.shape[1]} does not match architecture "
            f"{architecture.input_dim}/{architecture.num_classes}")

    rng = SeededRng(cfg.seed)
    model = initialize_model(architecture, rng.derive("init"), seed=cfg.seed, model_id=model_id)
    shuffle_rng = rng.derive("shuffle")
    weights = [np.array(w) for w in model.weights]
    biases = [np.array(b) for b in model.biases]
    report = TrainingReport()

    epochs = range(cfg.epochs)
    if show_progress and progress_enabled():
        epochs = tqdm(epochs, desc=f"Training {model_id}", leave=False)

    for epoch in epochs:
        order = shuffle_rng.permutation(len(dataset))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            loss, weight_grads, bias_grads = model.batch_loss_and_parameter_gradients(xs[batch], ys[batch])
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"Training of {model_id} diverged at epoch {epoch} (loss={loss})",
                    details={'model_id': model_id, 'epoch': epoch,
                             'learning_rate': cfg.learning_rate})
            epoch_loss += loss * len(batch)
            weights = [w - cfg.learning_rate * g for w, g in zip(weights, weight_grads)]
            biases = [b - cfg.learning_rate * g for b, g in zip(biases, bias_grads)]
            model = model.with_parameters(weights, biases)
        report.epoch_losses.append(epoch_loss / len(dataset))
        logger.debug(f"{model_id} epoch {epoch}: loss={report.epoch_losses[-1]:.6f}")

    if any(not np.all(np.isfinite(w)) for w in model.weights):
        raise TrainingDivergedError(f"Training of {model_id} produced non-finite weights",
                                    details={'model_id': model_id})

    report.final_accuracy = accuracy(model, dataset)
    model.metadata['train_accuracy'] = report.final_accuracy
    logger.info(f"Trained {model_id} ({architecture.describe()}): "
                f"final loss={report.final_loss}, train accuracy={report.final_accuracy:.4f}")
    return model, report


def train(architecture: ArchitectureSpec, dataset: Sequence[LabeledSample],
          cfg: TrainConfig, model_id: str = "model") -> ClassifierModel:
    """Train a classifier and return it (see train_with_report)"""
    model, _ = train_with_report(architecture, dataset, cfg, model_id=model_id)
    return model
