#!/usr/bin/env python3
"""
Classifier Model - Differentiable Classifiers with Exact Input Gradients

This module provides the data structures for the surrogate and target
classifiers that attacks run against. Models are linear-softmax layers or
small MLPs whose forward pass and backpropagation are written out by hand
with numpy, so the input gradient of the cross-entropy loss is exact.

Key Features:
- Architecture descriptors with JSON serialization
- Labeled samples with one-hot labels validated at construction
- Softmax probabilities, clamped cross-entropy, exact input gradients
- Batched loss and parameter gradients used by training
- Immutable weights, safe for concurrent read-only use by attack workers
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Sequence, Tuple
import logging

import numpy as np

from core.tensor import Vec, SeededRng, as_vector
from core.utils.errors import DimensionError, BenchError

# Set up logger for this module
logger = logging.getLogger(__name__)

# Probability floor applied before taking the log in the loss
LOG_FLOOR = 1e-30

MAX_HIDDEN_LAYERS = 3


class Activation(Enum):
    """Hidden-layer nonlinearities supported by the models"""
    RELU = "relu"
    TANH = "tanh"


@dataclass(frozen=True)
class ArchitectureSpec:
    """
    Data class describing a classifier architecture

    An empty hidden_sizes tuple is a linear-softmax model.
    """
    input_dim: int
    num_classes: int
    hidden_sizes: Tuple[int, ...] = ()
    activation: Activation = Activation.RELU

    def __post_init__(self):
        if self.input_dim < 1 or self.num_classes < 2:
            raise BenchError(
                f"Architecture needs input_dim >= 1 and num_classes >= 2 "
                f"(got {self.input_dim}, {self.num_classes})", "BAD_ARCHITECTURE")
        if len(self.hidden_sizes) > MAX_HIDDEN_LAYERS:
            raise BenchError(
                f"At most {MAX_HIDDEN_LAYERS} hidden layers are supported, got {len(self.hidden_sizes)}",
                "BAD_ARCHITECTURE")
        if any(size < 1 for size in self.hidden_sizes):
            raise BenchError(f"Hidden sizes must be positive: {self.hidden_sizes}", "BAD_ARCHITECTURE")

    @property
    def layer_sizes(self) -> List[int]:
        """Widths of every layer from input to logits"""
        return [self.input_dim, *self.hidden_sizes, self.num_classes]

    @property
    def is_linear(self) -> bool:
        return not self.hidden_sizes

    def describe(self) -> str:
        """Short human-readable label such as 'mlp-64x32x4-relu'"""
        if self.is_linear:
            return f"linear-{self.input_dim}x{self.num_classes}"
        sizes = 'x'.join(str(s) for s in self.layer_sizes)
        return f"mlp-{sizes}-{self.activation.value}"

    def to_dict(self) -> Dict[str, Any]:
        """Convert architecture to dictionary for serialization"""
        return {
            'input_dim': self.input_dim,
            'num_classes': self.num_classes,
            'hidden_sizes': list(self.hidden_sizes),
            'activation': self.activation.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ArchitectureSpec':
        """Create architecture from dictionary"""
        return cls(
            input_dim=int(data['input_dim']),
            num_classes=int(data['num_classes']),
            hidden_sizes=tuple(int(s) for s in data.get('hidden_sizes', ())),
            activation=Activation(data.get('activation', Activation.RELU.value)),
        )


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """
    A flattened input x in [0,1]^d with its one-hot label y

    Both invariants are checked at construction.
    """
    x: Vec
    y: Vec

    def __post_init__(self):
        x = as_vector(self.x, "sample x")
        y = as_vector(self.y, "sample y")
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise BenchError("Sample coordinates must lie in [0, 1]", "REJECTED_INPUT")
        if not (np.all((y == 0.0) | (y == 1.0)) and np.sum(y) == 1.0):
            raise BenchError(f"Label must be one-hot, got {y.tolist()}", "REJECTED_INPUT")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'y', y)

    @property
    def label(self) -> int:
        """Index of the true class"""
        return int(np.argmax(self.y))

    @property
    def num_classes(self) -> int:
        return int(self.y.shape[0])

    @classmethod
    def from_label(cls, x: Sequence[float], label: int, num_classes: int) -> 'LabeledSample':
        """Build a sample from a class index"""
        return cls(x=np.asarray(x, dtype=np.float64), y=one_hot(label, num_classes))


def one_hot(label: int, num_classes: int) -> Vec:
    """One-hot encoding of a class index"""
    if not 0 <= label < num_classes:
        raise BenchError(f"Label {label} outside [0, {num_classes})", "REJECTED_INPUT")
    y = np.zeros(num_classes, dtype=np.float64)
    y[label] = 1.0
    return y


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis"""
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / np.sum(exps, axis=-1, keepdims=True)


@dataclass(eq=False)
class ClassifierModel:
    """
    Trained differentiable classifier

    Weight matrices are stored fan_in x fan_out so a row vector x maps to
    x @ W + b. Arrays are made read-only at construction; training builds
    a new model rather than mutating one.
    """
    architecture: ArchitectureSpec
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    seed: int = 0
    model_id: str = "model"
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        sizes = self.architecture.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise BenchError("Layer count does not match architecture", "BAD_ARCHITECTURE")
        frozen_w, frozen_b = [], []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            w = np.array(w, dtype=np.float64)
            b = np.array(b, dtype=np.float64)
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise DimensionError(
                    f"Layer {i} has shapes {w.shape}/{b.shape}, expected "
                    f"{(sizes[i], sizes[i + 1])}/{(sizes[i + 1],)}",
                    details={'layer': i})
            w.flags.writeable = False
            b.flags.writeable = False
            frozen_w.append(w)
            frozen_b.append(b)
        self.weights = frozen_w
        self.biases = frozen_b

    @property
    def input_dim(self) -> int:
        return self.architecture.input_dim

    @property
    def num_classes(self) -> int:
        return self.architecture.num_classes

    def _activate(self, z: np.ndarray) -> np.ndarray:
        if self.architecture.activation is Activation.RELU:
            return np.maximum(z, 0.0)
        return np.tanh(z)

    def _activation_derivative(self, z: np.ndarray, a: np.ndarray) -> np.ndarray:
        # ReLU subgradient at 0 is 0
        if self.architecture.activation is Activation.RELU:
            return (z > 0.0).astype(np.float64)
        return 1.0 - a * a

    def _check_input(self, x: np.ndarray) -> None:
        if x.shape[-1] != self.input_dim:
            raise DimensionError(
                f"Input has {x.shape[-1]} features, model expects {self.input_dim}",
                "REJECTED_INPUT", details={'got': int(x.shape[-1]), 'expected': self.input_dim})

    def _check_label(self, y: np.ndarray) -> None:
        if y.shape[-1] != self.num_classes:
            raise DimensionError(
                f"Label has {y.shape[-1]} classes, model has {self.num_classes}",
                "REJECTED_INPUT", details={'got': int(y.shape[-1]), 'expected': self.num_classes})

    def _forward_cache(self, x: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        """Run the layers, keeping pre-activations and activations for backprop"""
        activations = [x]
        preactivations = []
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            preactivations.append(z)
            a = z if i == last else self._activate(z)
            activations.append(a)
        return preactivations, activations

    def logits(self, x: Vec) -> Vec:
        """Unnormalized class scores"""
        x = np.asarray(x, dtype=np.float64)
        self._check_input(x)
        _, activations = self._forward_cache(x)
        return activations[-1]

    def forward(self, x: Vec) -> Vec:
        """Softmax class probabilities"""
        return softmax(self.logits(x))

    def predict(self, x: Vec) -> int:
        """Index of the most probable class"""
        return int(np.argmax(self.logits(x)))

    def predict_batch(self, xs: np.ndarray) -> np.ndarray:
        """Predicted classes for a stack of inputs"""
        xs = np.asarray(xs, dtype=np.float64)
        self._check_input(xs)
        _, activations = self._forward_cache(xs)
        return np.argmax(activations[-1], axis=-1)

    def cross_entropy_loss(self, x: Vec, y: Vec) -> float:
        """-log p_true with p_true clamped to LOG_FLOOR"""
        y = np.asarray(y, dtype=np.float64)
        self._check_label(y)
        probs = self.forward(x)
        p_true = float(probs[int(np.argmax(y))])
        return float(-np.log(max(p_true, LOG_FLOOR)))

    def loss_and_gradient(self, x: Vec, y: Vec) -> Tuple[float, Vec]:
        """
        Loss and exact input gradient from a single forward/backward pass

        Args:
            x: Input vector
            y: One-hot label

        Returns:
            (cross-entropy loss, gradient of the loss with respect to x)

        Where p_true is below LOG_FLOOR the loss is the constant -log(LOG_FLOOR)
        and the gradient is zero, matching the clamped loss.
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self._check_input(x)
        self._check_label(y)

        preactivations, activations = self._forward_cache(x)
        probs = softmax(activations[-1])
        p_true = float(probs[int(np.argmax(y))])
        loss = float(-np.log(max(p_true, LOG_FLOOR)))
        if p_true < LOG_FLOOR:
            return loss, np.zeros_like(x)

        # d loss / d logits for softmax + cross-entropy
        delta = probs - y
        for i in range(len(self.weights) - 1, 0, -1):
            grad_a = self.weights[i] @ delta
            delta = grad_a * self._activation_derivative(preactivations[i - 1], activations[i])
        return loss, self.weights[0] @ delta

    def input_gradient(self, x: Vec, y: Vec) -> Vec:
        """Exact gradient of the cross-entropy loss with respect to x"""
        return self.loss_and_gradient(x, y)[1]

    def batch_loss_and_parameter_gradients(
            self, xs: np.ndarray, ys: np.ndarray
    ) -> Tuple[float, List[np.ndarray], List[np.ndarray]]:
        """
        Mean loss over a batch and its gradients with respect to all parameters

        Returns:
            (mean loss, weight gradients, bias gradients)
        """
        preactivations, activations = self._forward_cache(xs)
        probs = softmax(activations[-1])
        batch = xs.shape[0]
        p_true = np.sum(probs * ys, axis=1)
        loss = float(np.mean(-np.log(np.maximum(p_true, LOG_FLOOR))))

        weight_grads: List[np.ndarray] = [np.empty(0)] * len(self.weights)
        bias_grads: List[np.ndarray] = [np.empty(0)] * len(self.biases)
        # clamped rows contribute a constant loss
        delta = (probs - ys) * (p_true >= LOG_FLOOR)[:, None] / batch
        for i in range(len(self.weights) - 1, -1, -1):
            weight_grads[i] = activations[i].T @ delta
            bias_grads[i] = np.sum(delta, axis=0)
            if i > 0:
                grad_a = delta @ self.weights[i].T
                delta = grad_a * self._activation_derivative(preactivations[i - 1], activations[i])
        return loss, weight_grads, bias_grads

    def kink_margin(self, x: Vec) -> float:
        """
        Smallest |pre-activation| over ReLU units at x

        Finite-difference checks skip points closer than 1e-6 to a kink.
        Returns infinity for tanh and linear models.
        """
        if self.architecture.activation is not Activation.RELU or self.architecture.is_linear:
            return float('inf')
        preactivations, _ = self._forward_cache(np.asarray(x, dtype=np.float64))
        return float(min(np.min(np.abs(z)) for z in preactivations[:-1]))

    def with_parameters(self, weights: List[np.ndarray], biases: List[np.ndarray]) -> 'ClassifierModel':
        """Copy of this model with new parameters"""
        return ClassifierModel(self.architecture, weights, biases, seed=self.seed,
                               model_id=self.model_id, metadata=dict(self.metadata))


def initialize_model(architecture: ArchitectureSpec, rng: SeededRng,
                     seed: int = 0, model_id: str = "model") -> ClassifierModel:
    """
    Create a model with weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]

    Biases start at zero.
    """
    sizes = architecture.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, fan_in * fan_out).reshape(fan_in, fan_out))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    logger.debug(f"Initialized {architecture.describe()} with seed {rng.seed}")
    return ClassifierModel(architecture, weights, biases, seed=seed, model_id=model_id)


def forward(model: ClassifierModel, x: Vec) -> Vec:
    """Softmax probabilities of model at x"""
    return model.forward(x)


def cross_entropy_loss(model: ClassifierModel, x: Vec, y: Vec) -> float:
    """Cross-entropy J(x, y) of model at x"""
    return model.cross_entropy_loss(x, y)


def input_gradient(model: ClassifierModel, x: Vec, y: Vec) -> Vec:
    """Exact gradient of J(x, y) with respect to x"""
    return model.input_gradient(x, y)
