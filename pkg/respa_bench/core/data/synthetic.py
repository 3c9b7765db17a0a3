#!/usr/bin/env python3
"""
Synthetic Datasets - Gaussian Blobs in the Unit Cube

Desk-scale stand-in for an image validation set: C classes in d dimensions,
each an isotropic Gaussian around its own mean, coordinates clamped to
[0,1]. Generation is a pure function of the SyntheticSpec.

Default desk task: d = 64, C = 4, means at distance 0.3 from the cube
center along orthonormal random directions, sigma = 0.05. Classes are
linearly separable with margin of roughly four sigma, while an L-inf
budget of 16/255 moves a dense linear score by more than that margin, so
white-box attacks succeed and transfer gaps between architectures show.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, List, Tuple
import logging

import numpy as np

from core.models.classifier_model import LabeledSample, one_hot
from core.tensor import SeededRng
from core.utils.errors import BenchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SyntheticSpec:
    """
    Data class describing a Gaussian-blob dataset

    means has shape (C, d); rows must be pairwise distinct.
    """
    means: np.ndarray
    sigma: float
    samples_per_class: int
    seed: int = 0

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64)
        if means.ndim != 2 or means.shape[0] < 2:
            raise BenchError(f"means must be a (C >= 2, d) matrix, got shape {means.shape}", "BAD_VALUE")
        if self.sigma <= 0:
            raise BenchError(f"sigma must be positive, got {self.sigma}", "BAD_VALUE")
        if self.samples_per_class < 0:
            raise BenchError(f"samples_per_class must be >= 0, got {self.samples_per_class}", "BAD_VALUE")
        for i in range(means.shape[0]):
            for j in range(i + 1, means.shape[0]):
                if np.array_equal(means[i], means[j]):
                    raise BenchError(f"Class means {i} and {j} coincide", "BAD_VALUE")
        means.flags.writeable = False
        object.__setattr__(self, 'means', means)

    @property
    def d(self) -> int:
        return int(self.means.shape[1])

    @property
    def num_classes(self) -> int:
        return int(self.means.shape[0])

    @classmethod
    def with_random_means(cls, d: int = 64, num_classes: int = 4, sigma: float = 0.05,
                          samples_per_class: int = 250, seed: int = 0,
                          mean_radius: float = 0.3) -> 'SyntheticSpec':
        """
        Means at mean_radius from the cube center along orthonormal random directions

        The directions come from the QR factorization of a seeded Gaussian
        matrix, so they depend only on (d, num_classes, seed).
        """
        if num_classes > d:
            raise BenchError(f"Need num_classes <= d for orthogonal means ({num_classes} > {d})", "BAD_VALUE")
        rng = SeededRng(seed).derive("means")
        q, _ = np.linalg.qr(rng.normal(1.0, (d, num_classes)))
        means = 0.5 + mean_radius * q.T
        return cls(means=means, sigma=sigma, samples_per_class=samples_per_class, seed=seed)

    def with_split(self, label: str, samples_per_class: int) -> 'SyntheticSpec':
        """Same class means, a different sample stream (e.g. 'train' / 'eval')"""
        return replace(self, samples_per_class=samples_per_class,
                       seed=SeededRng(self.seed).derive(label).seed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'means': self.means.tolist(),
            'sigma': self.sigma,
            'samples_per_class': self.samples_per_class,
            'seed': self.seed,
        }


def generate_synthetic(spec: SyntheticSpec) -> List[LabeledSample]:
    """
    Draw samples_per_class points around every class mean

    Returns:
        Samples in round-robin class order (0, 1, ..., C-1, 0, 1, ...), so any
        prefix is close to class-balanced
    """
    rng = SeededRng(spec.seed)
    points = []
    for k in range(spec.num_classes):
        noise = rng.normal(spec.sigma, (spec.samples_per_class, spec.d))
        points.append(np.clip(spec.means[k] + noise, 0.0, 1.0))
    labels = [one_hot(k, spec.num_classes) for k in range(spec.num_classes)]
    samples: List[LabeledSample] = []
    for i in range(spec.samples_per_class):
        for k in range(spec.num_classes):
            samples.append(LabeledSample(x=points[k][i], y=labels[k]))
    logger.debug(f"Generated {len(samples)} synthetic samples (d={spec.d}, C={spec.num_classes})")
    return samples


def nearest_mean_accuracy(spec: SyntheticSpec, samples: List[LabeledSample]) -> float:
    """Accuracy of the nearest-class-mean rule, a separability reference"""
    if not samples:
        return 0.0
    xs = np.stack([s.x for s in samples])
    distances = np.linalg.norm(xs[:, None, :] - spec.means[None, :, :], axis=2)
    labels = np.array([s.label for s in samples])
    return float(np.mean(np.argmin(distances, axis=1) == labels))


def desk_datasets(d: int = 64, num_classes: int = 4, sigma: float = 0.05,
                  train_per_class: int = 250, eval_per_class: int = 100,
                  seed: int = 0, mean_radius: float = 0.3
                  ) -> Tuple[SyntheticSpec, List[LabeledSample], List[LabeledSample]]:
    """
    Default desk task: shared means, independent train and evaluation draws

    Returns:
        (base spec, training samples, evaluation samples)
    """
    base = SyntheticSpec.with_random_means(d, num_classes, sigma, train_per_class, seed, mean_radius)
    train_set = generate_synthetic(base.with_split("train", train_per_class))
    eval_set = generate_synthetic(base.with_split("eval", eval_per_class))
    return base, train_set, eval_set
