"""
Small hand-written loss oracles with closed-form gradients

They satisfy the LossOracle protocol (loss_and_gradient, cross_entropy_loss)
and ignore the label, which lets attack and surface tests compare against
exact formulas.
"""

from typing import Tuple

import numpy as np


class QuadraticOracle:
    """J(x) = 0.5 * sum(scales * (x - center)^2)"""

    def __init__(self, center, scales=None):
        self.center = np.asarray(center, dtype=np.float64)
        self.scales = (np.ones_like(self.center) if scales is None
                       else np.asarray(scales, dtype=np.float64))
        self.calls = 0

    def cross_entropy_loss(self, x, y) -> float:
        diff = np.asarray(x, dtype=np.float64) - self.center
        return float(0.5 * np.sum(self.scales * diff * diff))

    def loss_and_gradient(self, x, y) -> Tuple[float, np.ndarray]:
        self.calls += 1
        diff = np.asarray(x, dtype=np.float64) - self.center
        return float(0.5 * np.sum(self.scales * diff * diff)), self.scales * diff


class LinearOracle:
    """J(x) = w . x, constant gradient w"""

    def __init__(self, w):
        self.w = np.asarray(w, dtype=np.float64)

    def cross_entropy_loss(self, x, y) -> float:
        return float(np.dot(self.w, x))

    def loss_and_gradient(self, x, y) -> Tuple[float, np.ndarray]:
        return float(np.dot(self.w, x)), self.w.copy()


class ScaledOracle:
    """c * J(x) + shift for a wrapped oracle"""

    def __init__(self, inner, factor: float = 1.0, shift: float = 0.0):
        self.inner = inner
        self.factor = factor
        self.shift = shift

    def cross_entropy_loss(self, x, y) -> float:
        return self.factor * self.inner.cross_entropy_loss(x, y) + self.shift

    def loss_and_gradient(self, x, y) -> Tuple[float, np.ndarray]:
        loss, grad = self.inner.loss_and_gradient(x, y)
        return self.factor * loss + self.shift, self.factor * grad
