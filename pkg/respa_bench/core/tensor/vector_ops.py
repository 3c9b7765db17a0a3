#!/usr/bin/env python3
"""
Vector Operations - Minimal Dense Numeric Substrate

Fixed-length 64-bit real vectors are plain one-dimensional numpy arrays.
This module adds the handful of operations the attacks need on top of them:
validation, norms, a zero-preserving sign, and a seeded random generator
whose stream is reproducible across platforms.

Random generator
----------------
SeededRng wraps numpy's PCG64 bit generator (permuted congruential
generator, 128-bit state, 64-bit output). For a given seed numpy guarantees
the same stream on every platform, which keeps sample draws identical
across attacks and across runs.

Sub-seeds are derived by hashing, never by drawing from a parent stream,
so adding a model or an attack to a run leaves every other stream intact:

    sub_seed = first 8 bytes (big-endian) of sha256("<seed>/<label>/<label>...")
"""

import hashlib
import logging
from typing import Iterable, Sequence, Union

import numpy as np

from core.utils.errors import BenchError, DimensionError

logger = logging.getLogger(__name__)

Vec = np.ndarray

RNG_ALGORITHM = "PCG64"


def as_vector(values: Union[Sequence[float], np.ndarray], name: str = "vector") -> Vec:
    """
    Convert values into a fresh finite float64 vector

    Args:
        values: Any one-dimensional sequence of reals
        name: Label used in error messages

    Returns:
        One-dimensional float64 copy of the values
    """
    vec = np.array(values, dtype=np.float64)
    if vec.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {vec.shape}",
                             "REJECTED_INPUT", details={'shape': list(vec.shape)})
    return ensure_finite(vec, name)


def ensure_finite(vec: Vec, name: str = "vector") -> Vec:
    """Reject vectors containing NaN or infinity"""
    if not np.all(np.isfinite(vec)):
        raise BenchError(f"{name} contains non-finite values", "NON_FINITE",
                         details={'name': name})
    return vec


def check_same_length(*vecs: Vec) -> int:
    """
    Verify all operands share one length

    Returns:
        The common length
    """
    lengths = {int(v.shape[0]) for v in vecs}
    if len(lengths) != 1:
        raise DimensionError(f"Operand lengths differ: {sorted(lengths)}",
                             details={'lengths': sorted(lengths)})
    return lengths.pop()


def l1_norm(v: Vec) -> float:
    """Sum of absolute values"""
    return float(np.sum(np.abs(v)))


def l2_norm(v: Vec) -> float:
    """Euclidean length"""
    return float(np.sqrt(np.dot(v, v)))


def linf_norm(v: Vec) -> float:
    """Largest absolute coordinate (0.0 for empty vectors)"""
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v)))


def sign(v: Vec) -> Vec:
    """Elementwise sign with sign(0) = 0"""
    return np.sign(v)


def unit_vector(v: Vec, floor: float = 1e-12) -> Vec:
    """
    Scale v to unit L2 length

    Returns the zero vector when ||v|| is below floor.
    """
    norm = l2_norm(v)
    if norm < floor:
        return np.zeros_like(v)
    return v / norm


def derive_seed(seed: int, *labels: object) -> int:
    """
    Derive an independent 64-bit sub-seed from a seed and a label path

    Args:
        seed: Parent seed
        *labels: Path components such as model id, attack id, sample index

    Returns:
        Unsigned 64-bit integer
    """
    key_string = '/'.join([str(int(seed))] + [str(label) for label in labels])
    digest = hashlib.sha256(key_string.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


class SeededRng:
    """
    Deterministic random generator with a documented algorithm

    Each instance is single-owner. Workers that need randomness receive
    their own instance through derive().
    """

    algorithm = RNG_ALGORITHM

    def __init__(self, seed: int):
        if seed < 0 or seed >= 2 ** 64:
            raise BenchError(f"Seed must be an unsigned 64-bit integer, got {seed}",
                             "BAD_SEED", details={'seed': seed})
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, *labels: object) -> 'SeededRng':
        """New generator seeded from this seed and the labels"""
        return SeededRng(derive_seed(self.seed, *labels))

    def uniform(self, low: float, high: float, size: int) -> Vec:
        return self._generator.uniform(low, high, size)

    def normal(self, scale: float, size: Union[int, Iterable[int]]) -> np.ndarray:
        return self._generator.normal(0.0, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, algorithm={self.algorithm})"


def sample_uniform_box(rng: SeededRng, d: int, half_width: float) -> Vec:
    """
    Draw one point uniformly from the box [-half_width, half_width]^d

    Coordinates are independent. A zero half-width yields the zero vector
    without consuming draws.
    """
    if half_width < 0:
        raise BenchError(f"half_width must be non-negative, got {half_width}",
                         "BAD_VALUE", details={'half_width': half_width})
    if half_width == 0:
        return np.zeros(d, dtype=np.float64)
    return rng.uniform(-half_width, half_width, d)
