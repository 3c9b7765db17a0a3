"""Dense vector substrate: norms, sign, seeded random generation."""

from .vector_ops import (
    Vec, SeededRng, as_vector, check_same_length, derive_seed, ensure_finite,
    l1_norm, l2_norm, linf_norm, sample_uniform_box, sign, unit_vector,
)

__all__ = [
    'Vec', 'SeededRng', 'as_vector', 'check_same_length', 'derive_seed', 'ensure_finite',
    'l1_norm', 'l2_norm', 'linf_norm', 'sample_uniform_box', 'sign', 'unit_vector',
]
