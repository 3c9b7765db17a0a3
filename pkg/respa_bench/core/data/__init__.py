"""Dataset synthesis and IDX ingestion producing LabeledSample lists."""

from .synthetic import SyntheticSpec, desk_datasets, generate_synthetic, nearest_mean_accuracy
from .idx_reader import (
    IMAGE_MAGIC, LABEL_MAGIC, load_idx, parse_idx_images, parse_idx_labels,
)

__all__ = [
    'SyntheticSpec', 'desk_datasets', 'generate_synthetic', 'nearest_mean_accuracy',
    'IMAGE_MAGIC', 'LABEL_MAGIC', 'load_idx', 'parse_idx_images', 'parse_idx_labels',
]
