#!/usr/bin/env python3
"""
IDX Reader - Labeled Image Corpora in the IDX Container Format

IDX files are big-endian. Image files:

    [offset] [type]          [value]
    0000     32 bit integer  0x00000803 magic (unsigned byte data, 3 dimensions)
    0004     32 bit integer  number of images
    0008     32 bit integer  number of rows
    0012     32 bit integer  number of columns
    0016     unsigned byte   pixels, row-major, image after image

Label files:

    0000     32 bit integer  0x00000801 magic (unsigned byte data, 1 dimension)
    0004     32 bit integer  number of items
    0008     unsigned byte   labels

Pixels are scaled by 1/255 and flattened; labels are one-hot encoded.
Every malformation raises IdxFormatError with the byte offset at which
the problem was detected.
"""

import logging
import struct
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from core.models.classifier_model import LabeledSample, one_hot
from core.utils.errors import IdxFormatError

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
IMAGE_HEADER_SIZE = 16
LABEL_HEADER_SIZE = 8


def _read_bytes(path: Union[str, Path]) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise IdxFormatError(f"Cannot read IDX file {path}: {e}", "UNREADABLE",
                             details={'path': str(path)}, original_error=e) from e


def _check_magic(data: bytes, expected: int, path: Union[str, Path]) -> None:
    if len(data) < 4:
        raise IdxFormatError(f"{path}: file shorter than the magic number", "TRUNCATED",
                             byte_offset=len(data), details={'path': str(path)})
    (magic,) = struct.unpack('>I', data[:4])
    if magic != expected:
        raise IdxFormatError(f"{path}: magic 0x{magic:08x}, expected 0x{expected:08x}", "BAD_MAGIC",
                             byte_offset=0, details={'path': str(path), 'magic': magic})


def parse_idx_images(data: bytes, path: Union[str, Path] = "<images>") -> np.ndarray:
    """
    Decode an IDX image file

    Returns:
        uint8 array of shape (count, rows, cols)
    """
    _check_magic(data, IMAGE_MAGIC, path)
    if len(data) < IMAGE_HEADER_SIZE:
        raise IdxFormatError(f"{path}: header truncated", "TRUNCATED",
                             byte_offset=len(data), details={'path': str(path)})
    count, rows, cols = struct.unpack('>III', data[4:IMAGE_HEADER_SIZE])
    if count and not (rows and cols):
        raise IdxFormatError(f"{path}: {count} images of {rows}x{cols} pixels", "BAD_DIMENSIONS",
                             byte_offset=8 if not rows else 12,
                             details={'path': str(path), 'rows': rows, 'cols': cols})
    expected = IMAGE_HEADER_SIZE + count * rows * cols
    if len(data) < expected:
        raise IdxFormatError(
            f"{path}: pixel payload truncated ({len(data)} of {expected} bytes)", "TRUNCATED",
            byte_offset=len(data), details={'path': str(path), 'expected_size': expected})
    if len(data) > expected:
        logger.warning(f"{path}: {len(data) - expected} trailing bytes ignored")
    if not count:
        return np.zeros((0, rows, cols), dtype=np.uint8)
    pixels = np.frombuffer(data, dtype=np.uint8, count=count * rows * cols, offset=IMAGE_HEADER_SIZE)
    return pixels.reshape(count, rows, cols)


def parse_idx_labels(data: bytes, path: Union[str, Path] = "<labels>") -> np.ndarray:
    """
    Decode an IDX label file

    Returns:
        uint8 array of shape (count,)
    """
    _check_magic(data, LABEL_MAGIC, path)
    if len(data) < LABEL_HEADER_SIZE:
        raise IdxFormatError(f"{path}: header truncated", "TRUNCATED",
                             byte_offset=len(data), details={'path': str(path)})
    (count,) = struct.unpack('>I', data[4:LABEL_HEADER_SIZE])
    expected = LABEL_HEADER_SIZE + count
    if len(data) < expected:
        raise IdxFormatError(
            f"{path}: label payload truncated ({len(data)} of {expected} bytes)", "TRUNCATED",
            byte_offset=len(data), details={'path': str(path), 'expected_size': expected})
    if not count:
        return np.zeros(0, dtype=np.uint8)
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=LABEL_HEADER_SIZE)


def load_idx(images_path: Union[str, Path], labels_path: Union[str, Path],
             num_classes: Optional[int] = None, limit: Optional[int] = None) -> List[LabeledSample]:
    """
    Load an IDX image/label pair as LabeledSamples

    Args:
        images_path: IDX image file
        labels_path: IDX label file
        num_classes: One-hot width (max label + 1 when omitted, at least 2)
        limit: Keep only the first `limit` samples

    Returns:
        Samples with flattened pixels in [0,1]
    """
    images = parse_idx_images(_read_bytes(images_path), images_path)
    labels = parse_idx_labels(_read_bytes(labels_path), labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"{images.shape[0]} images but {labels.shape[0]} labels", "COUNT_MISMATCH",
            byte_offset=4,
            details={'images': int(images.shape[0]), 'labels': int(labels.shape[0])})

    if num_classes is None:
        num_classes = max(2, int(labels.max()) + 1) if labels.size else 2
    elif labels.size and int(labels.max()) >= num_classes:
        offset = LABEL_HEADER_SIZE + int(np.argmax(labels >= num_classes))
        raise IdxFormatError(f"Label {int(labels.max())} exceeds num_classes={num_classes}",
                             "BAD_LABEL", byte_offset=offset)

    count = images.shape[0] if limit is None else min(limit, images.shape[0])
    flat = images[:count].reshape(count, images.shape[1] * images.shape[2]).astype(np.float64) / 255.0
    samples = [LabeledSample(x=flat[i], y=one_hot(int(labels[i]), num_classes)) for i in range(count)]
    logger.info(f"Loaded {len(samples)} IDX samples ({images.shape[1]}x{images.shape[2]}, "
                f"{num_classes} classes)")
    return samples
