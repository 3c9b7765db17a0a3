"""Hand-built IDX byte strings for reader tests."""

import struct
from typing import Sequence


def idx_images(images: Sequence[Sequence[int]], rows: int, cols: int, magic: int = 0x00000803,
               count: int = None) -> bytes:
    """Image file: header then each image's pixels row-major"""
    count = len(images) if count is None else count
    header = struct.pack('>IIII', magic, count, rows, cols)
    return header + bytes(p for image in images for p in image)


def idx_labels(labels: Sequence[int], magic: int = 0x00000801, count: int = None) -> bytes:
    """Label file: header then one byte per label"""
    count = len(labels) if count is None else count
    return struct.pack('>II', magic, count) + bytes(labels)
