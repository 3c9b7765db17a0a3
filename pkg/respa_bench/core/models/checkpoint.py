#!/usr/bin/env python3
"""
Model Checkpoints - Diff-able Text Persistence

A checkpoint is a self-describing text file: a header of `key: value`
lines followed by the row-major weight payload written as decimal text.
Floats are written with repr(), the shortest string that parses back to
the same 64-bit value, so load(save(m)) is bit-identical.

    # respa-bench checkpoint
    format_version: 1
    model_id: surrogate
    seed: 7
    architecture: {"activation": "relu", "hidden_sizes": [32], ...}
    layer 0 weight 64 32
    <64 lines of 32 numbers>
    layer 0 bias 32
    <1 line of 32 numbers>
    ...
    end
"""

import json
import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from core.models.classifier_model import ArchitectureSpec, ClassifierModel
from core.utils.errors import BenchError, CheckpointError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAGIC_LINE = "# respa-bench checkpoint"


def _format_row(row: np.ndarray) -> str:
    return ' '.join(repr(float(v)) for v in row)


def render_model(model: ClassifierModel) -> str:
    """Render a model to checkpoint text"""
    lines = [
        MAGIC_LINE,
        f"format_version: {FORMAT_VERSION}",
        f"model_id: {model.model_id}",
        f"seed: {model.seed}",
        f"architecture: {json.dumps(model.architecture.to_dict(), sort_keys=True)}",
    ]
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        lines.append(f"layer {i} weight {w.shape[0]} {w.shape[1]}")
        lines.extend(_format_row(row) for row in w)
        lines.append(f"layer {i} bias {b.shape[0]}")
        lines.append(_format_row(b))
    lines.append("end")
    return '\n'.join(lines) + '\n'


def save_model(model: ClassifierModel, path: Union[str, Path]) -> Path:
    """
    Write a model checkpoint

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_model(model), encoding='utf-8')
    logger.info(f"Saved checkpoint {path}")
    return path


class _LineReader:
    """Sequential line access with line numbers for error messages"""

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.index = 0

    def next(self, expecting: str) -> str:
        if self.index >= len(self.lines):
            raise CheckpointError(f"Checkpoint ends early while reading {expecting}",
                                  "TRUNCATED", field=expecting,
                                  details={'line': self.index + 1})
        line = self.lines[self.index]
        self.index += 1
        return line

    @property
    def line_number(self) -> int:
        return self.index


def _parse_header_field(reader: _LineReader, name: str) -> str:
    line = reader.next(name)
    key, sep, value = line.partition(':')
    if not sep or key.strip() != name:
        raise CheckpointError(f"Expected field '{name}' on line {reader.line_number}, got {line!r}",
                              field=name, details={'line': reader.line_number})
    return value.strip()


def _parse_numbers(line: str, count: int, field: str, reader: _LineReader) -> List[float]:
    parts = line.split()
    if len(parts) != count:
        raise CheckpointError(
            f"{field}: expected {count} values on line {reader.line_number}, got {len(parts)}",
            field=field, details={'line': reader.line_number})
    try:
        values = [float(p) for p in parts]
    except ValueError as e:
        raise CheckpointError(f"{field}: non-numeric value on line {reader.line_number}",
                              field=field, original_error=e,
                              details={'line': reader.line_number}) from e
    if not np.all(np.isfinite(values)):
        raise CheckpointError(f"{field}: non-finite value on line {reader.line_number}",
                              field=field, details={'line': reader.line_number})
    return values


def _parse_layer_header(reader: _LineReader, index: int, kind: str) -> Tuple[int, ...]:
    field = f"layer {index} {kind}"
    line = reader.next(field)
    parts = line.split()
    if parts[:3] != ["layer", str(index), kind]:
        raise CheckpointError(f"Expected '{field}' header on line {reader.line_number}, got {line!r}",
                              field=field, details={'line': reader.line_number})
    try:
        return tuple(int(p) for p in parts[3:])
    except ValueError as e:
        raise CheckpointError(f"{field}: bad shape on line {reader.line_number}",
                              field=field, original_error=e) from e


def parse_model(text: str) -> ClassifierModel:
    """
    Parse checkpoint text into a model

    Raises:
        CheckpointError: naming the offending field; no partial model is returned
    """
    reader = _LineReader(text)
    if reader.next("magic") != MAGIC_LINE:
        raise CheckpointError("Not a respa-bench checkpoint (bad first line)", field="magic")

    version_text = _parse_header_field(reader, "format_version")
    try:
        version = int(version_text)
    except ValueError as e:
        raise CheckpointError(f"format_version is not an integer: {version_text!r}",
                              field="format_version", original_error=e) from e
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version} (supported: {FORMAT_VERSION})",
                              "UNSUPPORTED_VERSION", field="format_version",
                              details={'version': version})

    model_id = _parse_header_field(reader, "model_id")
    seed_text = _parse_header_field(reader, "seed")
    try:
        seed = int(seed_text)
    except ValueError as e:
        raise CheckpointError(f"seed is not an integer: {seed_text!r}", field="seed",
                              original_error=e) from e
    arch_text = _parse_header_field(reader, "architecture")
    try:
        architecture = ArchitectureSpec.from_dict(json.loads(arch_text))
    except (ValueError, KeyError, TypeError, BenchError) as e:
        raise CheckpointError(f"architecture is invalid: {e}", field="architecture",
                              original_error=e) from e

    sizes = architecture.layer_sizes
    weights, biases = [], []
    for i in range(len(sizes) - 1):
        shape = _parse_layer_header(reader, i, "weight")
        if shape != (sizes[i], sizes[i + 1]):
            raise CheckpointError(f"layer {i} weight shape {shape} disagrees with architecture",
                                  field=f"layer {i} weight")
        rows = [_parse_numbers(reader.next(f"layer {i} weight"), shape[1], f"layer {i} weight", reader)
                for _ in range(shape[0])]
        weights.append(np.array(rows, dtype=np.float64).reshape(shape))

        bias_shape = _parse_layer_header(reader, i, "bias")
        if bias_shape != (sizes[i + 1],):
            raise CheckpointError(f"layer {i} bias shape {bias_shape} disagrees with architecture",
                                  field=f"layer {i} bias")
        biases.append(np.array(_parse_numbers(reader.next(f"layer {i} bias"), sizes[i + 1],
                                              f"layer {i} bias", reader), dtype=np.float64))

    if reader.next("end") != "end":
        raise CheckpointError(f"Expected 'end' on line {reader.line_number}", field="end")
    return ClassifierModel(architecture, weights, biases, seed=seed, model_id=model_id)


def load_model(path: Union[str, Path]) -> ClassifierModel:
    """Read a model checkpoint from disk"""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}", "UNREADABLE",
                              field="path", original_error=e) from e
    model = parse_model(text)
    logger.debug(f"Loaded checkpoint {path} ({model.architecture.describe()})")
    return model
