#!/usr/bin/env python3
"""
Unit Tests for Model Checkpoints

Validates bit-exact persistence and the field-naming parse errors.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the respa_bench directory to sys.path for imports
current_dir = Path(__file__).parent
app_dir = current_dir.parent.parent
sys.path.insert(0, str(app_dir))

from core.models import (
    Activation, ArchitectureSpec, initialize_model, load_model, parse_model, render_model, save_model,
)
from core.tensor import SeededRng
from core.utils.errors import CheckpointError


@pytest.fixture
def model():
    arch = ArchitectureSpec(5, 3, (4, 3), Activation.TANH)
    return initialize_model(arch, SeededRng(8), seed=8, model_id="saved")


class TestCheckpointRoundTrip:
    """
    Saved and reloaded models must be identical to the last bit
    """

    def test_save_then_load_is_bit_identical(self, model, tmp_path):
        path = save_model(model, tmp_path / "ckpt" / "saved.ckpt")
        loaded = load_model(path)

        assert loaded.model_id == "saved"
        assert loaded.seed == 8
        assert loaded.architecture == model.architecture
        for a, b in zip(model.weights + model.biases, loaded.weights + loaded.biases):
            assert np.array_equal(a, b)

    def test_render_is_stable(self, model):
        assert render_model(parse_model(render_model(model))) == render_model(model)

    def test_predictions_survive(self, model):
        x = SeededRng(1).uniform(0.0, 1.0, 5)
        assert np.array_equal(parse_model(render_model(model)).forward(x), model.forward(x))


class TestCheckpointErrors:
    """
    Malformed checkpoints fail with the offending field named
    """

    def test_wrong_version(self, model):
        text = render_model(model).replace("format_version: 1", "format_version: 2")
        with pytest.raises(CheckpointError) as exc_info:
            parse_model(text)
        assert exc_info.value.error_type == "UNSUPPORTED_VERSION"
        assert exc_info.value.field == "format_version"

    def test_truncated_file(self, model):
        lines = render_model(model).splitlines()
        with pytest.raises(CheckpointError) as exc_info:
            parse_model('\n'.join(lines[:8]))
        assert exc_info.value.error_type == "TRUNCATED"

    def test_non_numeric_weight(self, model):
        lines = render_model(model).splitlines()
        row = lines.index("layer 0 weight 5 4") + 1
        lines[row] = "abc " + ' '.join(lines[row].split()[1:])
        with pytest.raises(CheckpointError) as exc_info:
            parse_model('\n'.join(lines))
        assert exc_info.value.field == "layer 0 weight"
        assert exc_info.value.error_type == "MALFORMED_FIELD"

    @pytest.mark.parametrize("value", ["nan", "inf", "-inf"])
    def test_non_finite_weight(self, model, value):
        lines = render_model(model).splitlines()
        row = lines.index("layer 0 weight 5 4") + 1
        lines[row] = value + " " + ' '.join(lines[row].split()[1:])
        with pytest.raises(CheckpointError) as exc_info:
            parse_model('\n'.join(lines))
        assert exc_info.value.field == "layer 0 weight"
        assert exc_info.value.details['line'] == row + 1

    def test_wrong_row_length(self, model):
        lines = render_model(model).splitlines()
        row = lines.index("layer 1 bias 3") + 1
        lines[row] = ' '.join(lines[row].split()[:2])
        with pytest.raises(CheckpointError) as exc_info:
            parse_model('\n'.join(lines))
        assert exc_info.value.field == "layer 1 bias"

    def test_shape_disagrees_with_architecture(self, model):
        text = render_model(model).replace("layer 0 weight 5 4", "layer 0 weight 5 5")
        with pytest.raises(CheckpointError) as exc_info:
            parse_model(text)
        assert exc_info.value.field == "layer 0 weight"

    def test_not_a_checkpoint(self):
        with pytest.raises(CheckpointError) as exc_info:
            parse_model("hello\n")
        assert exc_info.value.field == "magic"

    def test_bad_architecture(self, model):
        text = render_model(model).replace('"activation": "tanh"', '"activation": "sigmoid"')
        with pytest.raises(CheckpointError) as exc_info:
            parse_model(text)
        assert exc_info.value.field == "architecture"

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError) as exc_info:
            load_model(tmp_path / "nope.ckpt")
        assert exc_info.value.error_type == "UNREADABLE"

    def test_invalid_utf8(self, model, tmp_path):
        path = tmp_path / "binary.ckpt"
        path.write_bytes(render_model(model).encode('utf-8') + b"\xff\xfe\x00")
        with pytest.raises(CheckpointError) as exc_info:
            load_model(path)
        assert exc_info.value.error_type == "UNREADABLE"
        assert isinstance(exc_info.value.original_error, UnicodeDecodeError)
