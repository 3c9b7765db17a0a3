#!/usr/bin/env python3
"""
Error Types for the ResPA Benchmark

Every failure the library raises on purpose is a BenchError subclass. Each
carries a short machine-readable error_type code plus a details dictionary so
the CLI can log a structured diagnostic and tests can assert on the code
rather than on message wording.
"""

from datetime import datetime
from typing import Any, Dict, Optional


class BenchError(Exception):
    """
    Base exception for all benchmark errors

    Provides detailed information about what failed and where, to help
    with debugging configuration files, checkpoints and data files.
    """

    default_error_type = "GENERIC"

    def __init__(self, message: str, error_type: Optional[str] = None,
                 details: Optional[Dict[str, Any]] = None,
                 original_error: Optional[Exception] = None):
        """
        Initialize BenchError with detailed error information

        Args:
            message: Human-readable error description
            error_type: Short code such as DIMENSION_MISMATCH or BAD_MAGIC
            details: Extra context (field names, byte offsets, shapes)
            original_error: Original exception that caused this error
        """
        super().__init__(message)
        self.error_type = error_type or self.default_error_type
        self.details = dict(details) if details else {}
        self.original_error = original_error
        self.timestamp = datetime.now()

    def get_debug_info(self) -> Dict[str, Any]:
        """
        Get comprehensive debug information for troubleshooting

        Returns:
            Dictionary with error class, code, message and context
        """
        return {
            'error_class': self.__class__.__name__,
            'error_type': self.error_type,
            'message': str(self),
            'timestamp': self.timestamp.isoformat(),
            'details': self.details,
            'original_error': str(self.original_error) if self.original_error else None,
        }


class DimensionError(BenchError):
    """Operand or input has the wrong length for the model or vector op"""
    default_error_type = "DIMENSION_MISMATCH"


class TrainingDivergedError(BenchError):
    """Training produced a non-finite loss"""
    default_error_type = "LOSS_NAN"


class CheckpointError(BenchError):
    """Model checkpoint file could not be parsed"""
    default_error_type = "MALFORMED_FIELD"

    def __init__(self, message: str, error_type: Optional[str] = None,
                 field: Optional[str] = None, **kwargs):
        super().__init__(message, error_type, **kwargs)
        self.field = field
        if field is not None:
            self.details.setdefault('field', field)


class DataError(BenchError):
    """Dataset is empty or unusable for the requested command"""
    default_error_type = "EMPTY_DATASET"


class IdxFormatError(BenchError):
    """IDX image/label file is malformed"""
    default_error_type = "MALFORMED_IDX"

    def __init__(self, message: str, error_type: Optional[str] = None,
                 byte_offset: Optional[int] = None, **kwargs):
        super().__init__(message, error_type, **kwargs)
        self.byte_offset = byte_offset
        if byte_offset is not None:
            self.details.setdefault('byte_offset', byte_offset)


class ConfigError(BenchError):
    """Run configuration is invalid"""
    default_error_type = "BAD_VALUE"

    def __init__(self, message: str, error_type: Optional[str] = None,
                 field: Optional[str] = None, line: Optional[int] = None, **kwargs):
        super().__init__(message, error_type, **kwargs)
        self.field = field
        self.line = line
        if field is not None:
            self.details.setdefault('field', field)
        if line is not None:
            self.details.setdefault('line', line)


class AttackError(BenchError):
    """Attack could not be run or produced an out-of-budget example"""
    default_error_type = "ATTACK_FAILED"


class EvaluationError(BenchError):
    """Evaluation inputs are empty or inconsistent"""
    default_error_type = "EVALUATION_FAILED"


class DependencyError(BenchError):
    """A command needs artifacts that an earlier command has not produced"""
    default_error_type = "MISSING_ARTIFACT"


class OutputExistsError(BenchError):
    """Refusing to overwrite a differing output file without --force"""
    default_error_type = "OUTPUT_EXISTS"
