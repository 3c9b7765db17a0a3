"""Attack success rates, transfer matrices, hyperparameter sweeps and loss-surface grids."""

from .transfer import (
    SWEEPABLE_PARAMETERS, AttackSummary, SweepRow, TransferReport, attack_success_rate,
    check_compatible, coerce_sweep_values, evaluation_set, score_adversarial_sets,
    summarize_reports, sweep_parameter, sweep_to_csv, transfer_matrix,
)
from .surface import (
    SurfaceGrid, grid_coordinates, loss_surface, mean_gap_score, orthonormal_directions,
    sharpness_score,
)

__all__ = [
    'SWEEPABLE_PARAMETERS', 'AttackSummary', 'SweepRow', 'TransferReport', 'attack_success_rate',
    'check_compatible', 'coerce_sweep_values', 'evaluation_set', 'score_adversarial_sets',
    'summarize_reports', 'sweep_parameter', 'sweep_to_csv', 'transfer_matrix',
    'SurfaceGrid', 'grid_coordinates', 'loss_surface', 'mean_gap_score', 'orthonormal_directions',
    'sharpness_score',
]
