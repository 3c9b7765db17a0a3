"""Iterative transfer attacks: I-FGSM, MI-FGSM, the current-gradient flatness baseline and ResPA."""

from .attack_config import (
    AttackAlgorithm, AttackConfig, AttackState, AttackTrace, PIXEL_SCALE,
    ReferencePoint, ResidualNorm, StepRecord,
)
from .respa import (
    LossOracle, clip_to_budget, combine_sample_gradients, flatness_step_detailed,
    momentum_update, perturbed_point, reference_gradient, residual_gradient,
    respa_sample_gradient, respa_step, sign_step,
)
from .runner import (
    AttackResult, ifgsm_step, mifgsm_step, run_attack, run_attack_batch, verify_budget,
)

__all__ = [
    'AttackAlgorithm', 'AttackConfig', 'AttackState', 'AttackTrace', 'PIXEL_SCALE',
    'ReferencePoint', 'ResidualNorm', 'StepRecord',
    'LossOracle', 'clip_to_budget', 'combine_sample_gradients', 'flatness_step_detailed',
    'momentum_update', 'perturbed_point', 'reference_gradient', 'residual_gradient',
    'respa_sample_gradient', 'respa_step', 'sign_step',
    'AttackResult', 'ifgsm_step', 'mifgsm_step', 'run_attack', 'run_attack_batch', 'verify_budget',
]
