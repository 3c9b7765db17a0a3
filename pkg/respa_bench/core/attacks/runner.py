#!/usr/bin/env python3
"""
Attack Runner - Common Driver for All Iterative Attacks

Every algorithm is a sequential state machine over AttackState. The runner
selects the step rule by algorithm id, runs T steps, records a trace and
re-checks the perturbation budget on the result.

Batches of samples run in parallel through the TaskManager. Each sample
gets its own generator seeded from (config seed, sample index), so the
result does not depend on worker count or scheduling.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from core.attacks.attack_config import (
    AttackAlgorithm, AttackConfig, AttackState, AttackTrace, StepRecord,
)
from core.attacks.respa import (
    LossOracle, clip_to_budget, flatness_step_detailed, momentum_update, sign_step,
)
from core.models.classifier_model import LabeledSample
from core.tensor import Vec, SeededRng, derive_seed, linf_norm, sign
from core.utils.errors import AttackError
from core.utils.threading_utils import TaskManager

logger = logging.getLogger(__name__)

BUDGET_TOLERANCE = 1e-12


@dataclass
class AttackResult:
    """Adversarial example of one sample with its trace"""
    index: int
    x_adv: Vec
    trace: AttackTrace


def verify_budget(x_adv: Vec, x_orig: Vec, epsilon: float,
                  tolerance: float = BUDGET_TOLERANCE) -> None:
    """
    Check ||x_adv - x_orig||_inf <= epsilon + tolerance and x_adv in [0,1]^d

    Raises:
        AttackError: BUDGET_VIOLATION with the offending distance
    """
    distance = linf_norm(x_adv - x_orig)
    if distance > epsilon + tolerance or np.any(x_adv < 0.0) or np.any(x_adv > 1.0):
        raise AttackError(
            f"Adversarial example violates the budget: ||x_adv - x||_inf = {distance!r}, "
            f"epsilon = {epsilon!r}, range [{float(np.min(x_adv))!r}, {float(np.max(x_adv))!r}]",
            "BUDGET_VIOLATION", details={'distance': distance, 'epsilon': epsilon})


def _gradient_step_record(model: LossOracle, x_prev: Vec, x_next: Vec, y: Vec, t: int) -> StepRecord:
    return StepRecord(t=t, loss=float(model.cross_entropy_loss(x_next, y)),
                      flatness=0.0, residual_norm=0.0, step=linf_norm(x_next - x_prev))


def ifgsm_step(model: LossOracle, state: AttackState, x_orig: Vec, y: Vec,
               cfg: AttackConfig) -> Tuple[AttackState, StepRecord]:
    """x' = Clip(x + alpha * sign(dJ(x)))"""
    _, grad = model.loss_and_gradient(state.x_adv, y)
    x_next = clip_to_budget(state.x_adv + cfg.alpha * sign(grad), x_orig, cfg.epsilon)
    record = _gradient_step_record(model, state.x_adv, x_next, y, state.t + 1)
    return AttackState(x_adv=x_next, g=state.g, e=state.e, t=state.t + 1), record


def mifgsm_step(model: LossOracle, state: AttackState, x_orig: Vec, y: Vec,
                cfg: AttackConfig) -> Tuple[AttackState, StepRecord]:
    """g' = mu * g + dJ(x) / ||dJ(x)||_1, x' = Clip(x + alpha * sign(g'))"""
    _, grad = model.loss_and_gradient(state.x_adv, y)
    g_next = momentum_update(state.g, grad, cfg.mu)
    x_next = sign_step(state, x_orig, g_next, cfg.alpha, cfg.epsilon)
    record = _gradient_step_record(model, state.x_adv, x_next, y, state.t + 1)
    return AttackState(x_adv=x_next, g=g_next, e=state.e, t=state.t + 1), record


def run_attack(algorithm: Union[str, AttackAlgorithm], model: LossOracle, sample: LabeledSample,
               cfg: AttackConfig, rng: Optional[SeededRng] = None) -> Tuple[Vec, AttackTrace]:
    """
    Run one attack on one sample

    Args:
        algorithm: Attack id or enum member
        model: Surrogate loss oracle
        sample: Clean sample
        cfg: Hyperparameters; fgsm ignores T and alpha and takes one step of size epsilon
        rng: Generator for neighborhood draws (seeded from cfg.seed when omitted)

    Returns:
        (adversarial vector, trace)
    """
    if not isinstance(algorithm, AttackAlgorithm):
        algorithm = AttackAlgorithm.from_id(algorithm)
    rng = rng or SeededRng(cfg.seed)
    x_orig = np.array(sample.x, dtype=np.float64)
    y = sample.y
    state = AttackState.initial(x_orig)
    trace = AttackTrace(algorithm=algorithm.value)

    if algorithm is AttackAlgorithm.NONE:
        loss = float(model.cross_entropy_loss(x_orig, y))
        for t in range(1, cfg.T + 1):
            trace.append(StepRecord(t=t, loss=loss, flatness=0.0, residual_norm=0.0, step=0.0))
        return state.x_adv, trace

    if algorithm is AttackAlgorithm.FGSM:
        fgsm_cfg = cfg.with_overrides(T=1, alpha=cfg.epsilon)
        state, record = ifgsm_step(model, state, x_orig, y, fgsm_cfg)
        trace.append(record)
        verify_budget(state.x_adv, x_orig, cfg.epsilon)
        return state.x_adv, trace

    for _ in range(cfg.T):
        if algorithm is AttackAlgorithm.IFGSM:
            state, record = ifgsm_step(model, state, x_orig, y, cfg)
        elif algorithm is AttackAlgorithm.MIFGSM:
            state, record = mifgsm_step(model, state, x_orig, y, cfg)
        else:
            state, record = flatness_step_detailed(
                model, state, x_orig, y, cfg, rng,
                use_residual=algorithm is AttackAlgorithm.RESPA)
        verify_budget(state.x_adv, x_orig, cfg.epsilon)
        trace.append(record)

    return state.x_adv, trace


def run_attack_batch(algorithm: Union[str, AttackAlgorithm], model: LossOracle,
                     samples: Sequence[LabeledSample], cfg: AttackConfig,
                     max_workers: int = 1, seed_labels: Sequence[object] = (),
                     task_manager: Optional[TaskManager] = None) -> List[AttackResult]:
    """
    Attack many samples, in parallel when max_workers > 1

    Sample i uses SeededRng(derive_seed(cfg.seed, *seed_labels, i)).

    Returns:
        Results in sample order
    """
    if not isinstance(algorithm, AttackAlgorithm):
        algorithm = AttackAlgorithm.from_id(algorithm)

    def attack_one(index: int) -> AttackResult:
        rng = SeededRng(derive_seed(cfg.seed, *seed_labels, index))
        x_adv, trace = run_attack(algorithm, model, samples[index], cfg, rng)
        return AttackResult(index=index, x_adv=x_adv, trace=trace)

    manager = task_manager or TaskManager(max_workers=max_workers)
    results = manager.map_ordered(attack_one, range(len(samples)),
                                  task_name=f"{algorithm.value} attack")
    logger.info(f"{algorithm.value}: attacked {len(results)} samples")
    return results
