#!/usr/bin/env python3
"""
Residual Perturbation Attack - Flatness-Regularized Iterative Steps

One ResPA iteration, for the current iterate x_adv with moving average e
and momentum g:

1. draw N neighbors x_i = x_adv + lambda_i, lambda_i uniform in [-beta*eps, beta*eps]^d
2. per neighbor: grad_i = dJ(x_i)
                 M      = theta * e + (1 - theta) * grad_i      (reference gradient)
                 g_res  = grad_i - M                            (residual gradient)
                 x*     = x_i - rho * g_res / ||g_res||         (perturbed point)
                 G_i    = (1 - gamma) * grad_i + gamma * dJ(x*)
3. g_bar  = mean of G_i
4. e'     = theta * e + (1 - theta) * g_bar
5. g'     = mu * g + g_bar / ||g_bar||_1
6. x_adv' = Clip(x_adv + alpha * sign(g'))

Maximizing (1 - gamma) * J(x_i) + gamma * J(x*) adds gamma times the
flatness term J(x*) - J(x_i) to the loss. gamma = 0 is the plain loss,
gamma = 1 is the perturbed-point loss alone.

The same step with the raw current gradient as the perturbation direction
(flat_current_grad) is the baseline the residual direction is measured
against.

Models only need loss_and_gradient(x, y) and cross_entropy_loss(x, y).
"""

from dataclasses import dataclass
from typing import List, Optional, Protocol, Tuple
import logging

import numpy as np

from core.attacks.attack_config import (
    AttackConfig, AttackState, ReferencePoint, ResidualNorm, StepRecord,
)
from core.tensor import (
    Vec, SeededRng, check_same_length, l1_norm, l2_norm, linf_norm, sample_uniform_box, sign,
)

logger = logging.getLogger(__name__)

# Norms below this count as zero in the degenerate-direction rules
ZERO_NORM = 1e-12


class LossOracle(Protocol):
    """Anything exposing a differentiable loss in its input"""

    def loss_and_gradient(self, x: Vec, y: Vec) -> Tuple[float, Vec]:
        ...

    def cross_entropy_loss(self, x: Vec, y: Vec) -> float:
        ...


def reference_gradient(e_t: Vec, grad: Vec, theta: float) -> Vec:
    """M = theta * e_t + (1 - theta) * grad"""
    check_same_length(e_t, grad)
    return theta * e_t + (1.0 - theta) * grad


def residual_gradient(grad: Vec, M: Vec) -> Vec:
    """g_res = grad - M"""
    check_same_length(grad, M)
    return grad - M


def perturbed_point(x_i: Vec, g_res: Vec, rho: float,
                    norm: ResidualNorm = ResidualNorm.L2) -> Vec:
    """
    x* = x_i - rho * g_res / ||g_res||

    A residual with norm below 1e-12 leaves x* = x_i.
    """
    check_same_length(x_i, g_res)
    size = l2_norm(g_res) if norm is ResidualNorm.L2 else l1_norm(g_res)
    if rho == 0 or size < ZERO_NORM:
        return np.array(x_i, dtype=np.float64)
    return x_i - rho * (g_res / size)


def combine_sample_gradients(grad_i: Vec, grad_star: Vec, gamma: float) -> Vec:
    """
    (1 - gamma) * grad_i + gamma * grad_star

    The two boundary values of gamma return the matching gradient exactly.
    """
    if gamma == 0.0:
        return grad_i
    if gamma == 1.0:
        return grad_star
    return (1.0 - gamma) * grad_i + gamma * grad_star


def respa_sample_gradient(model: LossOracle, x_i: Vec, y: Vec, x_star: Vec, gamma: float) -> Vec:
    """Gradient of the flatness-regularized loss at one neighborhood sample"""
    _, grad_i = model.loss_and_gradient(x_i, y)
    if np.array_equal(x_star, x_i):
        return grad_i
    _, grad_star = model.loss_and_gradient(x_star, y)
    return combine_sample_gradients(grad_i, grad_star, gamma)


def clip_to_budget(x: Vec, x_orig: Vec, epsilon: float) -> Vec:
    """Project onto the epsilon L-inf ball around x_orig, then onto [0,1]"""
    projected = np.clip(x, x_orig - epsilon, x_orig + epsilon)
    return np.clip(projected, 0.0, 1.0)


def momentum_update(g: Vec, g_bar: Vec, mu: float) -> Vec:
    """
    g' = mu * g + g_bar / ||g_bar||_1

    A g_bar with L1 norm below 1e-12 contributes nothing.
    """
    size = l1_norm(g_bar)
    if size < ZERO_NORM:
        return mu * g
    return mu * g + g_bar / size


def sign_step(state: AttackState, x_orig: Vec, g_next: Vec, alpha: float, epsilon: float) -> Vec:
    """Clip(x_adv + alpha * sign(g'))"""
    return clip_to_budget(state.x_adv + alpha * sign(g_next), x_orig, epsilon)


@dataclass
class _SampleOutcome:
    gradient: Vec
    flatness: float
    residual_norm: float


def _evaluate_sample(model: LossOracle, x_i: Vec, y: Vec, e_t: Vec, cfg: AttackConfig,
                     use_residual: bool, shared_residual: Optional[Vec]) -> _SampleOutcome:
    loss_i, grad_i = model.loss_and_gradient(x_i, y)
    if not use_residual:
        direction = grad_i
    elif shared_residual is not None:
        direction = shared_residual
    else:
        M = reference_gradient(e_t, grad_i, cfg.theta)
        direction = residual_gradient(grad_i, M)

    x_star = perturbed_point(x_i, direction, cfg.rho, cfg.residual_norm)
    if np.array_equal(x_star, x_i):
        return _SampleOutcome(grad_i, 0.0, l2_norm(direction))
    loss_star, grad_star = model.loss_and_gradient(x_star, y)
    return _SampleOutcome(
        gradient=combine_sample_gradients(grad_i, grad_star, cfg.gamma),
        flatness=loss_star - loss_i,
        residual_norm=l2_norm(direction),
    )


def flatness_step_detailed(model: LossOracle, state: AttackState, x_orig: Vec, y: Vec,
                           cfg: AttackConfig, rng: SeededRng,
                           use_residual: bool = True) -> Tuple[AttackState, StepRecord]:
    """
    One flatness-regularized iteration with its diagnostics

    Args:
        model: Surrogate loss oracle
        state: Current state, t < T
        x_orig: Clean input
        y: One-hot label
        cfg: Attack hyperparameters
        rng: Generator for the neighborhood draws
        use_residual: Residual direction (ResPA) when True, raw current
            gradient (flat_current_grad) when False

    Returns:
        (next state, record with loss at the new iterate, mean flatness
        term, mean direction norm and step size)
    """
    d = check_same_length(state.x_adv, x_orig)

    shared_residual = None
    if use_residual and cfg.reference_point is ReferencePoint.ADV:
        _, grad_adv = model.loss_and_gradient(state.x_adv, y)
        shared_residual = residual_gradient(grad_adv, reference_gradient(state.e, grad_adv, cfg.theta))

    outcomes: List[_SampleOutcome] = []
    for _ in range(cfg.N):
        x_i = state.x_adv + sample_uniform_box(rng, d, cfg.sample_half_width)
        outcomes.append(_evaluate_sample(model, x_i, y, state.e, cfg, use_residual, shared_residual))

    if cfg.N == 1:
        g_bar = outcomes[0].gradient
    else:
        g_bar = np.mean(np.stack([o.gradient for o in outcomes]), axis=0)

    e_next = cfg.theta * state.e + (1.0 - cfg.theta) * g_bar
    g_next = momentum_update(state.g, g_bar, cfg.mu)
    x_next = sign_step(state, x_orig, g_next, cfg.alpha, cfg.epsilon)

    record = StepRecord(
        t=state.t + 1,
        loss=float(model.cross_entropy_loss(x_next, y)),
        flatness=float(np.mean([o.flatness for o in outcomes])),
        residual_norm=float(np.mean([o.residual_norm for o in outcomes])),
        step=linf_norm(x_next - state.x_adv),
    )
    logger.debug(f"t={record.t} loss={record.loss:.6f} flatness={record.flatness:.6f} "
                 f"residual_norm={record.residual_norm:.6f}")
    return AttackState(x_adv=x_next, g=g_next, e=e_next, t=state.t + 1), record


def respa_step(model: LossOracle, state: AttackState, x_orig: Vec, y: Vec,
               cfg: AttackConfig, rng: SeededRng) -> AttackState:
    """One ResPA iteration; returns the state for t + 1"""
    next_state, _ = flatness_step_detailed(model, state, x_orig, y, cfg, rng, use_residual=True)
    return next_state
