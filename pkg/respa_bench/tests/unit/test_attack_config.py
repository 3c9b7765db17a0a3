#!/usr/bin/env python3
"""
Unit Tests for Attack Configuration, State and Traces
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the respa_bench directory to sys.path for imports
current_dir = Path(__file__).parent
app_dir = current_dir.parent.parent
sys.path.insert(0, str(app_dir))

from core.attacks import (
    AttackAlgorithm, AttackConfig, AttackState, AttackTrace, ReferencePoint, ResidualNorm, StepRecord,
)
from core.utils.errors import AttackError, ConfigError


class TestAttackConfigDefaults:
    """
    Default hyperparameters and derived values
    """

    def test_published_defaults(self):
        cfg = AttackConfig()
        assert cfg.epsilon == 16.0 / 255.0
        assert cfg.alpha == 1.6 / 255.0
        assert (cfg.T, cfg.mu, cfg.N) == (10, 1.0, 5)
        assert (cfg.theta, cfg.gamma, cfg.beta) == (0.6, 0.6, 1.5)
        assert cfg.rho == cfg.epsilon
        assert cfg.residual_norm is ResidualNorm.L2
        assert cfg.reference_point is ReferencePoint.SAMPLE

    def test_sample_half_width(self):
        cfg = AttackConfig(epsilon=0.1, beta=2.0)
        assert cfg.sample_half_width == 0.2

    def test_from_pixel_units(self):
        cfg = AttackConfig.from_pixel_units(epsilon=8, alpha=2, rho=4)
        assert cfg.epsilon == 8 / 255.0
        assert cfg.alpha == 2 / 255.0
        assert cfg.rho == 4 / 255.0

    def test_rho_follows_epsilon_override(self):
        cfg = AttackConfig().with_overrides(epsilon=0.1)
        assert cfg.rho == 0.1
        explicit = AttackConfig(rho=0.01).with_overrides(epsilon=0.1)
        assert explicit.rho == 0.01


class TestAttackConfigValidation:
    """
    Invalid values and unknown keys are rejected
    """

    @pytest.mark.parametrize("field_name, value", [
        ('epsilon', 0.0), ('alpha', -1.0), ('T', 0), ('N', 0), ('theta', 1.0),
        ('gamma', 1.5), ('beta', -0.1), ('rho', -0.1), ('mu', -1.0),
    ])
    def test_bad_values(self, field_name, value):
        with pytest.raises(ConfigError) as exc_info:
            AttackConfig(**{field_name: value})
        assert exc_info.value.field == field_name

    def test_theta_zero_allowed(self):
        assert AttackConfig(theta=0.0).theta == 0.0

    def test_from_dict_rejects_unknown_key(self):
        with pytest.raises(ConfigError) as exc_info:
            AttackConfig.from_dict({'gama': 0.5})
        assert exc_info.value.error_type == "UNKNOWN_KEY"
        assert exc_info.value.field == "gama"

    def test_from_dict_round_trip(self):
        cfg = AttackConfig(N=3, gamma=0.2, residual_norm=ResidualNorm.L1, seed=4)
        assert AttackConfig.from_dict(cfg.to_dict()) == cfg

    def test_from_dict_fills_from_base(self):
        base = AttackConfig(T=3)
        assert AttackConfig.from_dict({'N': 2}, base) == AttackConfig(T=3, N=2)


class TestAlgorithmIds:
    """
    Attack ids map to algorithms
    """

    def test_known_ids(self):
        assert AttackAlgorithm.from_id("respa") is AttackAlgorithm.RESPA
        assert AttackAlgorithm.from_id("flat_current_grad") is AttackAlgorithm.FLAT_CURRENT_GRAD

    def test_unknown_id(self):
        with pytest.raises(AttackError) as exc_info:
            AttackAlgorithm.from_id("pgd")
        assert exc_info.value.error_type == "UNKNOWN_ATTACK"


class TestStateAndTrace:
    """
    AttackState initialization and trace serialization
    """

    def test_initial_state(self):
        x = np.array([0.2, 0.4])
        state = AttackState.initial(x)
        assert np.array_equal(state.x_adv, x)
        assert state.x_adv is not x
        assert state.g.tolist() == [0.0, 0.0]
        assert state.e.tolist() == [0.0, 0.0]
        assert state.t == 0

    def test_trace_csv(self):
        trace = AttackTrace("respa")
        trace.append(StepRecord(t=1, loss=0.5, flatness=0.1, residual_norm=2.0, step=0.25))
        assert trace.to_csv() == "t,loss,flatness,residual_norm,step\n1,0.5,0.1,2.0,0.25\n"
        assert len(trace) == 1
        assert trace.losses == [0.5]
