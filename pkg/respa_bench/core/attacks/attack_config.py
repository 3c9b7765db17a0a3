#!/usr/bin/env python3
"""
Attack Configuration, State and Trace

Data structures shared by every iterative attack:

- AttackConfig: all hyperparameters plus the RNG seed, validated at construction
- AttackState: the per-iteration mutable quantities of one attack run
- AttackTrace: per-iteration diagnostics, serialized as delimited text

Budgets are stored in normalized [0,1] pixel units. The usual published
values (epsilon 16, step 1.6 on the 0-255 scale) become 16/255 and 1.6/255;
AttackConfig.from_pixel_units performs that conversion.
"""

from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Dict, List, Optional
import logging

import numpy as np

from core.tensor import Vec
from core.utils.errors import AttackError, ConfigError

logger = logging.getLogger(__name__)

PIXEL_SCALE = 255.0


class AttackAlgorithm(Enum):
    """Attack algorithms selectable by id"""
    NONE = "none"                            # identity, x_adv = x
    FGSM = "fgsm"                            # one sign step of size epsilon
    IFGSM = "ifgsm"
    MIFGSM = "mifgsm"
    FLAT_CURRENT_GRAD = "flat_current_grad"  # flatness term along the raw current gradient
    RESPA = "respa"

    @classmethod
    def from_id(cls, attack_id: str) -> 'AttackAlgorithm':
        try:
            return cls(attack_id)
        except ValueError as e:
            allowed = ', '.join(a.value for a in cls)
            raise AttackError(f"Unknown attack id '{attack_id}' (allowed: {allowed})",
                              "UNKNOWN_ATTACK", details={'attack_id': attack_id},
                              original_error=e) from e


class ResidualNorm(Enum):
    """Norm normalizing the perturbation direction of the perturbed point"""
    L2 = "l2"
    L1 = "l1"


class ReferencePoint(Enum):
    """Where the gradient feeding the reference gradient is evaluated"""
    SAMPLE = "sample"   # per neighborhood sample x_t^i
    ADV = "adv"         # once per step at x_t^adv


@dataclass(frozen=True)
class AttackConfig:
    """
    Attack hyperparameters

    rho defaults to epsilon when left as None.
    """
    epsilon: float = 16.0 / PIXEL_SCALE
    alpha: float = 1.6 / PIXEL_SCALE
    T: int = 10
    mu: float = 1.0
    N: int = 5
    theta: float = 0.6
    gamma: float = 0.6
    beta: float = 1.5
    rho: Optional[float] = None
    seed: int = 0
    residual_norm: ResidualNorm = ResidualNorm.L2
    reference_point: ReferencePoint = ReferencePoint.SAMPLE

    def __post_init__(self):
        if self.rho is None:
            object.__setattr__(self, 'rho', self.epsilon)
        if isinstance(self.residual_norm, str):
            object.__setattr__(self, 'residual_norm', ResidualNorm(self.residual_norm))
        if isinstance(self.reference_point, str):
            object.__setattr__(self, 'reference_point', ReferencePoint(self.reference_point))
        self._validate()

    def _validate(self) -> None:
        checks = [
            ('epsilon', self.epsilon > 0, "must be > 0"),
            ('alpha', self.alpha > 0, "must be > 0"),
            ('T', isinstance(self.T, int) and self.T >= 1, "must be an integer >= 1"),
            ('N', isinstance(self.N, int) and self.N >= 1, "must be an integer >= 1"),
            ('theta', 0.0 <= self.theta < 1.0, "must lie in [0, 1)"),
            ('gamma', 0.0 <= self.gamma <= 1.0, "must lie in [0, 1]"),
            ('beta', self.beta >= 0, "must be >= 0"),
            ('rho', self.rho >= 0, "must be >= 0"),
            ('mu', self.mu >= 0, "must be >= 0"),
        ]
        for name, ok, rule in checks:
            if not ok:
                raise ConfigError(f"AttackConfig.{name} {rule} (got {getattr(self, name)!r})",
                                  "BAD_VALUE", field=name)

    @property
    def sample_half_width(self) -> float:
        """Half-width of the neighborhood sampling box, beta * epsilon"""
        return self.beta * self.epsilon

    def with_overrides(self, **overrides: Any) -> 'AttackConfig':
        """Copy with some fields replaced; rho follows epsilon unless given"""
        if 'epsilon' in overrides and 'rho' not in overrides and self.rho == self.epsilon:
            overrides['rho'] = None
        return replace(self, **overrides)

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_pixel_units(cls, epsilon: float = 16.0, alpha: float = 1.6,
                         rho: Optional[float] = None, **kwargs: Any) -> 'AttackConfig':
        """Build a config from budgets given on the 0-255 scale"""
        return cls(epsilon=epsilon / PIXEL_SCALE, alpha=alpha / PIXEL_SCALE,
                   rho=None if rho is None else rho / PIXEL_SCALE, **kwargs)

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary for serialization"""
        return {
            'epsilon': self.epsilon,
            'alpha': self.alpha,
            'T': self.T,
            'mu': self.mu,
            'N': self.N,
            'theta': self.theta,
            'gamma': self.gamma,
            'beta': self.beta,
            'rho': self.rho,
            'seed': self.seed,
            'residual_norm': self.residual_norm.value,
            'reference_point': self.reference_point.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base: Optional['AttackConfig'] = None) -> 'AttackConfig':
        """
        Create configuration from dictionary, rejecting unknown keys

        Args:
            data: Field values; omitted fields come from base
            base: Defaults to fill in (the published defaults when None)
        """
        known = set(cls.field_names())
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown attack config key(s): {', '.join(unknown)}",
                              "UNKNOWN_KEY", field=unknown[0])
        base = base or cls()
        merged = base.to_dict()
        if 'epsilon' in data and 'rho' not in data and base.rho == base.epsilon:
            merged['rho'] = None
        merged.update(data)
        try:
            return cls(**merged)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid attack config: {e}", "BAD_VALUE", original_error=e) from e


@dataclass
class AttackState:
    """
    Mutable quantities of one attack run at iteration t

    g is the momentum, e the moving average of the averaged gradients.
    Both start at zero.
    """
    x_adv: Vec
    g: Vec
    e: Vec
    t: int = 0

    @classmethod
    def initial(cls, x_orig: Vec) -> 'AttackState':
        x = np.array(x_orig, dtype=np.float64)
        return cls(x_adv=x, g=np.zeros_like(x), e=np.zeros_like(x), t=0)


@dataclass(frozen=True)
class StepRecord:
    """Diagnostics of one iteration"""
    t: int
    loss: float
    flatness: float
    residual_norm: float
    step: float


@dataclass
class AttackTrace:
    """Per-iteration records of an attack run"""
    algorithm: str
    records: List[StepRecord] = field(default_factory=list)

    CSV_HEADER = "t,loss,flatness,residual_norm,step"

    def append(self, record: StepRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def losses(self) -> List[float]:
        return [r.loss for r in self.records]

    def to_csv(self) -> str:
        """One row per iteration: t, loss, flatness value, residual norm, step"""
        rows = [self.CSV_HEADER]
        for r in self.records:
            rows.append(f"{r.t},{r.loss!r},{r.flatness!r},{r.residual_norm!r},{r.step!r}")
        return '\n'.join(rows) + '\n'
