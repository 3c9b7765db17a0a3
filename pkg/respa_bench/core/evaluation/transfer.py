#!/usr/bin/env python3
"""
Transfer Evaluation - Attack Success Rates and Transfer Matrices

Key Features:
- attack_success_rate: fraction of (x, x_adv) pairs whose target-model
  prediction changes; ground-truth labels play no part
- evaluation_set: keeps only samples every model classifies correctly
- transfer_matrix: adversarial examples generated once per
  (surrogate, attack) and scored on every target, the surrogate included
  (white-box cell, starred in reports)
- summarize_reports: seed-averaged white-box and transfer ASR per attack
- sweep_parameter: one summary row per value of a swept hyperparameter
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from core.attacks import AttackAlgorithm, AttackConfig, run_attack_batch
from core.models.classifier_model import ClassifierModel, LabeledSample
from core.tensor import Vec
from core.utils.errors import ConfigError, EvaluationError
from core.utils.threading_utils import TaskManager

logger = logging.getLogger(__name__)

# Hyperparameters that sweep_parameter accepts, with their value types
SWEEPABLE_PARAMETERS = {
    'beta': float,
    'N': int,
    'theta': float,
    'gamma': float,
    'rho': float,
}

AdversarialPairs = Sequence[Tuple[Vec, Vec]]


def attack_success_rate(target: ClassifierModel, pairs: AdversarialPairs) -> float:
    """
    ASR = (1/|X|) * sum of [f(x) != f(x_adv)] under the target model

    Raises:
        EvaluationError: EMPTY_INPUT for an empty list, DIMENSION_MISMATCH
            when the vectors do not fit the target
    """
    if len(pairs) == 0:
        raise EvaluationError("Attack success rate needs at least one (x, x_adv) pair", "EMPTY_INPUT")
    try:
        clean = np.stack([np.asarray(x, dtype=np.float64) for x, _ in pairs])
        adv = np.stack([np.asarray(x_adv, dtype=np.float64) for _, x_adv in pairs])
    except ValueError as e:
        raise EvaluationError(f"Pairs have inconsistent lengths: {e}", "DIMENSION_MISMATCH",
                              original_error=e) from e
    if clean.shape != adv.shape or clean.shape[1] != target.input_dim:
        raise EvaluationError(
            f"Pairs of shape {clean.shape}/{adv.shape} do not fit target "
            f"'{target.model_id}' (input_dim={target.input_dim})", "DIMENSION_MISMATCH")
    flipped = target.predict_batch(clean) != target.predict_batch(adv)
    return float(np.count_nonzero(flipped)) / len(pairs)


def check_compatible(models: Sequence[ClassifierModel],
                     samples: Sequence[LabeledSample] = ()) -> None:
    """All models and samples share input dimension and class count"""
    if not models:
        raise EvaluationError("No models given", "EMPTY_INPUT")
    d, c = models[0].input_dim, models[0].num_classes
    for m in models:
        if (m.input_dim, m.num_classes) != (d, c):
            raise EvaluationError(
                f"Model '{m.model_id}' is {m.input_dim}->{m.num_classes}, "
                f"expected {d}->{c}", "DIMENSION_MISMATCH",
                details={'model_id': m.model_id})
    for i, s in enumerate(samples):
        if s.x.shape[0] != d or s.num_classes != c:
            raise EvaluationError(f"Sample {i} does not fit {d}->{c} models", "DIMENSION_MISMATCH",
                                  details={'sample': i})


def evaluation_set(models: Sequence[ClassifierModel],
                   samples: Sequence[LabeledSample]) -> List[int]:
    """
    Indices of the samples that every model classifies correctly

    Returns:
        Sorted sample indices
    """
    check_compatible(models, samples)
    if not samples:
        return []
    xs = np.stack([s.x for s in samples])
    labels = np.array([s.label for s in samples])
    correct = np.ones(len(samples), dtype=bool)
    for m in models:
        correct &= m.predict_batch(xs) == labels
    kept = [int(i) for i in np.flatnonzero(correct)]
    logger.info(f"Evaluation set: {len(kept)} of {len(samples)} samples correct under all "
                f"{len(models)} models")
    return kept


@dataclass
class TransferReport:
    """
    ASR of one surrogate's adversarial examples on every target

    asr[attack][target_id] is in [0,1]; counts[attack][target_id] is the
    number of evaluated pairs.
    """
    surrogate_id: str
    target_ids: List[str]
    asr: Dict[str, Dict[str, float]] = field(default_factory=dict)
    counts: Dict[str, Dict[str, int]] = field(default_factory=dict)
    seed: int = 0

    @property
    def attacks(self) -> List[str]:
        return list(self.asr.keys())

    def white_box(self, attack: str) -> float:
        """Self-ASR of the surrogate"""
        return self.asr[attack][self.surrogate_id]

    def transfer_targets(self) -> List[str]:
        return [t for t in self.target_ids if t != self.surrogate_id]

    def mean_transfer(self, attack: str) -> Optional[float]:
        """Mean ASR over held-out targets, None when there are none"""
        targets = self.transfer_targets()
        if not targets:
            return None
        return float(np.mean([self.asr[attack][t] for t in targets]))

    def to_csv(self) -> str:
        """Rows are attacks, columns targets; the white-box cell carries a '*'"""
        lines = ["attack," + ','.join(self.target_ids)]
        for attack in self.attacks:
            cells = []
            for target in self.target_ids:
                cell = repr(self.asr[attack][target])
                cells.append(cell + '*' if target == self.surrogate_id else cell)
            lines.append(f"{attack}," + ','.join(cells))
        return '\n'.join(lines) + '\n'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'surrogate_id': self.surrogate_id,
            'target_ids': list(self.target_ids),
            'asr': {a: dict(row) for a, row in self.asr.items()},
            'counts': {a: dict(row) for a, row in self.counts.items()},
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TransferReport':
        return cls(surrogate_id=data['surrogate_id'], target_ids=list(data['target_ids']),
                   asr=data.get('asr', {}), counts=data.get('counts', {}), seed=data.get('seed', 0))


def _ordered_targets(surrogate: ClassifierModel,
                     targets: Sequence[ClassifierModel]) -> List[ClassifierModel]:
    # surrogate first, each model id once
    ordered = [surrogate]
    for t in targets:
        if all(t.model_id != o.model_id for o in ordered):
            ordered.append(t)
    return ordered


def score_adversarial_sets(surrogate: ClassifierModel, targets: Sequence[ClassifierModel],
                           adversarial: Dict[str, AdversarialPairs], seed: int = 0) -> TransferReport:
    """
    Build a TransferReport from already generated adversarial pairs

    Args:
        surrogate: Model the pairs were generated on
        targets: Target models; the surrogate is added when missing
        adversarial: attack id -> list of (x, x_adv)
        seed: Seed recorded in the report
    """
    ordered = _ordered_targets(surrogate, targets)
    report = TransferReport(surrogate_id=surrogate.model_id,
                            target_ids=[t.model_id for t in ordered], seed=seed)
    for attack, pairs in adversarial.items():
        report.asr[attack] = {t.model_id: attack_success_rate(t, pairs) for t in ordered}
        report.counts[attack] = {t.model_id: len(pairs) for t in ordered}
        logger.info(f"{surrogate.model_id} / {attack}: white-box ASR {report.white_box(attack):.3f}, "
                    f"mean transfer ASR {report.mean_transfer(attack)}")
    return report


def transfer_matrix(surrogates: Sequence[ClassifierModel], targets: Sequence[ClassifierModel],
                    attacks: Sequence[Union[str, AttackAlgorithm]], dataset: Sequence[LabeledSample],
                    cfg: AttackConfig, attack_configs: Optional[Dict[str, AttackConfig]] = None,
                    restrict_to_correct: bool = True, max_workers: int = 1,
                    task_manager: Optional[TaskManager] = None) -> List[TransferReport]:
    """
    Generate adversarial examples on every surrogate and score them on every target

    Args:
        surrogates: White-box models
        targets: Held-out models (surrogates may appear here too)
        attacks: Attack ids
        dataset: Clean samples
        cfg: Hyperparameters shared by all attacks
        attack_configs: Per-attack overrides of cfg, keyed by attack id
        restrict_to_correct: Keep only samples every model classifies correctly
        max_workers: Parallel workers for the attack runs

    Returns:
        One report per surrogate, in surrogate order
    """
    all_models = list(surrogates) + list(targets)
    check_compatible(all_models, dataset)
    if restrict_to_correct:
        samples = [dataset[i] for i in evaluation_set(all_models, dataset)]
    else:
        samples = list(dataset)
    if not samples:
        raise EvaluationError("No samples left to attack", "EMPTY_INPUT")

    attack_ids = [a.value if isinstance(a, AttackAlgorithm) else AttackAlgorithm.from_id(a).value
                  for a in attacks]
    manager = task_manager or TaskManager(max_workers=max_workers)
    reports = []
    for surrogate in surrogates:
        adversarial: Dict[str, AdversarialPairs] = {}
        for attack in attack_ids:
            attack_cfg = (attack_configs or {}).get(attack, cfg)
            results = run_attack_batch(attack, surrogate, samples, attack_cfg,
                                       seed_labels=(surrogate.model_id, attack), task_manager=manager)
            adversarial[attack] = [(samples[r.index].x, r.x_adv) for r in results]
        reports.append(score_adversarial_sets(surrogate, targets, adversarial, seed=cfg.seed))
    return reports


@dataclass
class AttackSummary:
    """Seed- and surrogate-averaged ASR of one attack"""
    attack: str
    white_box: float
    transfer: Optional[float]
    reports: int

    def to_dict(self) -> Dict[str, Any]:
        return {'white_box': self.white_box, 'transfer': self.transfer, 'reports': self.reports}


def summarize_reports(reports: Sequence[TransferReport]) -> Dict[str, AttackSummary]:
    """
    Average white-box and mean-transfer ASR per attack over reports

    Reports of different seeds and surrogates are pooled; an attack's
    transfer value is None when no report has a held-out target.
    """
    if not reports:
        raise EvaluationError("No reports to summarize", "EMPTY_INPUT")
    summaries: Dict[str, AttackSummary] = {}
    attacks: List[str] = []
    for r in reports:
        attacks.extend(a for a in r.attacks if a not in attacks)
    for attack in attacks:
        with_attack = [r for r in reports if attack in r.asr]
        transfers = [r.mean_transfer(attack) for r in with_attack]
        transfers = [t for t in transfers if t is not None]
        summaries[attack] = AttackSummary(
            attack=attack,
            white_box=float(np.mean([r.white_box(attack) for r in with_attack])),
            transfer=float(np.mean(transfers)) if transfers else None,
            reports=len(with_attack),
        )
    return summaries


@dataclass
class SweepRow:
    """Summary of one swept value"""
    param: str
    value: float
    white_box: float
    transfer: Optional[float]


SWEEP_CSV_HEADER = "param,value,white_box_asr,transfer_asr"


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        transfer = '' if r.transfer is None else repr(r.transfer)
        lines.append(f"{r.param},{r.value!r},{r.white_box!r},{transfer}")
    return '\n'.join(lines) + '\n'


def coerce_sweep_values(param: str, values: Sequence[Any]) -> List[Union[int, float]]:
    """Check the parameter name and convert values to its type"""
    if param not in SWEEPABLE_PARAMETERS:
        raise ConfigError(f"Cannot sweep '{param}' (allowed: {', '.join(SWEEPABLE_PARAMETERS)})",
                          "UNKNOWN_PARAMETER", field=param)
    kind = SWEEPABLE_PARAMETERS[param]
    try:
        converted = [kind(v) for v in values]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Bad value for {param}: {e}", "BAD_VALUE", field=param,
                          original_error=e) from e
    if kind is int and any(c != float(v) for c, v in zip(converted, values)):
        raise ConfigError(f"{param} takes integer values, got {list(values)}", "BAD_VALUE", field=param)
    return converted


def sweep_parameter(param: str, values: Sequence[Any], surrogates: Sequence[ClassifierModel],
                    targets: Sequence[ClassifierModel], dataset: Sequence[LabeledSample],
                    base_cfg: AttackConfig, seeds: Sequence[int] = (0,), attack: str = "respa",
                    max_workers: int = 1) -> List[SweepRow]:
    """
    Re-run the transfer protocol once per value of one hyperparameter

    Returns:
        One row per value, in the given order
    """
    converted = coerce_sweep_values(param, values)
    manager = TaskManager(max_workers=max_workers)
    rows = []
    for value in converted:
        reports = []
        for seed in seeds:
            cfg = base_cfg.with_overrides(**{param: value, 'seed': seed})
            reports.extend(transfer_matrix(surrogates, targets, [attack], dataset, cfg,
                                           task_manager=manager))
        summary = summarize_reports(reports)[attack]
        rows.append(SweepRow(param=param, value=value, white_box=summary.white_box,
                             transfer=summary.transfer))
        logger.info(f"Sweep {param}={value!r}: white-box {summary.white_box:.3f}, "
                    f"transfer {summary.transfer}")
    return rows
