"""
ResPA Benchmark - Main Application Class

Central coordinator behind the command-line subcommands. It loads the run
configuration, builds datasets, trains or loads models and drives the
attack, evaluation, sweep and surface commands.

Key Features:
- cmd_train: one checkpoint per configured model plus a hash manifest
- cmd_attack: adversarial sets and per-sample traces per (surrogate, attack, seed)
- cmd_eval: transfer tables with starred white-box cells and a seed-averaged summary
- cmd_sweep: one summary row per value of a hyperparameter
- cmd_surface: loss-surface grids and sharpness summaries

Every file goes through run_manifest.write_output from the calling thread,
so commands never replace a differing file without force and identical
re-runs leave the output tree byte-identical. Commands collect their
outputs and write them through RunManifest.write_all, which writes
nothing when any one of them is refused.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.settings import ApplicationSettings, AttackEntry, RunConfig
from core.attacks import run_attack_batch
from core.data import desk_datasets, load_idx
from core.evaluation import (
    TransferReport, evaluation_set, loss_surface, mean_gap_score, score_adversarial_sets,
    sharpness_score, summarize_reports, sweep_parameter, sweep_to_csv,
)
from core.models import ClassifierModel, LabeledSample, load_model, render_model, train_with_report
from core.tensor import SeededRng, derive_seed
from core.utils.errors import ConfigError, DataError, DependencyError, EvaluationError
from core.utils.run_manifest import ArtifactKind, PendingOutput, RunManifest
from core.utils.threading_utils import TaskManager

ADVERSARIAL_HEADER_PREFIX = "index,label"
SHARPNESS_HEADER = "surrogate,attack,seed,samples,mean_sharpness,mean_gap"
SCORES_HEADER = "index,sharpness,mean_gap"


def adversarial_to_csv(indices: Sequence[int], labels: Sequence[int], vectors: Sequence[np.ndarray]) -> str:
    """One row per sample: dataset index, true label, adversarial coordinates"""
    d = len(vectors[0]) if len(vectors) else 0
    lines = [ADVERSARIAL_HEADER_PREFIX + ''.join(f",x{j}" for j in range(d))]
    for index, label, x in zip(indices, labels, vectors):
        lines.append(f"{index},{label}," + ','.join(repr(float(v)) for v in x))
    return '\n'.join(lines) + '\n'


def parse_adversarial_csv(text: str, path: Path) -> List[Tuple[int, np.ndarray]]:
    """Rows of an adversarial set as (dataset index, x_adv)"""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(ADVERSARIAL_HEADER_PREFIX):
        raise DependencyError(f"{path} is not an adversarial set", "MALFORMED_ARTIFACT",
                              details={'path': str(path)})
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split(',')
        try:
            rows.append((int(parts[0]), np.array([float(p) for p in parts[2:]], dtype=np.float64)))
        except (ValueError, IndexError) as e:
            raise DependencyError(f"{path} line {number} is malformed", "MALFORMED_ARTIFACT",
                                  details={'path': str(path), 'line': number}, original_error=e) from e
    return rows


class BenchmarkApplication:
    """
    Main Application Class - Central Coordinator

    Holds the run configuration and application settings, caches datasets
    and models, and owns the output manifest.
    """

    def __init__(self, config: RunConfig, settings: Optional[ApplicationSettings] = None,
                 force: bool = False, max_workers: Optional[int] = None,
                 show_progress: Optional[bool] = None):
        """
        Initialize the application

        Args:
            config: Parsed run configuration
            settings: Application defaults
            force: Allow replacing differing output files
            max_workers: Worker threads (settings value when None)
            show_progress: Progress bars (settings value when None)
        """
        self.config = config
        self.settings = settings or ApplicationSettings()
        self.force = force
        self.max_workers = max_workers or self.settings.performance.max_workers
        self.show_progress = (self.settings.performance.show_progress
                              if show_progress is None else show_progress)
        self.output_dir = Path(config.output_dir)
        self.task_manager = TaskManager(self.max_workers, show_progress=self.show_progress)

        self._datasets: Optional[Tuple[List[LabeledSample], List[LabeledSample]]] = None
        self._models: Dict[str, ClassifierModel] = {}

        # Set up logging for this class
        self.logger = logging.getLogger(__name__)
        self.logger.info(f"BenchmarkApplication created, output directory: {self.output_dir}")

    # ============================================================================================
    # SHARED RESOURCES
    # ============================================================================================

    def datasets(self) -> Tuple[List[LabeledSample], List[LabeledSample]]:
        """(training set, evaluation set) of the configured data source"""
        if self._datasets is not None:
            return self._datasets
        data = self.config.data
        if data.source == 'idx':
            train_set = load_idx(data.train_images, data.train_labels, data.num_classes, data.train_limit)
            classes = data.num_classes or (train_set[0].num_classes if train_set else None)
            eval_set = load_idx(data.eval_images, data.eval_labels, classes, data.eval_limit)
        else:
            _, train_set, eval_set = desk_datasets(
                d=data.d, num_classes=data.num_classes, sigma=data.sigma,
                train_per_class=data.train_per_class, eval_per_class=data.eval_per_class,
                seed=data.seed, mean_radius=data.mean_radius)
        for name, samples in (("training", train_set), ("evaluation", eval_set)):
            if not samples:
                raise DataError(f"The {name} set of the '{data.source}' data source is empty",
                                details={'source': data.source, 'split': name})
        self.logger.info(f"Datasets ready: {len(train_set)} training, {len(eval_set)} evaluation samples")
        self._datasets = (train_set, eval_set)
        return self._datasets

    @property
    def checkpoint_dir(self) -> Path:
        return self.output_dir / "checkpoints"

    def model(self, model_id: str) -> ClassifierModel:
        """Load a trained model from its checkpoint"""
        if model_id not in self._models:
            self.config.model(model_id)
            path = self.checkpoint_dir / f"{model_id}.ckpt"
            if not path.exists():
                raise DependencyError(f"No checkpoint for model '{model_id}' at {path}; run 'train' first",
                                      details={'model_id': model_id, 'path': str(path)})
            self._models[model_id] = load_model(path)
        return self._models[model_id]

    def surrogates(self) -> List[ClassifierModel]:
        return [self.model(m) for m in self.config.evaluation.surrogates]

    def targets(self) -> List[ClassifierModel]:
        return [self.model(m) for m in self.config.evaluation.targets]

    def attack_samples(self) -> Tuple[List[int], List[LabeledSample]]:
        """
        Evaluation samples that every surrogate and target classifies correctly

        Returns:
            (dataset indices, samples), capped at evaluation.max_samples
        """
        _, eval_set = self.datasets()
        models = self.surrogates() + self.targets()
        indices = evaluation_set(models, eval_set)
        limit = self.config.evaluation.max_samples
        if limit is not None and len(indices) > limit:
            indices = indices[:limit]
        if not indices:
            raise EvaluationError("No evaluation sample is classified correctly by every model",
                                  "EMPTY_INPUT")
        return indices, [eval_set[i] for i in indices]

    def _attacks(self, attack_name: Optional[str]) -> List[AttackEntry]:
        return [self.config.attack(attack_name)] if attack_name else list(self.config.attacks)

    def _surrogate_ids(self, surrogate_id: Optional[str]) -> List[str]:
        if surrogate_id:
            self.config.model(surrogate_id)
            return [surrogate_id]
        return list(self.config.evaluation.surrogates)

    @staticmethod
    def run_label(surrogate_id: str, attack_name: str, seed: int) -> str:
        return f"{surrogate_id}__{attack_name}__s{seed}"

    def _manifest(self) -> RunManifest:
        return RunManifest.load(self.output_dir)

    # ============================================================================================
    # COMMANDS
    # ============================================================================================

    def cmd_train(self) -> RunManifest:
        """
        Train every configured model and write its checkpoint

        Returns:
            Checkpoint manifest (one entry per model)
        """
        train_set, _ = self.datasets()
        input_dim, num_classes = train_set[0].x.shape[0], train_set[0].num_classes

        def train_one(entry):
            model, report = train_with_report(entry.architecture(input_dim, num_classes), train_set,
                                              entry.train, model_id=entry.model_id,
                                              show_progress=self.show_progress and self.max_workers == 1)
            return model, report

        trained = self.task_manager.map_ordered(train_one, self.config.models, task_name="train")
        manifest = RunManifest(self.checkpoint_dir)
        manifest.write_all([PendingOutput(f"{model.model_id}.ckpt", render_model(model), ArtifactKind.CHECKPOINT)
                            for model, _ in trained], "train", force=self.force)
        for model, report in trained:
            self._models[model.model_id] = model
            self.logger.info(f"{model.model_id}: final loss {report.final_loss}, "
                             f"train accuracy {report.final_accuracy:.4f}")
        manifest.save()
        return manifest

    def cmd_attack(self, surrogate_id: Optional[str] = None, attack_name: Optional[str] = None,
                   seeds: Optional[Sequence[int]] = None) -> List[Path]:
        """
        Generate adversarial sets and traces

        Every batch is run and budget-checked before the first file is
        written; a failing batch leaves the output tree untouched.

        Returns:
            Paths of the adversarial set files
        """
        indices, samples = self.attack_samples()
        seeds = list(seeds or self.config.evaluation.seeds)
        pending: List[PendingOutput] = []
        written = []
        for sid in self._surrogate_ids(surrogate_id):
            surrogate = self.model(sid)
            for entry in self._attacks(attack_name):
                for seed in seeds:
                    cfg = entry.config.with_overrides(seed=seed)
                    results = run_attack_batch(entry.algorithm, surrogate, samples, cfg,
                                               seed_labels=(sid, entry.name), task_manager=self.task_manager)
                    label = self.run_label(sid, entry.name, seed)
                    text = adversarial_to_csv(indices, [s.label for s in samples], [r.x_adv for r in results])
                    pending.append(PendingOutput(f"adversarial/{label}.csv", text, ArtifactKind.ADVERSARIAL))
                    pending.extend(PendingOutput(f"traces/{label}/{index}.csv", result.trace.to_csv(),
                                                 ArtifactKind.TRACE)
                                   for index, result in zip(indices, results))
                    written.append(self.output_dir / "adversarial" / f"{label}.csv")
                    self.logger.info(f"Attack {entry.name} on {sid} (seed {seed}): {len(results)} samples")

        manifest = self._manifest()
        manifest.write_all(pending, "attack", force=self.force)
        manifest.save()
        return written

    def load_adversarial(self, surrogate_id: str, attack_name: str, seed: int) -> List[Tuple[int, np.ndarray]]:
        """Read one adversarial set written by cmd_attack"""
        path = self.output_dir / "adversarial" / f"{self.run_label(surrogate_id, attack_name, seed)}.csv"
        if not path.exists():
            raise DependencyError(f"Missing adversarial set {path}; run 'attack' first",
                                  details={'path': str(path)})
        return parse_adversarial_csv(path.read_text(encoding='utf-8'), path)

    def cmd_eval(self, seeds: Optional[Sequence[int]] = None) -> List[TransferReport]:
        """
        Score every adversarial set on every target

        Returns:
            One report per (surrogate, seed)
        """
        _, eval_set = self.datasets()
        seeds = list(seeds or self.config.evaluation.seeds)
        targets = self.targets()
        pending: List[PendingOutput] = []
        reports = []
        for sid in self.config.evaluation.surrogates:
            surrogate = self.model(sid)
            for seed in seeds:
                adversarial = {}
                for entry in self.config.attacks:
                    rows = self.load_adversarial(sid, entry.name, seed)
                    adversarial[entry.name] = [(eval_set[i].x, x_adv) for i, x_adv in rows]
                report = score_adversarial_sets(surrogate, targets, adversarial, seed=seed)
                pending.append(PendingOutput(f"reports/transfer_{sid}__s{seed}.csv", report.to_csv(),
                                             ArtifactKind.REPORT))
                reports.append(report)

        summary = {
            'seeds': seeds,
            'attacks': {name: s.to_dict() for name, s in summarize_reports(reports).items()},
            'reports': [r.to_dict() for r in reports],
        }
        pending.append(PendingOutput("reports/summary.json", json.dumps(summary, indent=2, sort_keys=True) + '\n',
                                     ArtifactKind.REPORT))
        manifest = self._manifest()
        manifest.write_all(pending, "eval", force=self.force)
        manifest.save()
        return reports

    def cmd_sweep(self, param: str, values: Sequence[float], attack_name: Optional[str] = None,
                  seeds: Optional[Sequence[int]] = None) -> Path:
        """
        Sweep one hyperparameter of an attack over values

        The swept attack is attack_name, else the first configured respa
        attack, else the first configured attack.
        """
        if attack_name:
            entry = self.config.attack(attack_name)
        else:
            respa = [a for a in self.config.attacks if a.algorithm.value == "respa"]
            entry = respa[0] if respa else self.config.attacks[0]
        _, samples = self.attack_samples()
        rows = sweep_parameter(param, values, self.surrogates(), self.targets(), samples, entry.config,
                               seeds=list(seeds or self.config.evaluation.seeds),
                               attack=entry.algorithm.value, max_workers=self.max_workers)
        manifest = self._manifest()
        manifest.write(f"sweeps/{param}.csv", sweep_to_csv(rows), ArtifactKind.SWEEP, "sweep",
                       force=self.force)
        manifest.save()
        return self.output_dir / "sweeps" / f"{param}.csv"

    def cmd_surface(self, attack_name: Optional[str] = None, samples: Optional[int] = None,
                    seeds: Optional[Sequence[int]] = None) -> Path:
        """
        Map the loss surface around the first k adversarial examples

        k larger than the adversarial set is clamped with a warning; k
        defaults to the configured surface sample count.

        Returns:
            Path of the sharpness summary
        """
        _, eval_set = self.datasets()
        surface_cfg = self.config.evaluation.surface
        k = surface_cfg.samples if samples is None else samples
        if k < 1:
            raise ConfigError(f"--samples must be at least 1, got {k}", "BAD_VALUE", field="samples")
        seeds = list(seeds or self.config.evaluation.seeds)
        summary_rows: Dict[Tuple[str, str, int], str] = self._read_sharpness_rows()
        pending: List[PendingOutput] = []

        for sid in self.config.evaluation.surrogates:
            surrogate = self.model(sid)
            for entry in self._attacks(attack_name):
                for seed in seeds:
                    rows = self.load_adversarial(sid, entry.name, seed)
                    if k > len(rows):
                        self.logger.warning(f"Requested {k} surface samples but {sid}/{entry.name} has "
                                            f"{len(rows)}; using {len(rows)}")
                    label = self.run_label(sid, entry.name, seed)
                    scores = []
                    for index, x_adv in rows[:k]:
                        rng = SeededRng(derive_seed(seed, "surface", sid, entry.name, index))
                        grid = loss_surface(surrogate, x_adv, eval_set[index].y, extent=surface_cfg.extent,
                                            steps=surface_cfg.steps, rng=rng,
                                            max_retries=surface_cfg.max_retries,
                                            max_workers=self.max_workers)
                        pending.append(PendingOutput(f"surfaces/{label}/{index}.csv", grid.to_csv(),
                                                     ArtifactKind.SURFACE))
                        scores.append((index, sharpness_score(grid), mean_gap_score(grid)))
                    score_lines = [SCORES_HEADER] + [f"{i},{s!r},{g!r}" for i, s, g in scores]
                    pending.append(PendingOutput(f"surfaces/{label}/scores.csv", '\n'.join(score_lines) + '\n',
                                                 ArtifactKind.SURFACE))
                    mean_sharpness = float(np.mean([s for _, s, _ in scores]))
                    mean_gap = float(np.mean([g for _, _, g in scores]))
                    summary_rows[(sid, entry.name, seed)] = (
                        f"{sid},{entry.name},{seed},{len(scores)},{mean_sharpness!r},{mean_gap!r}")
                    self.logger.info(f"Surface {label}: mean sharpness {mean_sharpness:.6f} "
                                     f"over {len(scores)} samples")

        manifest = self._manifest()
        manifest.write_all(pending, "surface", force=self.force)
        text = '\n'.join([SHARPNESS_HEADER] + [summary_rows[key] for key in sorted(summary_rows)]) + '\n'
        # merged summary of all surface runs, rewritten on every call
        manifest.write("surfaces/sharpness.csv", text, ArtifactKind.SURFACE, "surface", force=True)
        manifest.save()
        return self.output_dir / "surfaces" / "sharpness.csv"

    def _read_sharpness_rows(self) -> Dict[Tuple[str, str, int], str]:
        path = self.output_dir / "surfaces" / "sharpness.csv"
        rows: Dict[Tuple[str, str, int], str] = {}
        if not path.exists():
            return rows
        for line in path.read_text(encoding='utf-8').splitlines()[1:]:
            parts = line.split(',')
            if len(parts) == 6:
                rows[(parts[0], parts[1], int(parts[2]))] = line
        return rows
