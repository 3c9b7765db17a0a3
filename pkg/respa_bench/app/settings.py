#!/usr/bin/env python3
"""
Settings Management for the ResPA Benchmark

Two layers of configuration:

- ApplicationSettings: defaults shipped in config/default_settings.json
  (attack hyperparameters, surface grid, desk dataset, logging, performance)
- RunConfig: one JSON document per experiment with the sections data, models,
  attacks, evaluation, output_dir and seed

Run configs are parsed strictly. Unknown keys, duplicate keys, missing
required sections and wrongly typed values raise ConfigError naming the
field and, where it can be located, the line in the file. The environment
variable RESPA_BENCH_OUTPUT_DIR overrides output_dir and nothing else.
"""

import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from core.attacks import PIXEL_SCALE, AttackAlgorithm, AttackConfig
from core.models import Activation, ArchitectureSpec, TrainConfig
from core.tensor import derive_seed
from core.utils.errors import BenchError, ConfigError

# Set up logger for this module
logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_PATH = Path(__file__).resolve().parent.parent / "config" / "default_settings.json"
OUTPUT_DIR_ENV = "RESPA_BENCH_OUTPUT_DIR"
MODEL_ID_PATTERN = re.compile(r'^[A-Za-z0-9_.-]+$')


# ================================================================================================
# APPLICATION DEFAULTS
# ================================================================================================

@dataclass
class SurfaceSettings:
    """Loss-surface grid settings"""
    steps: int = 41
    extent: float = 0.1
    max_retries: int = 8
    samples: int = 10

    def to_dict(self) -> Dict[str, Any]:
        return {'steps': self.steps, 'extent': self.extent, 'max_retries': self.max_retries,
                'samples': self.samples}


@dataclass
class DataDefaults:
    """Default desk dataset"""
    d: int = 64
    num_classes: int = 4
    train_per_class: int = 250
    eval_per_class: int = 100
    sigma: float = 0.05
    mean_radius: float = 0.3


@dataclass
class LoggingSettings:
    """Logging configuration"""
    level: str = "INFO"
    max_file_size_mb: int = 10
    backup_count: int = 5
    console_output: bool = True
    file_output: bool = False
    log_directory: str = "logs"


@dataclass
class PerformanceSettings:
    """Worker pool and progress display"""
    max_workers: int = 1
    show_progress: bool = True


@dataclass
class ApplicationSettings:
    """
    Main application settings container
    Combines all setting categories for easy management
    """
    name: str = "ResPA Benchmark"
    version: str = "1.0.0"
    attack_defaults: AttackConfig = field(default_factory=AttackConfig)
    surface: SurfaceSettings = field(default_factory=SurfaceSettings)
    data_defaults: DataDefaults = field(default_factory=DataDefaults)
    logging: LoggingSettings = field(default_factory=LoggingSettings)
    performance: PerformanceSettings = field(default_factory=PerformanceSettings)


def attack_config_from_section(data: Dict[str, Any], base: Optional[AttackConfig] = None,
                               context: str = "attack config") -> AttackConfig:
    """
    AttackConfig from a JSON object; "pixel_units": true reads epsilon, alpha
    and rho on the 0-255 scale
    """
    data = dict(data)
    pixel_units = data.pop('pixel_units', False)
    if not isinstance(pixel_units, bool):
        raise ConfigError(f"{context}.pixel_units must be true or false", field=f"{context}.pixel_units")
    if pixel_units:
        for key in ('epsilon', 'alpha', 'rho'):
            value = data.get(key)
            if value is None:
                continue
            if not _is_number(value):
                raise ConfigError(f"{context}.{key} must be a number", field=f"{context}.{key}")
            data[key] = value / PIXEL_SCALE
    try:
        return AttackConfig.from_dict(data, base)
    except ConfigError as e:
        qualified = f"{context}.{e.field}" if e.field else context
        raise ConfigError(f"{context}: {e}", e.error_type, field=qualified, original_error=e) from e


def load_application_settings(path: Optional[Union[str, Path]] = None) -> ApplicationSettings:
    """
    Load application defaults from JSON

    Args:
        path: Settings file (config/default_settings.json when None)

    Returns:
        ApplicationSettings; a missing file gives the built-in defaults
    """
    path = Path(path) if path else DEFAULT_SETTINGS_PATH
    if not path.exists():
        logger.warning(f"Settings file {path} not found, using built-in defaults")
        return ApplicationSettings()
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Settings file {path} is not valid JSON: {e.msg}", "BAD_JSON",
                          line=e.lineno, original_error=e) from e

    app = data.get('application', {})
    try:
        settings = ApplicationSettings(
            name=app.get('name', "ResPA Benchmark"),
            version=app.get('version', "1.0.0"),
            attack_defaults=attack_config_from_section(data.get('attack_defaults', {}),
                                                       context="attack_defaults"),
            surface=SurfaceSettings(**data.get('surface', {})),
            data_defaults=DataDefaults(**data.get('data_defaults', {})),
            logging=LoggingSettings(**data.get('logging', {})),
            performance=PerformanceSettings(**data.get('performance', {})),
        )
    except TypeError as e:
        raise ConfigError(f"Settings file {path} has an unknown key: {e}", "UNKNOWN_KEY",
                          original_error=e) from e
    logger.debug(f"Application settings loaded from {path}")
    return settings


# ================================================================================================
# RUN CONFIGURATION
# ================================================================================================

@dataclass
class DataConfig:
    """
    Dataset of a run

    source "synthetic" uses the Gaussian-blob fields; source "idx" uses the
    four file paths (resolved relative to the config file).
    """
    source: str = "synthetic"
    d: int = 64
    num_classes: Optional[int] = 4
    train_per_class: int = 250
    eval_per_class: int = 100
    sigma: float = 0.05
    mean_radius: float = 0.3
    seed: Optional[int] = None
    train_images: Optional[Path] = None
    train_labels: Optional[Path] = None
    eval_images: Optional[Path] = None
    eval_labels: Optional[Path] = None
    train_limit: Optional[int] = None
    eval_limit: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {k: v for k, v in self.__dict__.items() if v is not None}
        for key in ('train_images', 'train_labels', 'eval_images', 'eval_labels'):
            if key in data:
                data[key] = str(data[key])
        return data


@dataclass
class ModelEntry:
    """One model to train: id, hidden layers, activation and training hyperparameters"""
    model_id: str
    hidden_sizes: Tuple[int, ...] = ()
    activation: Activation = Activation.RELU
    train: TrainConfig = field(default_factory=TrainConfig)

    def architecture(self, input_dim: int, num_classes: int) -> ArchitectureSpec:
        return ArchitectureSpec(input_dim=input_dim, num_classes=num_classes,
                                hidden_sizes=self.hidden_sizes, activation=self.activation)


@dataclass
class AttackEntry:
    """One attack of a run; name labels its output files"""
    name: str
    algorithm: AttackAlgorithm
    config: AttackConfig


@dataclass
class EvaluationConfig:
    """Which models attack, which are attacked, seeds and surface grid settings"""
    surrogates: List[str] = field(default_factory=list)
    targets: List[str] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)
    max_samples: Optional[int] = None
    surface: SurfaceSettings = field(default_factory=SurfaceSettings)


@dataclass
class RunConfig:
    """A fully resolved experiment configuration"""
    data: DataConfig
    models: List[ModelEntry]
    attacks: List[AttackEntry]
    evaluation: EvaluationConfig
    output_dir: Path
    seed: int = 0
    source_path: Optional[Path] = None

    def model_ids(self) -> List[str]:
        return [m.model_id for m in self.models]

    def model(self, model_id: str) -> ModelEntry:
        for m in self.models:
            if m.model_id == model_id:
                return m
        raise ConfigError(f"Unknown model id '{model_id}' (known: {', '.join(self.model_ids())})",
                          "UNKNOWN_MODEL", field="models")

    def attack(self, name: str) -> AttackEntry:
        for a in self.attacks:
            if a.name == name:
                return a
        raise ConfigError(f"Unknown attack '{name}' (configured: {', '.join(a.name for a in self.attacks)})",
                          "UNKNOWN_ATTACK", field="attacks")


class _Locator:
    """Maps keys back to line numbers of the raw JSON text for diagnostics"""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, key: str) -> Optional[int]:
        needle = f'"{key}"'
        for number, line in enumerate(self.lines, start=1):
            if needle in line:
                return number
        return None


def _reject_duplicates(pairs: List[Tuple[str, Any]]) -> Dict[str, Any]:
    result: Dict[str, Any] = {}
    for key, value in pairs:
        if key in result:
            raise ConfigError(f"Duplicate key '{key}'", "DUPLICATE_KEY", field=key)
        result[key] = value
    return result


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class RunConfigParser:
    """
    Strict parser turning a JSON document into a RunConfig

    Defaults for omitted fields come from ApplicationSettings.
    """

    TOP_LEVEL_KEYS = ('data', 'models', 'attacks', 'evaluation', 'output_dir', 'seed')
    REQUIRED_SECTIONS = ('data', 'models')
    SYNTHETIC_KEYS = ('source', 'd', 'num_classes', 'train_per_class', 'eval_per_class',
                      'sigma', 'mean_radius', 'seed')
    IDX_KEYS = ('source', 'train_images', 'train_labels', 'eval_images', 'eval_labels',
                'num_classes', 'train_limit', 'eval_limit')
    MODEL_KEYS = ('id', 'hidden_sizes', 'activation', 'train')
    TRAIN_KEYS = ('learning_rate', 'epochs', 'batch_size', 'seed')
    ATTACK_KEYS = ('id', 'name', 'config')
    EVALUATION_KEYS = ('surrogates', 'targets', 'seeds', 'max_samples', 'surface')
    SURFACE_KEYS = ('steps', 'extent', 'max_retries', 'samples')

    def __init__(self, text: str, settings: Optional[ApplicationSettings] = None,
                 base_dir: Optional[Path] = None):
        self.text = text
        self.settings = settings or ApplicationSettings()
        self.base_dir = base_dir or Path.cwd()
        self.locator = _Locator(text)

    # -- helpers -----------------------------------------------------------------------------

    def _error(self, message: str, field_name: str, error_type: str = "BAD_VALUE",
               key: Optional[str] = None) -> ConfigError:
        line = self.locator.line_of(key or field_name.split('.')[-1].split('[')[0])
        where = f" (line {line})" if line else ""
        return ConfigError(f"{field_name}: {message}{where}", error_type, field=field_name, line=line)

    def _check_keys(self, data: Any, allowed: Sequence[str], section: str) -> Dict[str, Any]:
        if not isinstance(data, dict):
            raise self._error("must be an object", section, key=section.split('.')[-1].split('[')[0])
        unknown = [k for k in data if k not in allowed]
        if unknown:
            raise self._error(f"unknown key '{unknown[0]}' (allowed: {', '.join(allowed)})",
                              f"{section}.{unknown[0]}", "UNKNOWN_KEY", key=unknown[0])
        return data

    def _int(self, value: Any, field_name: str, minimum: Optional[int] = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self._error(f"expected an integer, got {value!r}", field_name)
        if minimum is not None and value < minimum:
            raise self._error(f"must be >= {minimum}, got {value}", field_name)
        return value

    def _float(self, value: Any, field_name: str) -> float:
        if not _is_number(value):
            raise self._error(f"expected a number, got {value!r}", field_name)
        return float(value)

    def _str(self, value: Any, field_name: str) -> str:
        if not isinstance(value, str) or not value:
            raise self._error(f"expected a non-empty string, got {value!r}", field_name)
        return value

    def _str_list(self, value: Any, field_name: str) -> List[str]:
        if not isinstance(value, list):
            raise self._error("expected a list of strings", field_name)
        return [self._str(v, f"{field_name}[{i}]") for i, v in enumerate(value)]

    # -- sections ----------------------------------------------------------------------------

    def parse(self) -> RunConfig:
        try:
            document = json.loads(self.text, object_pairs_hook=_reject_duplicates)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Run config is not valid JSON: {e.msg} (line {e.lineno})", "BAD_JSON",
                              line=e.lineno, original_error=e) from e
        except ConfigError as e:
            raise self._error("appears twice", e.field or "config", "DUPLICATE_KEY") from e

        self._check_keys(document, self.TOP_LEVEL_KEYS, "config")
        for section in self.REQUIRED_SECTIONS:
            if section not in document:
                raise ConfigError(f"Missing required section '{section}'", "MISSING_SECTION",
                                  field=section)

        seed = self._int(document.get('seed', 0), 'seed', minimum=0)
        data = self._parse_data(document['data'], seed)
        models = self._parse_models(document['models'], seed)
        attacks = self._parse_attacks(document.get('attacks', [{'id': 'respa'}]), seed)
        evaluation = self._parse_evaluation(document.get('evaluation', {}), models, seed)

        output_dir = Path(self._str(document.get('output_dir', 'runs'), 'output_dir'))
        env_dir = os.environ.get(OUTPUT_DIR_ENV)
        if env_dir:
            logger.info(f"{OUTPUT_DIR_ENV} overrides output_dir: {env_dir}")
            output_dir = Path(env_dir)
        if not output_dir.is_absolute():
            output_dir = self.base_dir / output_dir

        return RunConfig(data=data, models=models, attacks=attacks, evaluation=evaluation,
                         output_dir=output_dir, seed=seed)

    def _parse_data(self, section: Any, seed: int) -> DataConfig:
        if not isinstance(section, dict):
            raise self._error("must be an object", "data")
        source = section.get('source', 'synthetic')
        if source == 'synthetic':
            self._check_keys(section, self.SYNTHETIC_KEYS, "data")
            defaults = self.settings.data_defaults
            sigma = self._float(section.get('sigma', defaults.sigma), 'data.sigma')
            if sigma <= 0:
                raise self._error("must be > 0", 'data.sigma')
            return DataConfig(
                source=source,
                d=self._int(section.get('d', defaults.d), 'data.d', minimum=2),
                num_classes=self._int(section.get('num_classes', defaults.num_classes),
                                      'data.num_classes', minimum=2),
                train_per_class=self._int(section.get('train_per_class', defaults.train_per_class),
                                          'data.train_per_class', minimum=1),
                eval_per_class=self._int(section.get('eval_per_class', defaults.eval_per_class),
                                         'data.eval_per_class', minimum=1),
                sigma=sigma,
                mean_radius=self._float(section.get('mean_radius', defaults.mean_radius),
                                        'data.mean_radius'),
                seed=self._int(section.get('seed', derive_seed(seed, "data")),
                               'data.seed', minimum=0),
            )
        if source == 'idx':
            self._check_keys(section, self.IDX_KEYS, "data")
            paths = {}
            for key in ('train_images', 'train_labels', 'eval_images', 'eval_labels'):
                if key not in section:
                    raise self._error("required for IDX data", f"data.{key}", "MISSING_FIELD", key='source')
                p = Path(self._str(section[key], f"data.{key}"))
                paths[key] = p if p.is_absolute() else self.base_dir / p
            num_classes = section.get('num_classes')
            limits = {k: section.get(k) for k in ('train_limit', 'eval_limit')}
            return DataConfig(
                source=source,
                num_classes=self._int(num_classes, 'data.num_classes', minimum=2) if num_classes is not None else None,
                train_limit=self._int(limits['train_limit'], 'data.train_limit', 1)
                if limits['train_limit'] is not None else None,
                eval_limit=self._int(limits['eval_limit'], 'data.eval_limit', 1)
                if limits['eval_limit'] is not None else None,
                **paths,
            )
        raise self._error(f"unknown data source {source!r} (allowed: synthetic, idx)", "data.source",
                          key='source')

    def _parse_models(self, section: Any, seed: int) -> List[ModelEntry]:
        if not isinstance(section, list) or not section:
            raise self._error("must be a non-empty list", "models")
        entries, seen = [], set()
        for i, item in enumerate(section):
            where = f"models[{i}]"
            self._check_keys(item, self.MODEL_KEYS, where)
            if 'id' not in item:
                raise self._error("missing 'id'", f"{where}.id", "MISSING_FIELD", key='models')
            model_id = self._str(item['id'], f"{where}.id")
            if not MODEL_ID_PATTERN.match(model_id):
                raise self._error(f"model id {model_id!r} may only use letters, digits, '_', '.', '-'",
                                  f"{where}.id", key=model_id)
            if model_id in seen:
                raise self._error(f"duplicate model id {model_id!r}", f"{where}.id", "DUPLICATE_KEY",
                                  key=model_id)
            seen.add(model_id)

            hidden = item.get('hidden_sizes', [])
            if not isinstance(hidden, list):
                raise self._error("expected a list of integers", f"{where}.hidden_sizes")
            hidden_sizes = tuple(self._int(h, f"{where}.hidden_sizes[{j}]", minimum=1)
                                 for j, h in enumerate(hidden))
            try:
                activation = Activation(item.get('activation', Activation.RELU.value))
            except ValueError as e:
                raise self._error(f"unknown activation {item.get('activation')!r} (allowed: relu, tanh)",
                                  f"{where}.activation", key='activation') from e

            train_data = self._check_keys(item.get('train', {}), self.TRAIN_KEYS, f"{where}.train")
            train_data = dict(train_data)
            train_data.setdefault('seed', derive_seed(seed, "model", model_id))
            for key in ('epochs', 'batch_size', 'seed'):
                self._int(train_data.get(key, 0), f"{where}.train.{key}")
            if 'learning_rate' in train_data:
                self._float(train_data['learning_rate'], f"{where}.train.learning_rate")
            try:
                train_cfg = TrainConfig.from_dict(train_data)
            except BenchError as e:
                raise self._error(str(e), f"{where}.train", key='train') from e

            entries.append(ModelEntry(model_id=model_id, hidden_sizes=hidden_sizes,
                                      activation=activation, train=train_cfg))
        return entries

    def _parse_attacks(self, section: Any, seed: int) -> List[AttackEntry]:
        if not isinstance(section, list) or not section:
            raise self._error("must be a non-empty list", "attacks")
        base = self.settings.attack_defaults.with_overrides(seed=seed)
        entries, seen = [], set()
        for i, item in enumerate(section):
            where = f"attacks[{i}]"
            self._check_keys(item, self.ATTACK_KEYS, where)
            if 'id' not in item:
                raise self._error("missing 'id'", f"{where}.id", "MISSING_FIELD", key='attacks')
            attack_id = self._str(item['id'], f"{where}.id")
            try:
                algorithm = AttackAlgorithm.from_id(attack_id)
            except BenchError as e:
                raise self._error(str(e), f"{where}.id", "UNKNOWN_ATTACK", key=attack_id) from e
            name = self._str(item.get('name', attack_id), f"{where}.name")
            if not MODEL_ID_PATTERN.match(name) or name in seen:
                raise self._error(f"attack name {name!r} is invalid or repeated", f"{where}.name", key=name)
            seen.add(name)
            overrides = item.get('config', {})
            if not isinstance(overrides, dict):
                raise self._error("must be an object", f"{where}.config", key='config')
            try:
                cfg = attack_config_from_section(overrides, base, context=f"{where}.config")
            except ConfigError as e:
                raise self._error(str(e), e.field or f"{where}.config", e.error_type,
                                  key=(e.field or 'config').split('.')[-1]) from e
            entries.append(AttackEntry(name=name, algorithm=algorithm, config=cfg))
        return entries

    def _parse_evaluation(self, section: Any, models: List[ModelEntry], seed: int) -> EvaluationConfig:
        self._check_keys(section, self.EVALUATION_KEYS, "evaluation")
        known = [m.model_id for m in models]
        surrogates = self._str_list(section.get('surrogates', known[:1]), 'evaluation.surrogates')
        targets = self._str_list(section.get('targets', known), 'evaluation.targets')
        for i, model_id in enumerate(surrogates + targets):
            if model_id not in known:
                list_name = 'surrogates' if i < len(surrogates) else 'targets'
                raise self._error(f"unknown model id {model_id!r}", f"evaluation.{list_name}",
                                  "UNKNOWN_MODEL", key=model_id)
        seeds_value = section.get('seeds', [seed])
        if not isinstance(seeds_value, list) or not seeds_value:
            raise self._error("expected a non-empty list of integers", 'evaluation.seeds')
        seeds = [self._int(s, f"evaluation.seeds[{i}]", minimum=0) for i, s in enumerate(seeds_value)]
        max_samples = section.get('max_samples')
        if max_samples is not None:
            max_samples = self._int(max_samples, 'evaluation.max_samples', minimum=1)

        surface_data = self._check_keys(section.get('surface', {}), self.SURFACE_KEYS, "evaluation.surface")
        defaults = self.settings.surface
        surface = SurfaceSettings(
            steps=self._int(surface_data.get('steps', defaults.steps), 'evaluation.surface.steps', 3),
            extent=self._float(surface_data.get('extent', defaults.extent), 'evaluation.surface.extent'),
            max_retries=self._int(surface_data.get('max_retries', defaults.max_retries),
                                  'evaluation.surface.max_retries', 0),
            samples=self._int(surface_data.get('samples', defaults.samples), 'evaluation.surface.samples', 1),
        )
        if surface.steps % 2 == 0:
            raise self._error("must be odd", 'evaluation.surface.steps')
        return EvaluationConfig(surrogates=surrogates, targets=targets, seeds=seeds,
                                max_samples=max_samples, surface=surface)


def parse_run_config(text: str, settings: Optional[ApplicationSettings] = None,
                     base_dir: Optional[Path] = None) -> RunConfig:
    """Parse run-config JSON text"""
    return RunConfigParser(text, settings, base_dir).parse()


def load_run_config(path: Union[str, Path], settings: Optional[ApplicationSettings] = None) -> RunConfig:
    """
    Read and parse a run config file

    Relative paths inside it (output_dir, IDX files) resolve against the
    file's directory.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Cannot read run config {path}: {e}", "UNREADABLE", field=str(path),
                          original_error=e) from e
    config = parse_run_config(text, settings, base_dir=path.resolve().parent)
    config.source_path = path
    logger.info(f"Loaded run config {path}: {len(config.models)} models, {len(config.attacks)} attacks")
    return config
