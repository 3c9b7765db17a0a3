"""Run configurations small enough for unit and integration tests."""

import json
from pathlib import Path
from typing import Any, Dict, Optional


def small_run_config(output_dir: str = "out", **overrides: Any) -> Dict[str, Any]:
    """Two MLP-sized models on an 8-dimensional, 3-class blob task"""
    config = {
        "seed": 3,
        "output_dir": output_dir,
        "data": {
            "source": "synthetic",
            "d": 8,
            "num_classes": 3,
            "train_per_class": 40,
            "eval_per_class": 10,
            "sigma": 0.05,
        },
        "models": [
            {"id": "surrogate", "hidden_sizes": [12], "activation": "relu",
             "train": {"epochs": 15, "learning_rate": 0.5}},
            {"id": "target", "hidden_sizes": [], "train": {"epochs": 15, "learning_rate": 0.5}},
        ],
        "attacks": [
            {"id": "mifgsm", "config": {"T": 3}},
            {"id": "respa", "config": {"T": 3, "N": 2}},
        ],
        "evaluation": {
            "surrogates": ["surrogate"],
            "targets": ["target"],
            "max_samples": 6,
            "surface": {"steps": 5, "extent": 0.05, "samples": 2},
        },
    }
    config.update(overrides)
    return config


def write_config(directory: Path, config: Optional[Dict[str, Any]] = None, name: str = "run.json") -> Path:
    path = Path(directory) / name
    path.write_text(json.dumps(config or small_run_config(), indent=2), encoding='utf-8')
    return path
