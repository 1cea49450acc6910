"""Configuration manager for hyperparameter and runtime defaults."""

import copy
import json
import logging
import os
from dataclasses import fields
from pathlib import Path
from typing import Any

from joblib import cpu_count

from core.errors import ConfigurationError
from core.trainer import TrainingConfig

logger = logging.getLogger(__name__)


class ConfigManager:
    """Layered configuration.

    Priority (highest first):
    - command-line flags (applied by the commands)
    - .config/config.json (user, not tracked)
    - config/config.json (project defaults)
    - DEFAULT_SETTINGS
    """

    PROJECT_DIR = Path(__file__).parent.parent
    CONFIG_DIR = PROJECT_DIR / "config"
    USER_CONFIG_DIR = PROJECT_DIR / ".config"

    DEFAULT_SETTINGS: dict[str, dict[str, Any]] = {
        "training": {
            "K": 400,
            "w": 11,
            "n_voc": 20000,
            "epochs": 15,
            "lr0": 3e-4,
            "batch_size": 10000,
            "seed": 0,
            "probe_size": 10000,
            "reweight": True,
        },
        "hashing": {"hash_length": 51},
        "evaluation": {
            "alpha": 0.5,
            "q": 10,
            "theta": 0.5,
            "window": 5,
            "folds": 5,
            "cluster_count": 200,
            "cluster_words": 2000,
        },
        "runtime": {"workers": 0, "log_level": "INFO", "release": "full"},
    }

    def __init__(self):
        self._config: dict[str, dict[str, Any]] = copy.deepcopy(self.DEFAULT_SETTINGS)
        self._load_config()

    @staticmethod
    def _read_json(path: Path) -> dict[str, Any] | None:
        if not path.exists():
            return None
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except (json.JSONDecodeError, OSError) as e:
            logger.warning("ignoring unreadable config %s: %s", path, e)
            return None
        return data if isinstance(data, dict) else None

    def _load_config(self) -> None:
        """Merge project defaults, then the user file, section by section."""
        for path in (self.CONFIG_DIR / "config.json", self.USER_CONFIG_DIR / "config.json"):
            data = self._read_json(path)
            if not data:
                continue
            for section, values in data.items():
                if isinstance(values, dict):
                    self._config.setdefault(section, {}).update(values)

    def get(self, key: str, default: Any = None) -> Any:
        """Get a value by dotted key, e.g. "training.K"."""
        section, _, name = key.partition(".")
        values = self._config.get(section)
        if values is None:
            return default
        if not name:
            return copy.deepcopy(values)
        return values.get(name, default)

    def set(self, key: str, value: Any) -> None:
        """Override a value for this process only."""
        section, _, name = key.partition(".")
        if not name:
            raise ConfigurationError(f"expected section.key, got {key!r}")
        self._config.setdefault(section, {})[name] = value

    def get_all(self) -> dict[str, dict[str, Any]]:
        return copy.deepcopy(self._config)

    # === Derived settings ===

    def get_workers(self) -> int:
        """FLYHASH_WORKERS, then runtime.workers; 0 means all available cores."""
        raw = os.environ.get("FLYHASH_WORKERS", "").strip()
        if raw:
            try:
                workers = int(raw)
            except ValueError as e:
                raise ConfigurationError(f"FLYHASH_WORKERS must be an integer, got {raw!r}") from e
        else:
            workers = int(self.get("runtime.workers", 0))
        if workers < 0:
            raise ConfigurationError(f"workers must be >= 0, got {workers}")
        return workers or cpu_count()

    def get_release(self) -> str:
        return os.environ.get("FLYHASH_RELEASE", "").strip().lower() or self.get(
            "runtime.release", "full"
        )

    def training_config(self, **overrides: Any) -> TrainingConfig:
        """TrainingConfig from the training section; None overrides are ignored."""
        known = {f.name for f in fields(TrainingConfig)}
        values = {k: v for k, v in self.get("training", {}).items() if k in known}
        values["workers"] = self.get_workers()
        values.update({k: v for k, v in overrides.items() if v is not None})
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"unknown training options: {sorted(unknown)}")
        return TrainingConfig(**values).validate()
