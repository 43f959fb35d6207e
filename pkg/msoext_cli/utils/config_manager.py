"""
Configuration manager for the msoext solver toolkit.
"""
import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional


@dataclass(frozen=True)
class Limits:
    """Work caps handed to the solvers. Exceeding one raises ResourceLimit."""

    max_shapes: int = 200_000
    max_sigma: int = 200_000
    max_table: int = 2_000_000
    brute_force_cap: int = 24
    mc_work_cap: int = 5_000_000
    ilp_node_cap: int = 200_000
    exact_tw_limit: int = 12
    multicover_cap: int = 200_000

    def override(self, **values: Optional[int]) -> "Limits":
        """Return a copy with every non-None value replaced."""
        return replace(self, **{k: v for k, v in values.items() if v is not None})


LIMIT_KEYS = tuple(f.name for f in fields(Limits))


class ConfigManager:
    """Manages persisted solver limits and defaults."""

    DEFAULT_BACKEND = "automaton"
    SEED_ENV = "MSOEXT_SEED"

    def __init__(self, config_dir: Path):
        """Initialize the configuration manager."""
        self.config_dir = Path(config_dir)
        self.config_file = self.config_dir / 'config.json'
        self.config: Dict[str, Any] = self._defaults()
        self._load()

    @classmethod
    def _defaults(cls) -> Dict[str, Any]:
        config = asdict(Limits())
        config['backend'] = cls.DEFAULT_BACKEND
        return config

    def _load(self):
        """Load configuration from file."""
        if self.config_file.exists():
            try:
                loaded_config = json.loads(self.config_file.read_text())
                if isinstance(loaded_config, dict):
                    self.config.update({k: v for k, v in loaded_config.items() if k in self.config})
            except json.JSONDecodeError:
                pass

    def _save(self):
        """Save configuration to file."""
        self.config_dir.mkdir(parents=True, exist_ok=True)
        self.config_file.write_text(json.dumps(self.config, indent=2, sort_keys=True))

    def get(self, key: str) -> Any:
        return self.config.get(key, self._defaults().get(key))

    def set(self, key: str, value: Any):
        """Set one configuration value and persist it."""
        from .validators import validate_config_value
        validate_config_value(key, value)
        self.config[key] = value
        self._save()

    def limits(self) -> Limits:
        """Limits built from the stored configuration."""
        return Limits(**{key: int(self.config[key]) for key in LIMIT_KEYS})

    def get_backend(self) -> str:
        return self.config.get('backend', self.DEFAULT_BACKEND)

    @classmethod
    def get_seed(cls) -> int:
        """Generator seed from the environment, 0 when unset or malformed."""
        raw = os.environ.get(cls.SEED_ENV, "0")
        try:
            return int(raw)
        except ValueError:
            return 0

    def reset(self):
        """Reset configuration to defaults."""
        self.config = self._defaults()
        self._save()
