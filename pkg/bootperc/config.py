import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

# Load environment variables
load_dotenv(Path(".") / ".env")

# Base paths
BASE_DIR = Path(__file__).resolve().parent.parent
CONFIG_DIR = BASE_DIR / "config"
DEFAULT_CONFIG_FILE = CONFIG_DIR / "bootperc.yaml"

DEFAULT_MAX_CELLS = 2**28
DEFAULT_MAX_TABLE_ENTRIES = 2**30
DEFAULT_WORKERS = 1
DEFAULT_CONFIDENCE = 0.95
DEFAULT_TARGET = 0.5
DEFAULT_LMAX = 4096
DEFAULT_CENSOR_CAP = 0.01
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_LOG_DIR = "logs"


def _load_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        return {}
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must contain a mapping")
    return data


@dataclass
class Settings:
    """Run-time settings: environment first, YAML defaults second."""

    config_file: Path = DEFAULT_CONFIG_FILE
    _defaults: Dict[str, Any] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._defaults:
            self._defaults = _load_yaml(Path(self.config_file))

    def _get(self, env_var: str, key: str, fallback: Any) -> Any:
        value = os.getenv(env_var)
        if value is not None and value != "":
            return value
        return self._defaults.get(key, fallback)

    @property
    def max_cells(self) -> int:
        """Largest box volume a single configuration may have."""
        return int(self._get("BOOTPERC_MAX_CELLS", "max_cells", DEFAULT_MAX_CELLS))

    @property
    def max_table_entries(self) -> int:
        """Largest neighbour table, in cells times neighbourhood size."""
        return int(self._get("BOOTPERC_MAX_TABLE_ENTRIES", "max_table_entries", DEFAULT_MAX_TABLE_ENTRIES))

    @property
    def workers(self) -> int:
        return int(self._get("BOOTPERC_WORKERS", "workers", DEFAULT_WORKERS))

    @property
    def confidence(self) -> float:
        return float(self._defaults.get("confidence", DEFAULT_CONFIDENCE))

    @property
    def target(self) -> float:
        return float(self._defaults.get("target", DEFAULT_TARGET))

    @property
    def lmax(self) -> int:
        return int(self._defaults.get("lmax", DEFAULT_LMAX))

    @property
    def censor_cap(self) -> float:
        return float(self._defaults.get("censor_cap", DEFAULT_CENSOR_CAP))

    @property
    def log_level(self) -> str:
        return str(self._get("BOOTPERC_LOG_LEVEL", "log_level", DEFAULT_LOG_LEVEL)).upper()

    @property
    def log_dir(self) -> Path:
        return Path(self._get("BOOTPERC_LOG_DIR", "log_dir", DEFAULT_LOG_DIR))

    def validate(self) -> "Settings":
        """Raise ValueError if any setting is unusable."""
        if self.max_cells <= 0:
            raise ValueError(f"max_cells must be positive, got {self.max_cells}")
        if self.max_table_entries <= 0:
            raise ValueError(f"max_table_entries must be positive, got {self.max_table_entries}")
        if self.workers <= 0:
            raise ValueError(f"workers must be positive, got {self.workers}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence}")
        if not 0.0 < self.target <= 1.0:
            raise ValueError(f"target must lie in (0, 1], got {self.target}")
        if not 0.0 <= self.censor_cap <= 1.0:
            raise ValueError(f"censor_cap must lie in [0, 1], got {self.censor_cap}")
        return self


@lru_cache(maxsize=1)
def get_settings(config_file: Optional[str] = None) -> Settings:
    """Get the cached settings, honouring BOOTPERC_CONFIG when no file is given."""
    path = config_file or os.getenv("BOOTPERC_CONFIG") or DEFAULT_CONFIG_FILE
    return Settings(config_file=Path(path)).validate()
