"""Self-describing result files.

JSON artifacts are one document ``{"bootperc", "seed", "config", ...payload}``.
CSV artifacts start with ``# bootperc <version> config=<json>`` followed by a
header row; both carry everything ``replay`` needs to rerun them.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd

from . import __version__
from .exceptions import UsageError
from .models import ArtifactHeader, OutputFormat, RunConfig
from .utils import get_logger

_logger = get_logger(__name__)

CSV_PREFIX = "# bootperc "


def _header(config: RunConfig) -> Dict[str, Any]:
    return ArtifactHeader(bootperc=__version__, seed=config.seed, config=config).model_dump(mode="json")


def _finite(value: Any) -> Any:
    """Replace non-finite floats with ``None`` throughout ``value``."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def write_json(payload: Dict[str, Any], config: RunConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = _finite({**_header(config), **payload})
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, default=str, allow_nan=False)
    _logger.info("wrote %s", path)
    return path


def write_csv(frame: pd.DataFrame, config: RunConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"{CSV_PREFIX}{__version__} config={config.model_dump_json()}\n")
        frame.to_csv(f, index=False)
    _logger.info("wrote %s", path)
    return path


def write_artifact(payload: Dict[str, Any], frame, config: RunConfig, path: Union[str, Path]) -> Path:
    if config.format is OutputFormat.CSV:
        if frame is None:
            raise UsageError(f"Command '{config.command.value}' has no tabular output; use --format json")
        return write_csv(frame, config, path)
    return write_json(payload, config, path)


def load_config(path: Union[str, Path]) -> RunConfig:
    """The run configuration embedded in a JSON or CSV artifact."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"No such artifact: {path}")
    text = path.read_text(encoding="utf-8")
    if text.startswith(CSV_PREFIX):
        first = text.splitlines()[0]
        _, _, raw = first.partition("config=")
        return RunConfig.model_validate_json(raw)
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is neither a bootperc JSON nor CSV artifact") from exc
    if "config" not in document:
        raise UsageError(f"{path} carries no embedded config")
    return RunConfig.model_validate(document["config"])


def read_payload(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def read_frame(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, skiprows=1)
