import json
import logging

import pandas as pd
import pytest

from bootperc.config import DEFAULT_MAX_CELLS, Settings, get_settings
from bootperc.exceptions import BootpercError, FamilyLiteralError, ResourceLimitError, UsageError
from bootperc.models import Command, RunConfig
from bootperc.results import load_config, write_csv, write_json
from bootperc.utils import get_logger


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "bootperc.yaml"
    path.write_text("max_cells: 5000\nconfidence: 0.99\ntarget: 0.25\nworkers: 2\n", encoding="utf-8")
    return path


def test_yaml_defaults(config_file, monkeypatch):
    monkeypatch.delenv("BOOTPERC_MAX_CELLS", raising=False)
    monkeypatch.delenv("BOOTPERC_WORKERS", raising=False)
    settings = Settings(config_file=config_file)
    assert settings.max_cells == 5000
    assert settings.confidence == 0.99
    assert settings.target == 0.25
    assert settings.workers == 2


def test_environment_overrides_yaml(config_file, monkeypatch):
    monkeypatch.setenv("BOOTPERC_MAX_CELLS", "77")
    assert Settings(config_file=config_file).max_cells == 77


def test_missing_file_uses_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv("BOOTPERC_MAX_CELLS", raising=False)
    assert Settings(config_file=tmp_path / "absent.yaml").max_cells == DEFAULT_MAX_CELLS


def test_validate_rejects_bad_confidence(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("confidence: 1.5\n", encoding="utf-8")
    with pytest.raises(ValueError):
        Settings(config_file=path).validate()


def test_non_mapping_yaml(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        Settings(config_file=path)


def test_cached_settings():
    assert get_settings() is get_settings()


def test_logger_hierarchy():
    logger = get_logger("engine")
    assert logger.name == "bootperc.engine"
    assert logging.getLogger("bootperc").handlers


def test_exit_codes():
    assert BootpercError("x").exit_code == 2
    assert UsageError("x").exit_code == 1
    assert ResourceLimitError("x", requested=10, limit=5).exit_code == 3
    error = FamilyLiteralError("bad", literal="N[")
    assert isinstance(error, UsageError)
    assert error.literal == "N["


def test_artifacts_embed_config(tmp_path):
    config = RunConfig(command=Command.ALPHA, max_s=4, seed=None)
    json_path = write_json({"table": []}, config, tmp_path / "a.json")
    assert load_config(json_path) == config


def test_csv_header_line(tmp_path):
    config = RunConfig(command=Command.ALPHA, max_s=3)
    path = write_csv(pd.DataFrame({"s": [2, 3]}), config, tmp_path / "a.csv")
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first.startswith("# bootperc ")
    assert '"max_s":3' in first


def test_load_config_rejects_foreign_json(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"hello": 1}', encoding="utf-8")
    with pytest.raises(UsageError):
        load_config(path)


def test_json_artifact_has_no_infinities(tmp_path):
    config = RunConfig(command=Command.SCALE, p_list=[0.5], seed=1)
    payload = {"rows": [{"log_L_lower": float("-inf"), "ratio": float("nan"), "L_upper": 2}], "slope": float("inf")}
    path = write_json(payload, config, tmp_path / "scale.json")

    def reject(token):
        raise ValueError(token)

    document = json.loads(path.read_text(encoding="utf-8"), parse_constant=reject)
    assert document["rows"] == [{"log_L_lower": None, "ratio": None, "L_upper": 2}]
    assert document["slope"] is None
