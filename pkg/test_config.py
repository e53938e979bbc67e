#!/usr/bin/env python3
"""Run configuration, output paths and operation logging"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

sys.path.insert(0, str(Path(__file__).parent))

from src import __version__
from src.config import RunConfig
from src.entities import Problem
from src.logger import ExperimentLogger
from src.path_manager import PathManager


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("SPHERE_RIGIDITY_THREADS", "SPHERE_RIGIDITY_OUT", "SPHERE_RIGIDITY_LOG_DIR"):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    config = RunConfig()
    assert config.dim_n == 3
    assert config.band_limit == 16
    assert config.problem == Problem.BP5
    assert config.degrees == [2, 4, 6, 8]
    assert config.effective_circle_count() == 34
    assert config.grid_key() == (3, 40)


def test_environment_and_overrides(monkeypatch):
    monkeypatch.setenv("SPHERE_RIGIDITY_THREADS", "4")
    monkeypatch.setenv("SPHERE_RIGIDITY_OUT", "elsewhere")
    config = RunConfig.from_env(out="explicit", seed=None)
    assert config.threads == 4
    assert config.out == "explicit"
    assert config.seed == 0


def test_rejects_invalid_settings():
    with pytest.raises(ValidationError, match="dimension not implemented"):
        RunConfig(dim_n=4)
    with pytest.raises(ValidationError, match="aliasing risk"):
        RunConfig(band_limit=30, resolution=20)
    with pytest.raises(ValidationError, match="strictly increasing"):
        RunConfig(t_values=[0.01, 0.005])
    with pytest.raises(ValidationError, match="even"):
        RunConfig(dim_n=2, resolution=41, band_limit=8)
    with pytest.raises(ValidationError, match="greater than or equal to 8"):
        RunConfig(circle_count=6)


def test_small_band_limits_still_sample_eight_circle_points():
    assert RunConfig(band_limit=2, resolution=8).effective_circle_count() == 8


def test_report_header_embeds_the_configuration():
    header = RunConfig(seed=7).report_header()
    assert header["version"] == __version__
    assert header["config"]["seed"] == 7
    assert header["config"]["problem"] == "bp5"


def test_path_manager_layout(tmp_path):
    paths = PathManager(tmp_path / "run")
    for sub in ("reports", "bodies", "traces", "logs"):
        assert (tmp_path / "run" / sub).is_dir()
    assert paths.resolve("a.json", "bodies") == (tmp_path / "run" / "bodies" / "a.json").resolve()
    assert paths.get_relative_path(paths.resolve("x.csv")) == "reports/x.csv"
    with pytest.raises(ValueError, match="traversal"):
        paths.resolve("../escape.json")
    with pytest.raises(ValueError, match="Unknown output kind"):
        paths.resolve("a.json", "elsewhere")


def test_operation_log_is_jsonl(tmp_path):
    logger = ExperimentLogger(tmp_path)
    logger.log_operation("scan", {"t": np.array([0.1, 0.2])}, {"slope": np.float64(1.5)})
    logger.log_operation("scan", {"t": []}, error="boom")
    lines = logger.operation_log.read_text(encoding="utf-8").splitlines()
    first, second = (json.loads(line) for line in lines)
    assert first["params"]["t"] == [0.1, 0.2]
    assert first["result"]["slope"] == 1.5
    assert first["success"]
    assert not second["success"]
    assert second["error"] == "boom"


def test_timed_operations_record_wall_time(tmp_path):
    logger = ExperimentLogger(tmp_path)
    with logger.timed("scan", {"m": 4}) as record:
        record["rows"] = 3
    with pytest.raises(RuntimeError), logger.timed("scan", {"m": 6}):
        raise RuntimeError("diverged")
    lines = logger.operation_log.read_text(encoding="utf-8").splitlines()
    done, failed = (json.loads(line) for line in lines)
    assert done["result"] == {"rows": 3}
    assert done["elapsed_s"] >= 0.0
    assert failed["error"] == "diverged"
    assert not failed["success"]


def test_each_directory_has_its_own_text_log(tmp_path):
    first = ExperimentLogger(tmp_path / "a")
    second = ExperimentLogger(tmp_path / "b")
    first.log_operation("only_here", {})
    second.log_operation("elsewhere", {})
    for handler in first.logger.handlers + second.logger.handlers:
        handler.flush()
    text = (tmp_path / "a" / "sphere_rigidity.log").read_text(encoding="utf-8")
    assert "only_here completed" in text
    assert "elsewhere" not in text
