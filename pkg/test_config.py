"""
环境配置测试
日志级别、数据目录与随机种子覆盖
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from src.utils.config import Config
from src.utils.helpers import chunk_list, dump_json, format_percentage, parse_int_list


@pytest.fixture
def clean_env(monkeypatch):
    # dotenv 写入的变量在测试结束后一并清除
    for key in ("LOG_LEVEL", "LOG_FILE_PATH", "TMHOI_DATA_DIR", "TMHOI_SEED"):
        monkeypatch.setenv(key, "")
        monkeypatch.delenv(key)
    return monkeypatch


def test_defaults(clean_env, tmp_path):
    cfg = Config(env_file=str(tmp_path / "missing.env"))
    assert cfg.log.level == "INFO"
    assert cfg.log.file_path.endswith("tmhoi.log")
    assert cfg.runtime.seed_override is None
    assert cfg.validate_config() == (True, [])


def test_env_file_is_loaded(clean_env, tmp_path):
    env = tmp_path / ".env"
    env.write_text("LOG_LEVEL=DEBUG\nTMHOI_DATA_DIR=/tmp/tmhoi\nTMHOI_SEED=42\n", encoding="utf-8")
    cfg = Config(env_file=str(env))
    assert cfg.log.level == "DEBUG"
    assert cfg.runtime.data_dir == "/tmp/tmhoi"
    assert cfg.runtime.seed_override == 42


def test_invalid_values_reported(clean_env, tmp_path):
    clean_env.setenv("LOG_LEVEL", "LOUD")
    clean_env.setenv("TMHOI_SEED", "abc")
    cfg = Config(env_file=str(tmp_path / "missing.env"))
    ok, errors = cfg.validate_config()
    assert not ok
    assert len(errors) == 2


def test_seed_override_reads_live_environment(clean_env, tmp_path):
    cfg = Config(env_file=str(tmp_path / "missing.env"))
    assert cfg.seed_override() is None
    clean_env.setenv("TMHOI_SEED", " 7 ")
    assert cfg.seed_override() == 7


def test_helpers():
    assert chunk_list([1, 2, 3, 4, 5], 2) == [[1, 2], [3, 4], [5]]
    assert parse_int_list("0, 30,50,") == [0, 30, 50]
    assert format_percentage(0.1234) == "12.34"
    assert format_percentage(None) == "N/A"
    assert dump_json({"b": 1, "a": [1.5]}) == '{\n  "b": 1,\n  "a": [\n    1.5\n  ]\n}\n'
    with pytest.raises(ValueError):
        dump_json({"x": float("nan")})
