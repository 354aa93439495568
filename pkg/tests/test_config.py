"""Tests for configuration layering."""

from unittest.mock import patch

import pytest

from hodgelab.utils.config import DEFAULTS, build_config

ENV_KEYS = (
    "HODGELAB_FIXTURE_DIR",
    "HODGELAB_FORMAT",
    "HODGELAB_SEED",
    "HODGELAB_SIGN_MAX_STEPS",
    "HODGELAB_PRIMITIVE_TRIALS",
    "HODGELAB_PRIMITIVE_MAX_BOUND",
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in ENV_KEYS:
        monkeypatch.delenv(key, raising=False)
    with patch("hodgelab.utils.config.load_dotenv"):
        yield


def test_defaults():
    config = build_config()
    assert config == DEFAULTS


def test_env_overrides_defaults(monkeypatch):
    monkeypatch.setenv("HODGELAB_SEED", "7")
    monkeypatch.setenv("HODGELAB_FORMAT", "structured")
    config = build_config()
    assert config["seed"] == 7
    assert config["output_format"] == "structured"


def test_env_integer_is_checked(monkeypatch):
    monkeypatch.setenv("HODGELAB_SIGN_MAX_STEPS", "lots")
    with pytest.raises(ValueError, match="must be an integer"):
        build_config()


def test_unknown_format(monkeypatch):
    monkeypatch.setenv("HODGELAB_FORMAT", "xml")
    with pytest.raises(ValueError, match="Unknown output format"):
        build_config()


def test_cli_args_win(monkeypatch):
    monkeypatch.setenv("HODGELAB_FORMAT", "structured")
    config = build_config(cli_args={"output_format": "text", "seed": None})
    assert config["output_format"] == "text"
    assert config["seed"] == 0
