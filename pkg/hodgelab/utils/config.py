""".env loading with CLI override merging."""

from __future__ import annotations

import os
from typing import Any

from dotenv import load_dotenv

DEFAULTS: dict[str, Any] = {
    "fixture_dir": None,
    "output_format": "text",
    "seed": 0,
    "sign_max_steps": 256,
    "primitive_trials": 24,
    "primitive_max_bound": 6,
    "verbose": False,
}

_INT_KEYS = {"seed", "sign_max_steps", "primitive_trials", "primitive_max_bound"}


def build_config(
    cli_args: dict[str, Any] | None = None,
    **_kwargs: Any,
) -> dict[str, Any]:
    """Merge defaults <- env vars <- CLI args."""
    load_dotenv()
    config = dict(DEFAULTS)

    # Layer 2: env vars (HODGELAB_ prefix)
    env_map = {
        "HODGELAB_FIXTURE_DIR": "fixture_dir",
        "HODGELAB_FORMAT": "output_format",
        "HODGELAB_SEED": "seed",
        "HODGELAB_SIGN_MAX_STEPS": "sign_max_steps",
        "HODGELAB_PRIMITIVE_TRIALS": "primitive_trials",
        "HODGELAB_PRIMITIVE_MAX_BOUND": "primitive_max_bound",
    }
    for env_key, cfg_key in env_map.items():
        val = os.environ.get(env_key)
        if val is not None:
            if cfg_key in _INT_KEYS:
                try:
                    config[cfg_key] = int(val)
                except ValueError:
                    raise ValueError(f"{env_key} must be an integer, got {val!r}") from None
            else:
                config[cfg_key] = val

    if config["output_format"] not in ("text", "structured"):
        raise ValueError(
            f"Unknown output format: {config['output_format']}. Use 'text' or 'structured'."
        )

    # Layer 3: CLI args (override everything)
    if cli_args:
        for key, val in cli_args.items():
            if val is not None:
                config[key] = val

    return config
