from pathlib import Path
from typing import Any

import numpy as np
import toml

from app.utils.errors import ConfigError


def str_to_bool(value):
    return str(value).lower() in ("1", "true", "yes", "on")


def parse_int_list(value: str | list[int] | tuple[int, ...]) -> tuple[int, ...]:
    """Accepts "64,64" (CLI form) or an already split sequence."""
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        try:
            return tuple(int(p) for p in parts)
        except ValueError as e:
            raise ConfigError(f"Expected comma separated integers, got {value!r}") from e
    return tuple(int(v) for v in value)


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Reads a key=value config file (TOML syntax, flat keys or one level of tables)."""
    path = Path(path)
    try:
        with open(path, "r") as f:
            return toml.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except toml.TomlDecodeError as e:
        raise ConfigError(f"Error parsing config file {path}: {e}") from e


def spawn_generators(seed: int, names: list[str]) -> dict[str, np.random.Generator]:
    """
    Independent named random streams derived from one master seed.

    The mapping is positional: the same seed and the same list of names
    always give the same streams, regardless of how many draws each
    stream later serves.
    """
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(child) for name, child in zip(names, children)}
