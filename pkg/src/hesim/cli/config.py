"""Flat key-value run configuration: file values first, command-line flags on top."""

from __future__ import annotations

import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def load_config(path: str | Path | None) -> dict:
    """Read a flat TOML file, or a JSON manifest (its ``config`` table is used)."""
    if path is None:
        return {}
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            data = json.loads(text)
            data = data.get("config", data)
        else:
            data = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a table of keys")
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"nested table {key!r} not supported; use flat keys")
    return {k.replace("-", "_"): v for k, v in data.items()}


def merge(defaults: dict, file_values: dict, flags: dict) -> dict:
    """defaults < file < flags; flags left at None do not override."""
    unknown = set(file_values) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = dict(defaults)
    out.update(file_values)
    out.update({k: v for k, v in flags.items() if v is not None and k in defaults})
    return out


def int_list(value) -> list[int]:
    """Accept "8,16,32", a list, or a single int."""
    if isinstance(value, str):
        items = [s for s in value.replace(" ", "").split(",") if s]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [value]
    try:
        return [int(v) for v in items]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected a list of integers, got {value!r}") from exc


def str_list(value) -> list[str]:
    if isinstance(value, str):
        return [s for s in value.replace(" ", "").split(",") if s]
    return [str(v) for v in value]
