"""Command configuration: flags, then environment, then a settings file, then defaults."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from .base import (
    DEFAULT_FORMAT,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    ENV_WORKERS,
    FORMATS,
    MASK64,
    RolemarkError,
)

logger = logging.getLogger(__name__)

COMMANDS = ("detect", "augment", "transform", "filter", "suite", "stats", "eval", "targets")
MUTATING_COMMANDS = frozenset({"augment", "transform", "filter", "suite"})

# Keys a settings file may set, with the type each must have.
SETTINGS_TYPES: Dict[str, type] = {
    "format": str,
    "seed": int,
    "workers": int,
    "name_based": bool,
    "independent_seeds": bool,
    "per_example": bool,
    "verbose": bool,
    "epoch": int,
}


class ConfigError(RolemarkError, ValueError):
    """Invalid flag, environment or settings value; reported as a usage error."""


@dataclass(frozen=True)
class CommandConfig:
    command: str
    input_path: Optional[Path] = None
    output_path: Optional[Path] = None
    format: str = DEFAULT_FORMAT
    seed: int = DEFAULT_SEED
    workers: int = DEFAULT_WORKERS
    name_based: bool = False
    independent_seeds: bool = False
    per_example: bool = False
    verbose: bool = False
    epoch: Optional[int] = None
    settings_path: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command {self.command!r}.")
        if self.format not in FORMATS:
            raise ConfigError(f"--format must be one of {', '.join(FORMATS)}, got {self.format!r}.")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {self.seed}.")
        if self.workers < 1:
            raise ConfigError(f"--workers must be a positive integer, got {self.workers}.")
        if self.mutating and self.output_path is None:
            raise ConfigError(f"{self.command} requires --out.")

    @property
    def mutating(self) -> bool:
        return self.command in MUTATING_COMMANDS

    def as_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        for key in ("input_path", "output_path", "settings_path"):
            if payload[key] is not None:
                payload[key] = str(payload[key])
        return payload


def load_settings(path: Optional[Path]) -> Dict[str, Any]:
    """Read a JSON settings file; a missing or unreadable file yields no settings."""
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except FileNotFoundError:
        logger.warning("settings file %s not found; using defaults", path)
        return {}
    except (OSError, json.JSONDecodeError) as exc:
        logger.warning("settings file %s unreadable (%s); using defaults", path, exc)
        return {}
    if not isinstance(payload, dict):
        logger.warning("settings file %s is not a JSON object; using defaults", path)
        return {}
    settings: Dict[str, Any] = {}
    for key, value in payload.items():
        expected = SETTINGS_TYPES.get(key)
        if expected is None:
            logger.warning("ignoring unknown settings key %r in %s", key, path)
            continue
        # bool is an int subclass; keep the two apart.
        if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
            raise ConfigError(
                f"settings key {key!r} in {path} must be {expected.__name__}, got {value!r}."
            )
        settings[key] = value
    return settings


def _env_workers(env: Mapping[str, str]) -> Optional[int]:
    raw = env.get(ENV_WORKERS)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_WORKERS} must be an integer, got {raw!r}.") from exc


def resolve_config(
    command: str,
    flags: Mapping[str, Any],
    env: Optional[Mapping[str, str]] = None,
) -> CommandConfig:
    """Build a :class:`CommandConfig`; ``None`` in ``flags`` means "not given"."""
    environ = os.environ if env is None else env
    settings_path = flags.get("settings_path")
    settings = load_settings(Path(settings_path) if settings_path is not None else None)

    values: Dict[str, Any] = {"command": command}
    for item in fields(CommandConfig):
        name = item.name
        if name == "command":
            continue
        value = flags.get(name)
        if value is None and name == "workers":
            value = _env_workers(environ)
        if value is None:
            value = settings.get(name)
        if value is not None:
            values[name] = Path(value) if name.endswith("_path") else value
    return CommandConfig(**values)


__all__ = [
    "COMMANDS",
    "MUTATING_COMMANDS",
    "SETTINGS_TYPES",
    "ConfigError",
    "CommandConfig",
    "load_settings",
    "resolve_config",
]
