"""Pipeline configuration: key=value file, FRAGSMITH_* env overrides,
then command-line flags, in increasing precedence."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

ENV_PREFIX = "FRAGSMITH_"


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    seed: int = 0
    k: int | None = None  # None: compute from the library
    alpha: float = 1.5
    shards: int = 50000  # records per shard
    out: str = "out"
    vocab: str | None = None  # saved vocab file
    groups: str | None = None  # functional-group file
    templates: str | None = None
    invalid_as_zero: bool = False
    special_pairing: str = "mnemonic"


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, raw: str, target_type) -> object:
    raw = raw.strip()
    if target_type is bool:
        low = raw.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {raw!r}") from None
    return raw


_FIELD_TYPES = {
    "seed": int,
    "k": int,
    "alpha": float,
    "shards": int,
    "out": str,
    "vocab": str,
    "groups": str,
    "templates": str,
    "invalid_as_zero": bool,
    "special_pairing": str,
}


def load_config_file(path: str | Path) -> dict:
    """Parse a ``key = value`` config file (# comments allowed)."""
    values: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw, _FIELD_TYPES[key])
    return values


def env_overrides(environ=None) -> dict:
    env = os.environ if environ is None else environ
    values: dict = {}
    for name in _FIELD_TYPES:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw, _FIELD_TYPES[name])
    return values


def resolve_config(
    config_path: str | Path | None = None,
    flag_values: dict | None = None,
    environ=None,
) -> PipelineConfig:
    cfg = PipelineConfig()
    layers = []
    if config_path is not None:
        layers.append(load_config_file(config_path))
    layers.append(env_overrides(environ))
    if flag_values:
        layers.append({k: v for k, v in flag_values.items() if v is not None})
    names = {f.name for f in fields(PipelineConfig)}
    for layer in layers:
        for key, value in layer.items():
            if key in names:
                setattr(cfg, key, value)
    if cfg.special_pairing not in ("mnemonic", "paper"):
        raise ConfigError(
            f"special_pairing must be 'mnemonic' or 'paper', got {cfg.special_pairing!r}"
        )
    return cfg
