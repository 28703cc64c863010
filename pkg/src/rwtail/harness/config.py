"""Experiment configuration: TOML or JSON documents, validated in one pass."""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from ..errors import ConfigurationError, RWTailError

OUT_DIR_ENV = "RWTAIL_OUT_DIR"
DEFAULT_OUT_DIR = "rwtail-out"


class ConfigError(ConfigurationError):
    """Invalid experiment configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors) if not isinstance(errors, str) else [errors]
        super().__init__("; ".join(self.errors))


def parse_text(text: str, fmt: str) -> dict:
    """Parse a config document; errors name the offending line."""
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    elif fmt == "toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"TOML parse error: {exc}") from None
    else:
        raise ConfigError(f"unknown config format {fmt!r}")
    if not isinstance(data, dict):
        raise ConfigError("config document must be a table/object at the top level")
    return data


def load_config(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    return parse_text(text, "json" if p.suffix.lower() == ".json" else "toml")


@dataclass
class ExperimentConfig:
    """Fully resolved configuration of one run."""

    experiment: str
    seed: int
    params: dict = field(default_factory=dict)
    output_dir: str | None = None

    def to_dict(self) -> dict:
        out = {"experiment": self.experiment, "seed": self.seed, **self.params}
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out


def resolve_output_dir(cli_out: str | None, cfg: ExperimentConfig) -> Path:
    """``--out`` beats the config, which beats ``$RWTAIL_OUT_DIR``."""
    return Path(cli_out or cfg.output_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def _merge(defaults: Mapping, given: Mapping) -> dict:
    out = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in defaults.items()}
    for k, v in given.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping) and "kind" not in v and "family" not in v:
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def validate(raw: Mapping, seed_override: int | None = None) -> ExperimentConfig:
    """Resolve defaults and check every field; raises :class:`ConfigError` with all errors."""
    from .experiments import REGISTRY

    errors: list[str] = []
    raw = dict(raw)
    name = raw.pop("experiment", None)
    if name is None:
        errors.append("field 'experiment': missing")
    elif name not in REGISTRY:
        errors.append(f"field 'experiment': unknown experiment {name!r}; expected one of {sorted(REGISTRY)}")
    seed = raw.pop("seed", None)
    if seed_override is not None:
        seed = seed_override
    if seed is None:
        errors.append("field 'seed': missing (an explicit seed is mandatory)")
    elif isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        errors.append(f"field 'seed': must be an integer in [0, 2^64), got {seed!r}")
    out_dir = raw.pop("output_dir", None)
    if errors and (name is None or name not in REGISTRY):
        raise ConfigError(errors)
    exp = REGISTRY[name]
    unknown = sorted(set(raw) - set(exp.defaults))
    for key in unknown:
        errors.append(f"field {key!r}: not used by experiment {name!r}")
    params = _merge(exp.defaults, {k: v for k, v in raw.items() if k not in unknown})
    for key, check in exp.checks.items():
        try:
            check(params[key], params)
        except RWTailError as exc:
            errors.append(f"field {key!r}: {exc}")
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"field {key!r}: invalid value ({type(exc).__name__}: {exc})")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(name, int(seed), params, out_dir)


# -- shared field checks -------------------------------------------------------


def check_count(minimum: int = 1):
    def check(value, _params):
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise ConfigurationError(f"must be an integer >= {minimum}")
    return check


def check_probability_level(value, _params):
    if not isinstance(value, (int, float)) or not 0.0 < value < 1.0:
        raise ConfigurationError("must lie strictly between 0 and 1")


def check_levels(value, _params):
    if value is None or value == "auto":
        return
    if not isinstance(value, list) or not value or not all(isinstance(v, (int, float)) and v > 0 for v in value):
        raise ConfigurationError("x_levels must be 'auto' or a non-empty list of positive numbers")


def check_positive(value, _params):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0 or not math.isfinite(value):
        raise ConfigurationError("must be a positive number")
