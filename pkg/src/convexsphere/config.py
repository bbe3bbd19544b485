"""Experiment configuration shared by the command-line drivers.

One flat dataclass covers every subcommand; unused fields stay None.
Configs parse from key=value pairs or a JSON file, round-trip
losslessly through to_dict/from_dict, and reject unknown keys with
the list of valid ones, so a typo never silently runs defaults.
"""

import dataclasses
import json
from dataclasses import dataclass

from .errors import ConfigError

_TUPLE_KEYS = {"axes"}


@dataclass
class ExperimentConfig:
    experiment: str = ""
    n: int = 3
    ambient_n: int | None = None
    d: int = 8
    d_max: int | None = None
    eps: float | None = None
    rho: float | None = None
    t: float | None = None
    seed: int = 0
    resolution: int | None = None
    samples: int = 500
    trials: int = 100
    count: int = 16
    tol: float | None = None
    axes: tuple | None = None
    group: str | None = None
    family: str | None = None
    body_a: str | None = None
    body_b: str | None = None
    body: str | None = None
    field: str | None = None
    vertices: str | None = None
    chain: bool = False
    elementary: bool = False
    allow_even: bool = False
    out: str | None = None

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        valid = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(valid))
        if unknown:
            raise ConfigError(
                f"unknown config keys {unknown}; valid keys: {sorted(valid)}"
            )
        kwargs = {}
        for key, value in data.items():
            if key in _TUPLE_KEYS and value is not None:
                value = tuple(value)
            kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def from_pairs(cls, pairs) -> "ExperimentConfig":
        """Parse ["n=3", "eps=0.05", ...] with types taken from the
        field declarations."""
        valid = {f.name: f for f in dataclasses.fields(cls)}
        data = {}
        for pair in pairs:
            if "=" not in pair:
                raise ConfigError(f"expected key=value, got {pair!r}")
            key, _, raw = pair.partition("=")
            key = key.strip()
            if key not in valid:
                raise ConfigError(
                    f"unknown config key {key!r}; valid keys: {sorted(valid)}"
                )
            data[key] = _coerce(key, raw.strip())
        return cls.from_dict(data)

    @classmethod
    def from_json_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"no such config file: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"malformed JSON in {path} at line {exc.lineno}: {exc.msg}"
            ) from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)


def _coerce(key: str, raw: str):
    if key in _TUPLE_KEYS:
        return tuple(float(x) for x in raw.split(",") if x)
    if raw.lower() in ("none", "null"):
        return None
    hints = {f.name: str(f.type) for f in dataclasses.fields(ExperimentConfig)}
    hint = hints[key]
    try:
        if "bool" in hint:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw}")
        if "int" in hint:
            return int(raw)
        if "float" in hint:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc
    return raw
