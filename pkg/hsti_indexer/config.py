"""
Benchmark settings.

Values resolve from built-in defaults, then `HSTI_*` environment variables (a `.env`
file is loaded first), then a flat key=value file given with `--config`, then
command-line flags.
"""

from __future__ import annotations

import os
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from typing import Any

from dotenv import dotenv_values, load_dotenv

from hsti_indexer.errors import ConfigurationError

ENV_PREFIX = "HSTI_"
DEFAULT_DATA_PATH = "data"

SWEEP_K_LIST = [10, 20, 50, 100, 200, 500]
SWEEP_CLUSTER_SIZES = [2, 4, 6, 8]


def _int_list(value: str) -> list[int]:
    return [int(part) for part in value.split(",") if part.strip()]


@dataclass(frozen=True)
class Settings:
    k: list[int] = field(default_factory=lambda: [100])
    cluster_size: list[int] = field(default_factory=lambda: [4])
    interval_width: float = 200.0
    xi: int = 200
    depth_l: int = 16
    grid_g: int = 6
    seed: int = 42
    queries: int = 100
    spatial_region: float = 200.0
    data_path: str = DEFAULT_DATA_PATH

    def validate(self) -> Settings:
        if not self.k or any(k < 1 for k in self.k):
            raise ConfigurationError(f"k values must be at least 1, got {self.k}")
        if not self.cluster_size or any(c < 1 for c in self.cluster_size):
            raise ConfigurationError(f"cluster_size values must be at least 1, got {self.cluster_size}")
        if self.interval_width < 0:
            raise ConfigurationError(f"interval_width must be non-negative, got {self.interval_width}")
        if self.xi < 1:
            raise ConfigurationError(f"xi must be at least 1, got {self.xi}")
        if self.depth_l < 2:
            raise ConfigurationError(f"depth_l must be at least 2, got {self.depth_l}")
        if not 1 <= self.grid_g <= 16:
            raise ConfigurationError(f"grid_g must be in [1, 16], got {self.grid_g}")
        if self.queries < 1:
            raise ConfigurationError(f"queries must be at least 1, got {self.queries}")
        return self


_PARSERS: dict[str, Callable[[str], Any]] = {
    "k": _int_list,
    "cluster_size": _int_list,
    "interval_width": float,
    "xi": int,
    "depth_l": int,
    "grid_g": int,
    "seed": int,
    "queries": int,
    "spatial_region": float,
    "data_path": str,
}


def normalize_key(key: str) -> str:
    """`--cluster-size`, `cluster_size` and `CLUSTER-SIZE` all name the same setting."""
    return key.strip().lstrip("-").replace("-", "_").lower()


def apply_values(settings: Settings, values: Mapping[str, Any], source: str) -> Settings:
    """Overlay raw values (strings are parsed) onto settings; unknown keys are an error."""
    updates: dict[str, Any] = {}
    for raw_key, raw_value in values.items():
        if raw_value is None:
            continue
        key = normalize_key(raw_key)
        if key not in _PARSERS:
            raise ConfigurationError(f"Unknown setting '{raw_key}' in {source}")
        if isinstance(raw_value, str):
            try:
                updates[key] = _PARSERS[key](raw_value)
            except ValueError as e:
                raise ConfigurationError(f"Invalid value for '{key}' in {source}: {raw_value!r}") from e
        else:
            updates[key] = raw_value
    return replace(settings, **updates)


def env_values(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    """HSTI_* settings and DATA_PATH found in the environment."""
    environ = os.environ if environ is None else environ
    values = {
        name[len(ENV_PREFIX) :]: value
        for name, value in environ.items()
        if name.startswith(ENV_PREFIX) and normalize_key(name[len(ENV_PREFIX) :]) in _PARSERS
    }
    if environ.get("DATA_PATH"):
        values["data_path"] = environ["DATA_PATH"]
    return values


def load_settings(
    config_path: str | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
    full_sweep: bool = False,
) -> Settings:
    """Defaults, then environment, then the --config file, then `overrides`; the result is validated."""
    if environ is None:
        load_dotenv()
    settings = apply_values(Settings(), env_values(environ), "environment")

    if config_path:
        if not os.path.exists(config_path):
            raise ConfigurationError(f"Config file not found: {config_path}")
        file_values = {key: value for key, value in dotenv_values(config_path).items() if value is not None}
        settings = apply_values(settings, file_values, config_path)

    if full_sweep:
        settings = replace(settings, k=list(SWEEP_K_LIST), cluster_size=list(SWEEP_CLUSTER_SIZES))

    if overrides:
        settings = apply_values(settings, overrides, "command line")
    return settings.validate()
