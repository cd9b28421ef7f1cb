"""Pipeline configuration: the handful of constants the measurement depends on.

A snapshot of the active config is embedded in every CaseResult so any output
can be reproduced. The config file format is plain ``key = value`` lines with
``#`` comments; command-line flags override file values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class PipelineConfig:
    max_degree: int = 10
    normalized_length: float = 572.0
    tolerance_fraction: float = 0.15
    max_interval: float = 250.0
    grid_step: float = 0.5
    slope_eps: float = 1e-6
    min_component_area: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.max_degree < 1:
            raise ValueError("max_degree must be >= 1")
        if self.normalized_length <= 0:
            raise ValueError("normalized_length must be positive")
        if not 0 <= self.tolerance_fraction < 1:
            raise ValueError("tolerance_fraction must be in [0, 1)")
        if self.max_interval <= 0:
            raise ValueError("max_interval must be positive")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")
        if self.min_component_area < 1:
            raise ValueError("min_component_area must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kwargs) -> "PipelineConfig":
        return dataclasses.replace(self, **kwargs)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
_INT_FIELDS = {"max_degree", "min_component_area", "seed"}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into a kwargs dict for PipelineConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = int(val) if key in _INT_FIELDS else float(val)
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: bad value for {key}: {val!r}") from exc
    return values


def load_config(path) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return PipelineConfig(**parse_config_text(fh.read()))


def dump_config(cfg: PipelineConfig) -> str:
    lines = [f"{k} = {v}" for k, v in cfg.to_dict().items()]
    return "\n".join(lines) + "\n"
