"""Pipeline configuration and its key-value file format.

The file is plain ``key = value`` lines; '#' starts a comment and list
values are comma-separated. Every key mirrors a PipelineConfig field
(see README for the full table). CLI flags override file values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

STAGES = ("mine", "split", "analyze", "summarize", "cluster", "report")


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    out_dir: Path = Path("qd-out")
    repos: list[str] = field(default_factory=list)  # local clone paths
    extension: str = ".java"
    seed: int = 0
    offline: bool = False
    stages: list[str] = field(default_factory=lambda: list(STAGES))
    blob_threshold_bytes: int = 262144
    # clustering
    k_min: int | None = None
    k_max: int | None = None
    restarts: int = 10
    standardize: bool = False
    # discovery
    min_stars: int = 1000
    min_forks: int = 1000
    query_terms: list[str] = field(default_factory=list)
    limit: int = 10
    # summarizer
    llm_endpoint: str = "https://api.openai.com/v1/chat/completions"
    llm_model: str = "gpt-4"
    llm_temperature: float = 0.0

    def validate(self) -> None:
        unknown = [s for s in self.stages if s not in STAGES]
        if unknown:
            raise ConfigError(f"unknown stages {unknown}; valid: {', '.join(STAGES)}")


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}

_LIST_KEYS = {"repos", "stages", "query_terms"}
_INT_KEYS = {
    "seed", "blob_threshold_bytes", "k_min", "k_max", "restarts",
    "min_stars", "min_forks", "limit",
}
_FLOAT_KEYS = {"llm_temperature"}
_BOOL_KEYS = {"offline", "standardize"}


def parse_config_text(text: str) -> dict:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key in _LIST_KEYS:
            values[key] = [v.strip() for v in val.split(",") if v.strip()]
        elif key in _INT_KEYS:
            try:
                values[key] = int(val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key} must be an integer") from exc
        elif key in _FLOAT_KEYS:
            values[key] = float(val)
        elif key in _BOOL_KEYS:
            if val.lower() not in _BOOL:
                raise ConfigError(f"line {lineno}: {key} must be true/false")
            values[key] = _BOOL[val.lower()]
        elif key == "out_dir":
            values[key] = Path(val)
        elif key in ("extension", "llm_endpoint", "llm_model"):
            values[key] = val
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    return values


def load_config(path: str | Path | None, **overrides) -> PipelineConfig:
    values: dict = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    values.update({k: v for k, v in overrides.items() if v is not None})
    config = PipelineConfig(**values)
    config.validate()
    return config
