"""Line-oriented ``key = value`` configuration.

Zero-dependency and diff-friendly: one assignment per line, ``#`` starts a
comment line, unknown keys are kept verbatim so forward-compatible files do
not error.  Typed getters coerce on access.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .budget import ModelLimits
from .errors import ConfigError
from .lexicons import Lexicons, load_lexicons
from .quality import QualityConfig

DEFAULTS = {
    "context_tokens": "4096",
    "prompt_overhead_tokens": "64",
    "backend.url": "http://localhost:8000/v1",
    "backend.model": "local-model",
    "backend.api_key_env": "",
    "backend.timeout_ms": "60000",
    "backend.max_in_flight": "4",
    "quality.support_threshold": "0.2",
    "quality.sparse_max": "2",
    "quality.dense_min": "30",
    "service.port": "8080",
    "service.allow_raw": "false",
    "service.ui_dir": "frontend/dist",
}

_LEXICON_PREFIX = "lexicon."


@dataclass
class Config:
    values: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path | None) -> "Config":
        if path is None:
            return cls()
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values: dict[str, str] = {}
        for line_num, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{line_num}: expected 'key = value'")
            key, value = stripped.split("=", 1)
            values[key.strip()] = value.strip()
        return cls(values)

    def get(self, key: str, default: str | None = None) -> str:
        if key in self.values:
            return self.values[key]
        if key in DEFAULTS:
            return DEFAULTS[key]
        if default is not None:
            return default
        raise ConfigError(f"missing config key {key!r}")

    def get_int(self, key: str) -> int:
        raw = self.get(key)
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r} must be an integer, got {raw!r}") from exc

    def get_float(self, key: str) -> float:
        raw = self.get(key)
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r} must be a number, got {raw!r}") from exc

    def get_bool(self, key: str) -> bool:
        raw = self.get(key).lower()
        if raw in ("true", "yes", "1", "on"):
            return True
        if raw in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"config key {key!r} must be a boolean, got {raw!r}")

    def model_limits(self) -> ModelLimits:
        return ModelLimits(
            context_tokens=self.get_int("context_tokens"),
            prompt_overhead_tokens=self.get_int("prompt_overhead_tokens"),
        )

    def quality_config(self) -> QualityConfig:
        return QualityConfig(
            support_threshold=self.get_float("quality.support_threshold"),
            sparse_max=self.get_int("quality.sparse_max"),
            dense_min=self.get_int("quality.dense_min"),
        )

    def lexicons(self) -> Lexicons:
        overrides = {
            key[len(_LEXICON_PREFIX):]: value
            for key, value in self.values.items()
            if key.startswith(_LEXICON_PREFIX)
        }
        return load_lexicons(overrides or None)

    def snapshot(self) -> dict[str, str]:
        merged = dict(DEFAULTS)
        merged.update(self.values)
        return merged
