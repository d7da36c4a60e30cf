"""Run configuration: defaults, a key = value config file, then CLI flags."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .similarity import SimilarityParams
from .winnow import WinnowParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    k: int = 7
    t: int = 12
    m: int = 4
    L: int = 4
    corpus_path: Path = Path("corpus")
    index_path: Path = Path("corpus.fpidx")
    output_dir: Path = Path("out")
    posting_cap: int | None = None
    anonymize: bool = False
    verify_matches: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        try:
            self.winnow_params
            self.similarity_params
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @property
    def winnow_params(self) -> WinnowParams:
        return WinnowParams(self.k, self.t)

    @property
    def similarity_params(self) -> SimilarityParams:
        return SimilarityParams(self.k, self.L, self.t, self.m, self.posting_cap)

    def updated(self, values: Mapping[str, Any]) -> Config:
        """Copy with the given non-None values applied (strings are coerced)."""
        kinds = {f.name: f for f in fields(self)}
        changes = {}
        for key, value in values.items():
            if value is None:
                continue
            if key not in kinds:
                raise ConfigError(f"unknown config key: {key}")
            changes[key] = _coerce(key, value)
        return replace(self, **changes)


_INT_KEYS = {"k", "t", "m", "L", "posting_cap", "jobs"}
_BOOL_KEYS = {"anonymize", "verify_matches"}
_PATH_KEYS = {"corpus_path", "index_path", "output_dir"}
_ALIASES = {"corpus": "corpus_path", "index": "index_path", "out": "output_dir"}


def _coerce(key: str, value: Any) -> Any:
    if not isinstance(value, str):
        return Path(value) if key in _PATH_KEYS else value
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from None
    if key in _BOOL_KEYS:
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean, got {value!r}")
    return Path(value)


def read_config_file(path: Path | str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key.replace("-", "_"))
        values[key] = value
    return values
