"""Runtime settings: tolerance, seed, sample counts, cache location."""

from __future__ import annotations

import os
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace
from pathlib import Path

from conefan.core.errors import InputError

DEFAULT_TOLERANCE = 1e-9
DEFAULT_SEED = 0
DEFAULT_SAMPLES = 100_000
CACHE_DIR = Path.home() / ".conefan"


@dataclass(frozen=True)
class Settings:
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    cache_dir: Path = CACHE_DIR
    use_cache: bool = True


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"{name} must be a number, got {raw!r}")
    if not value > 0:
        raise InputError(f"{name} must be positive, got {raw!r}")
    return value


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{name} must be an integer, got {raw!r}")


def from_env() -> Settings:
    """Build settings from CONEFAN_* environment variables."""
    cache_dir = os.environ.get("CONEFAN_CACHE_DIR")
    return Settings(
        tolerance=_env_float("CONEFAN_TOLERANCE", DEFAULT_TOLERANCE),
        seed=_env_int("CONEFAN_SEED", DEFAULT_SEED),
        cache_dir=Path(cache_dir) if cache_dir else CACHE_DIR,
    )


_active: ContextVar[Settings | None] = ContextVar("conefan_settings", default=None)


def current() -> Settings:
    settings = _active.get()
    if settings is None:
        settings = from_env()
        _active.set(settings)
    return settings


def tolerance(tol: float | None = None) -> float:
    return current().tolerance if tol is None else tol


@contextmanager
def override(**fields):
    """Temporarily replace settings fields (None values are ignored)."""
    fields = {k: v for k, v in fields.items() if v is not None}
    token = _active.set(replace(current(), **fields))
    try:
        yield _active.get()
    finally:
        _active.reset(token)
