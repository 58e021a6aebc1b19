"""File and flag parsing shared by the CLI and the api."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from conefan.core.errors import InputError


def read_json(path: str | Path) -> Any:
    """Parse a JSON file; syntax errors carry the line and column."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}")


def parse_vector(text: str, name: str = "vector", length: int | None = None) -> np.ndarray:
    """'0.5,0.5' -> array([0.5, 0.5])."""
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{name} must be comma-separated numbers, got {text!r}")
    if not values:
        raise InputError(f"{name} is empty")
    if length is not None and len(values) != length:
        raise InputError(f"{name} must have {length} entries, got {len(values)}")
    arr = np.array(values)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    return arr


def parse_indices(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cone indices must be comma-separated integers, got {text!r}")
