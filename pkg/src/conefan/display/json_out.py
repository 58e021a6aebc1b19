"""JSON serialization for command output."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any

import numpy as np
from rich.console import Console

from conefan.core.cones import Cone, cone_to_json
from conefan.core.fans import Fan, fan_to_json

console = Console()


class _Encoder(json.JSONEncoder):
    def default(self, obj: Any) -> Any:
        if isinstance(obj, Cone):
            return cone_to_json(obj)
        if isinstance(obj, Fan):
            return fan_to_json(obj)
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            # shallow, so nested cones and arrays come back through default()
            return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, Path):
            return str(obj)
        return super().default(obj)


def dumps(data: Any) -> str:
    return json.dumps(data, cls=_Encoder, indent=2)


def print_json(data: Any, output: str | Path | None = None) -> None:
    """Print data as formatted JSON to stdout, or write it to `output`."""
    text = dumps(data)
    if output:
        Path(output).write_text(text + "\n")
        return
    console.print_json(text)
