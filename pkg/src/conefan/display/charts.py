"""ASCII sparklines for trajectories."""

from __future__ import annotations

from typing import Sequence

import numpy as np

SPARK_CHARS = "▁▂▃▄▅▆▇█"


def sparkline(values: Sequence[float], width: int | None = None) -> str:
    """Render a sparkline string, resampled to `width` characters if given."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return ""
    if width is not None and values.size > width:
        picks = np.linspace(0, values.size - 1, width).round().astype(int)
        values = values[picks]
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return SPARK_CHARS[3] * values.size
    scale = (len(SPARK_CHARS) - 1) / (hi - lo)
    return "".join(SPARK_CHARS[int((v - lo) * scale)] for v in values)
