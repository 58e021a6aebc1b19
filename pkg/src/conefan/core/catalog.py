"""Bundled fans used by the CLI (`conefan fan builtin`) and the test suite."""

from __future__ import annotations

from typing import Callable

import numpy as np

from conefan.core.cones import cone_from_generators
from conefan.core.errors import InputError
from conefan.core.fans import Fan, certify_complete, fan_from_maximal, hyperplane_fan


def coordinate(n: int = 2) -> Fan:
    """Orthants of R^n and all their faces (3^n cones)."""
    return hyperplane_fan(np.eye(n), n)


def narrow_wedge(angle_deg: float = 10.0) -> Fan:
    """Two lines through the origin in R^2 meeting at `angle_deg`."""
    theta = np.radians(angle_deg)
    return hyperplane_fan([[0.0, 1.0], [-np.sin(theta), np.cos(theta)]], 2)


def _triangle_rays() -> np.ndarray:
    return np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])


def three_sectors() -> Fan:
    """Three maximal cones in R^2 (seven cones in all)."""
    r = _triangle_rays()
    maximal = [cone_from_generators(r[[i, j]], 2) for i, j in ((0, 1), (1, 2), (2, 0))]
    return certify_complete(fan_from_maximal(maximal))


def three_lines() -> Fan:
    """Three generic lines in R^2 (13 cones)."""
    angles = np.radians([0.0, 60.0, 120.0])
    return hyperplane_fan(np.column_stack([-np.sin(angles), np.cos(angles)]), 2)


def three_wedges() -> Fan:
    """`three_sectors` times a line: three non-pointed maximal cones in R^3."""
    r = np.column_stack([_triangle_rays(), np.zeros(3)])
    axis = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    maximal = [cone_from_generators(np.vstack([r[[i, j]], axis]), 3)
               for i, j in ((0, 1), (1, 2), (2, 0))]
    return certify_complete(fan_from_maximal(maximal))


def two_planes() -> Fan:
    """Two generic planes through the origin in R^3 (nine cones)."""
    return hyperplane_fan([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]], 3)


def octant() -> Fan:
    return coordinate(3)


BUILTINS: dict[str, Callable[[], Fan]] = {
    "coordinate-2d": lambda: coordinate(2),
    "coordinate-1d": lambda: coordinate(1),
    "narrow-wedge": narrow_wedge,
    "three-sectors": three_sectors,
    "three-lines": three_lines,
    "three-wedges": three_wedges,
    "two-planes": two_planes,
    "octant": octant,
}


def builtin(name: str) -> Fan:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise InputError(f"unknown builtin fan {name!r}; choose from {', '.join(BUILTINS)}")
    return factory()
