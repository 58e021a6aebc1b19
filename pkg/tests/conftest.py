"""Shared fixtures and hypothesis strategies."""

import numpy as np
import pytest
from hypothesis import strategies as st

from conefan.core import catalog, config
from conefan.core.cones import cone_from_generators
from conefan.core.networks import EGraph


@pytest.fixture(autouse=True)
def no_alpha_cache(tmp_path):
    """Keep the alpha cache out of the user's home directory."""
    with config.override(use_cache=False, cache_dir=tmp_path):
        yield


@pytest.fixture
def coordinate_fan():
    return catalog.coordinate(2)


@pytest.fixture
def wedge_fan():
    return catalog.narrow_wedge(10.0)


@pytest.fixture
def lines_fan():
    return catalog.three_lines()


@pytest.fixture
def planes_fan():
    return catalog.two_planes()


@pytest.fixture
def fan_file(tmp_path):
    """Write a JSON document to tmp_path and return its path."""
    import json

    def write(obj, name="fan.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return write


@st.composite
def random_cones(draw, dims=(2, 3), max_generators=6):
    """Cones spanned by 1..max_generators Gaussian rays in R^2 or R^3."""
    n = draw(st.sampled_from(dims))
    m = draw(st.integers(min_value=1, max_value=max_generators))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    rng = np.random.default_rng(seed)
    return cone_from_generators(rng.standard_normal((m, n)), n)


@st.composite
def points(draw, n, scale=5.0):
    coords = draw(st.lists(st.floats(min_value=-scale, max_value=scale, allow_nan=False),
                           min_size=n, max_size=n))
    return np.array(coords)


@st.composite
def weakly_reversible_graphs(draw, max_dim=3):
    """Unions of directed cycles over random integer complexes."""
    n = draw(st.integers(min_value=1, max_value=max_dim))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    rng = np.random.default_rng(seed)
    n_vertices = int(rng.integers(2, min(7, 4 ** n + 1)))
    vertices = []
    while len(vertices) < n_vertices:
        v = rng.integers(0, 4, n).tolist()
        if v not in vertices:
            vertices.append(v)
    edges = set()
    for _ in range(int(rng.integers(1, 4))):
        size = int(rng.integers(2, n_vertices + 1))
        cycle = rng.choice(n_vertices, size=size, replace=False).tolist()
        edges.update(zip(cycle, cycle[1:] + cycle[:1]))
    return EGraph(np.array(vertices, dtype=float), tuple(sorted(edges)))
