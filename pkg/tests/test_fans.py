import time

import numpy as np
import pytest

from conefan.core import catalog
from conefan.core.cones import cone_contains_cone, cone_equal, cone_from_generators, intersect_all, ray
from conefan.core.errors import FanInvariantError, InputError
from conefan.core.fans import (
    Fan, cones_from_json, fan_from_json, fan_from_maximal, fan_to_json, hyperplane_fan,
    intersect_in_fan, is_complete, orthogonal_projector, project_cone, project_fan, require_fan,
    validate_fan,
)


def dims_count(f: Fan) -> dict[int, int]:
    return {k: int(np.sum(f.dims == k)) for k in sorted(set(f.dims.tolist()))}


class TestHyperplaneFan:
    def test_three_lines_have_thirteen_cones(self):
        start = time.perf_counter()
        f = catalog.three_lines()
        assert time.perf_counter() - start < 1.0
        assert len(f.cones) == 13
        assert dims_count(f) == {0: 1, 1: 6, 2: 6}

    def test_two_planes_have_nine_cones(self):
        f = catalog.two_planes()
        assert len(f.cones) == 9
        assert dims_count(f) == {1: 1, 2: 4, 3: 4}

    def test_coordinate_fan(self):
        f = catalog.coordinate(2)
        assert dims_count(f) == {0: 1, 1: 4, 2: 4}
        assert f.complete and f.completeness == "construction"

    def test_octant_has_twenty_seven_cones(self):
        assert len(catalog.octant().cones) == 27

    def test_duplicate_normals_collapse(self):
        f = hyperplane_fan([[1, 0], [-2, 0], [0, 1]], 2)
        assert len(f.cones) == 9

    def test_no_hyperplanes_is_whole_space(self):
        f = hyperplane_fan(np.zeros((0, 2)), 2)
        assert len(f.cones) == 1
        assert f.cones[0].dim == 2

    def test_zero_normal_rejected(self):
        with pytest.raises(InputError):
            hyperplane_fan([[0, 0]], 2)

    def test_too_many_hyperplanes(self):
        angles = np.linspace(0, np.pi, 13, endpoint=False)
        with pytest.raises(InputError):
            hyperplane_fan(np.column_stack([np.cos(angles), np.sin(angles)]), 2)

    def test_output_validates(self):
        f = catalog.three_lines()
        assert validate_fan(f.cones).valid


class TestValidation:
    def test_missing_face_reported_not_added(self):
        quadrant = cone_from_generators([[1, 0], [0, 1]], 2)
        report = validate_fan([quadrant])
        assert not report.valid
        assert {v.kind for v in report.violations} == {"missing-face"}
        assert report.fan is None

    def test_overlapping_cones(self):
        a = cone_from_generators([[1, 0], [0, 1]], 2)
        b = cone_from_generators([[1, 1], [-1, 1]], 2)
        cones = [a, b, ray([1, 0]), ray([0, 1]), ray([1, 1]), ray([-1, 1]),
                 cone_from_generators([], 2)]
        report = validate_fan(cones)
        assert any(v.kind == "intersection" for v in report.violations)

    def test_duplicates(self):
        r = ray([1, 0])
        report = validate_fan([r, cone_from_generators([[2, 0]], 2), cone_from_generators([], 2)])
        assert [v.kind for v in report.violations] == ["duplicate"]

    def test_mixed_ambient_dimensions(self):
        with pytest.raises(InputError):
            validate_fan([ray([1, 0]), ray([1, 0, 0])])

    def test_require_fan_raises(self):
        with pytest.raises(FanInvariantError):
            require_fan([cone_from_generators([[1, 0], [0, 1]], 2)])

    def test_from_maximal_closes_faces(self):
        f = fan_from_maximal([cone_from_generators([[1, 0], [0, 1]], 2)])
        assert len(f.cones) == 4
        assert not f.complete


class TestCompleteness:
    def test_three_sectors_complete(self):
        f = catalog.three_sectors()
        assert len(f.cones) == 7
        assert f.complete and f.completeness == "sampled"

    def test_three_wedges(self):
        f = catalog.three_wedges()
        assert len(f.cones) == 7
        assert f.complete
        assert all(not f.cones[i].is_pointed for i in f.maximal)

    def test_quadrant_alone_is_incomplete(self):
        f = fan_from_maximal([cone_from_generators([[1, 0], [0, 1]], 2)])
        report = is_complete(f, samples=1000, seed=0)
        assert not report.complete
        # coordinate directions come first
        assert report.witness == [-1.0, 0.0]

    def test_seeded_sampling_is_deterministic(self):
        f = fan_from_maximal([cone_from_generators([[1, 0], [0, 1]], 2)])
        assert is_complete(f, 500, seed=3) == is_complete(f, 500, seed=3)


class TestQueries:
    def test_containment_matrix(self, coordinate_fan):
        M = coordinate_fan.containment
        apex = coordinate_fan.index_of(cone_from_generators([], 2))
        assert M[apex].all()
        assert np.all(np.diag(M))
        for i in coordinate_fan.maximal:
            assert M[i].sum() == 1

    def test_meet_of_adjacent_quadrants(self, coordinate_fan):
        q1 = coordinate_fan.index_of(cone_from_generators([[1, 0], [0, 1]], 2))
        q2 = coordinate_fan.index_of(cone_from_generators([[-1, 0], [0, 1]], 2))
        j = coordinate_fan.meet([q1, q2])
        assert cone_equal(coordinate_fan.cones[j], ray([0, 1]))

    def test_meet_of_opposite_quadrants_is_apex(self, coordinate_fan):
        q1 = coordinate_fan.index_of(cone_from_generators([[1, 0], [0, 1]], 2))
        q3 = coordinate_fan.index_of(cone_from_generators([[-1, 0], [0, -1]], 2))
        assert coordinate_fan.cones[coordinate_fan.meet([q1, q3])].is_zero

    def test_intersect_in_fan_matches_meet(self, lines_fan):
        for i in lines_fan.maximal:
            for j in lines_fan.maximal:
                cone, where = intersect_in_fan(lines_fan, [i, j])
                assert where == lines_fan.meet([i, j])

    def test_index_of_other_generators(self, coordinate_fan):
        assert coordinate_fan.index_of(cone_from_generators([[3, 0], [0, 5], [1, 1]], 2)) is not None
        assert coordinate_fan.index_of(ray([1, 1])) is None

    def test_fingerprint_is_stable(self):
        assert catalog.three_lines().fingerprint == catalog.three_lines().fingerprint
        assert catalog.three_lines().fingerprint != catalog.coordinate(2).fingerprint


class TestJson:
    def test_round_trip(self, lines_fan):
        back = cones_from_json(fan_to_json(lines_fan))
        assert len(back) == len(lines_fan.cones)
        assert all(cone_equal(a, b) for a, b in zip(back, lines_fan.cones))

    def test_hyperplane_form(self):
        f = fan_from_json({"hyperplanes": [[1, 0], [0, 1]]})
        assert len(f.cones) == 9 and f.completeness == "construction"

    def test_cone_list_is_certified_by_sampling(self, coordinate_fan):
        f = fan_from_json(fan_to_json(coordinate_fan), samples=2000, seed=1)
        assert f.complete and f.completeness == "sampled"

    def test_asserted_completeness(self, coordinate_fan):
        f = fan_from_json(fan_to_json(coordinate_fan), samples=0)
        assert f.completeness == "asserted"

    def test_invalid_cones_rejected(self):
        with pytest.raises(FanInvariantError):
            fan_from_json({"ambient_dim": 2, "cones": [{"generators": [[1, 0], [0, 1]]}]})

    def test_needs_cones(self):
        with pytest.raises(InputError):
            cones_from_json({"ambient_dim": 2})


BUNDLED = ["coordinate-2d", "narrow-wedge", "three-sectors", "three-lines",
           "three-wedges", "two-planes", "octant"]


@pytest.mark.parametrize("name", BUNDLED)
def test_projection_commutes_with_intersection(name):
    """pi(meet of C_i) = meet of pi(C_i) when pi kills the span of the meet."""
    from itertools import combinations

    f = catalog.builtin(name)
    maximal = f.maximal
    for size in range(1, len(maximal) + 1):
        for subset in combinations(maximal, size):
            meet = intersect_all([f.cones[i] for i in subset])
            if meet.dim == 0:
                continue
            P = orthogonal_projector(meet.span_basis, f.ambient_dim)
            lhs = project_cone(meet, P)
            rhs = intersect_all([project_cone(f.cones[i], P) for i in subset])
            assert cone_contains_cone(lhs, rhs, tol=1e-7)
            assert cone_contains_cone(rhs, lhs, tol=1e-7)


@pytest.mark.parametrize("name", BUNDLED)
def test_maximal_cones_determine_the_fan(name):
    f = catalog.builtin(name)
    rebuilt = fan_from_maximal([f.cones[i] for i in f.maximal])
    assert len(rebuilt.cones) == len(f.cones)
    assert {c.key for c in rebuilt.cones} == {c.key for c in f.cones}


def test_project_fan_onto_axis(coordinate_fan):
    projected = project_fan(coordinate_fan, [[1.0, 0.0]])
    q1 = coordinate_fan.index_of(cone_from_generators([[1, 0], [0, 1]], 2))
    assert cone_equal(projected[q1], ray([0.0, 1.0]))
    assert all(c.dim <= 1 for c in projected)


def test_unknown_builtin():
    with pytest.raises(InputError):
        catalog.builtin("nope")
