import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from scipy.optimize import minimize

from conefan.core.cones import (
    cone_contains_cone, cone_equal, cone_from_generators, cone_from_halfspaces,
    cone_from_json, cone_to_json, halfspace_representation, intersect_cones, nnls, project_point,
    ray, whole_space, zero_cone,
)
from conefan.core.errors import InputError

from conftest import points, random_cones

SQRT2 = np.sqrt(2.0)


def quadrant():
    return cone_from_generators([[1, 0], [0, 1]], 2)


class TestConstruction:
    def test_redundant_generators_are_dropped(self):
        c = cone_from_generators([[1, 0], [0, 1], [1, 1], [2, 0]], 2)
        assert c.dim == 2
        assert len(c.generators) == 2

    def test_zero_rays_ignored(self):
        c = cone_from_generators([[0, 0], [1, 0]], 2)
        assert c.dim == 1
        assert c.is_pointed

    def test_zero_cone(self):
        z = zero_cone(3)
        assert z.is_zero
        assert z.contains_point([0, 0, 0])
        assert not z.contains_point([1e-3, 0, 0])

    def test_halfplane_has_lineality(self):
        c = cone_from_generators([[1, 0], [-1, 0], [0, 1]], 2)
        assert c.dim == 2
        assert c.lineality_dim == 1
        assert not c.is_pointed
        assert len(c.halfspaces) == 1
        np.testing.assert_allclose(c.halfspaces[0], [0, -1], atol=1e-12)

    def test_halfspaces_round_trip(self):
        c = cone_from_halfspaces([[-1, 0], [0, -1]], 2)
        assert cone_equal(c, quadrant())

    def test_halfspaces_with_equalities(self):
        c = cone_from_halfspaces([[-1, 0, 0]], 3, equalities=[[0, 0, 1]])
        assert c.dim == 2
        assert c.contains_point([1, 5, 0])
        assert not c.contains_point([1, 5, 0.1])
        assert not c.contains_point([-1, 0, 0])

    def test_wrong_ray_length(self):
        with pytest.raises(InputError):
            cone_from_generators([[1, 0, 0]], 2)

    def test_nonfinite_rays(self):
        with pytest.raises(InputError):
            cone_from_generators([[np.inf, 0]], 2)

    def test_json_codec(self):
        c = cone_from_generators([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 3)
        assert cone_equal(cone_from_json(cone_to_json(c)), c)

    def test_json_needs_generators(self):
        with pytest.raises(InputError):
            cone_from_json({"ambient_dim": 2})


class TestPolar:
    def test_quadrant_polar_is_opposite_quadrant(self):
        assert cone_equal(quadrant().polar, cone_from_generators([[-1, 0], [0, -1]], 2))

    def test_whole_space_and_zero_are_dual(self):
        assert cone_equal(whole_space(3).polar, zero_cone(3))
        assert cone_equal(zero_cone(3).polar, whole_space(3))

    def test_ray_polar_is_halfplane(self):
        p = ray([1, 0]).polar
        assert p.dim == 2
        assert p.lineality_dim == 1
        assert p.contains_point([-1, 7])
        assert not p.contains_point([0.1, 0])

    @settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(random_cones())
    def test_polar_is_an_involution(self, c):
        back = c.polar.polar
        assert cone_contains_cone(back, c, tol=1e-7)
        assert cone_contains_cone(c, back, tol=1e-7)

    @settings(max_examples=100, deadline=None)
    @given(random_cones())
    def test_generators_pair_nonpositively_with_polar(self, c):
        p = c.polar
        if len(c.generators) and len(p.generators):
            assert np.all(c.generators @ p.generators.T <= 1e-8)


class TestFaces:
    def test_quadrant_faces(self):
        c = quadrant()
        assert len(c.faces(2)) == 1
        assert len(c.faces(1)) == 2
        assert len(c.faces(0)) == 1
        assert c.faces(0)[0].is_zero

    def test_octant_face_counts(self):
        c = cone_from_generators(np.eye(3), 3)
        assert [len(c.faces(k)) for k in range(4)] == [1, 3, 3, 1]

    def test_square_pyramid_has_four_facets(self):
        c = cone_from_generators([[1, 1, 1], [1, -1, 1], [-1, -1, 1], [-1, 1, 1]], 3)
        assert len(c.facets()) == 4
        assert len(c.faces(1)) == 4

    def test_halfplane_faces_start_at_lineality(self):
        c = cone_from_generators([[1, 0], [-1, 0], [0, 1]], 2)
        assert len(c.faces(1)) == 1
        assert c.faces(0) == []

    def test_out_of_range(self):
        with pytest.raises(InputError):
            quadrant().faces(3)

    def test_intersection_is_common_face(self):
        a = quadrant()
        b = cone_from_generators([[0, 1], [-1, 0]], 2)
        meet = intersect_cones(a, b)
        assert cone_equal(meet, ray([0, 1]))
        assert a.is_face(meet) and b.is_face(meet)


class TestProjection:
    def test_known_projection(self):
        res = project_point(quadrant(), [-1.0, 2.0])
        np.testing.assert_allclose(res.nearest_point, [0.0, 2.0], atol=1e-10)
        assert res.distance == pytest.approx(1.0)
        assert res.active_face_dim == 1

    def test_inside_point_is_fixed(self):
        res = project_point(quadrant(), [1.0, 2.0])
        assert res.distance == pytest.approx(0.0, abs=1e-12)
        assert res.active_face_dim == 2

    def test_opposite_point_goes_to_apex(self):
        res = project_point(quadrant(), [-3.0, -4.0])
        assert res.distance == pytest.approx(5.0)
        assert res.active_face_dim == 0

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            project_point(quadrant(), [1.0, 2.0, 3.0])

    def test_nnls_matches_least_squares_when_unconstrained(self):
        A = np.eye(3)
        x, residual = nnls(A, np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(x, [1, 2, 3])
        assert residual == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(50))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 4))
        G = rng.standard_normal((int(rng.integers(1, 7)), n))
        c = cone_from_generators(G, n)
        x = rng.standard_normal(n) * 3

        # random nonnegative combinations, a third of them on random faces
        lam = rng.exponential(size=(100_000, len(G)))
        lam[rng.random(lam.shape) < 0.33] = 0.0
        samples = lam @ G
        samples *= rng.exponential(size=(len(samples), 1))
        best = np.linalg.norm(samples - x, axis=1).argmin()
        start = np.linalg.lstsq(G.T, samples[best], rcond=None)[0].clip(min=0)
        polish = minimize(lambda w: np.sum((G.T @ w - x) ** 2), start,
                          bounds=[(0, None)] * len(G), method="L-BFGS-B",
                          options={"ftol": 1e-15, "gtol": 1e-12})
        brute = min(np.linalg.norm(samples[best] - x), np.sqrt(polish.fun), np.linalg.norm(x))

        assert project_point(c, x).distance == pytest.approx(brute, abs=1e-4)

    @settings(max_examples=200, deadline=None)
    @given(random_cones(), st.data())
    def test_distances_agree_with_projection(self, c, data):
        x = data.draw(points(c.ambient_dim))
        assert c.distance(x) == pytest.approx(project_point(c, x).distance, abs=1e-7)

    @settings(max_examples=200, deadline=None)
    @given(random_cones(), st.data())
    def test_distance_is_one_lipschitz(self, c, data):
        x = data.draw(points(c.ambient_dim))
        y = data.draw(points(c.ambient_dim))
        assert abs(c.distance(x) - c.distance(y)) <= np.linalg.norm(x - y) + 1e-9

    @settings(max_examples=100, deadline=None)
    @given(random_cones(), st.integers(min_value=0, max_value=2**31 - 1))
    def test_nearest_point_beats_every_cone_point(self, c, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(c.ambient_dim) * 3
        Y = rng.exponential(size=(1000, len(c.generators))) @ c.generators
        nearest = project_point(c, x).nearest_point
        assert np.all(np.linalg.norm(x - nearest) <= np.linalg.norm(Y - x, axis=1) + 1e-9)


class TestContainment:
    def test_equal_with_different_generators(self):
        a = cone_from_generators([[1, 0], [0, 1]], 2)
        b = cone_from_generators([[2, 0], [0, 3], [1, 1]], 2)
        assert cone_equal(a, b)
        assert a.key == b.key

    def test_face_contained_in_cone(self):
        assert cone_contains_cone(quadrant(), ray([1, 0]))
        assert not cone_contains_cone(ray([1, 0]), quadrant())

    def test_tolerance_on_boundary(self):
        assert quadrant().contains_point([1.0, -1e-12])
        assert not quadrant().contains_point([1.0, -1e-6])

    def test_ambient_mismatch(self):
        with pytest.raises(InputError):
            cone_contains_cone(quadrant(), ray([1, 0, 0]))

    @pytest.mark.parametrize("seed", range(4))
    def test_facets_agree_with_nonnegative_combinations(self, seed):
        rng = np.random.default_rng(seed)
        c = cone_from_generators(rng.standard_normal((int(rng.integers(1, 6)), 3)), 3)
        normals = np.array(halfspace_representation(c)).reshape(-1, 3)
        X = rng.standard_normal((10_000, 3)) * 2
        X[::2] = X[::2] @ c.projector
        tol = 1e-7
        scale = np.maximum(1.0, np.linalg.norm(X, axis=1))
        in_span = np.linalg.norm(X - X @ c.projector, axis=1) <= tol * scale
        by_facets = in_span & np.all(X @ normals.T <= tol * scale[:, None], axis=1)
        by_combination = np.array([nnls(c.generators.T, x)[1] <= tol * s
                                   for x, s in zip(X, scale)])
        assert np.array_equal(by_facets, by_combination)
