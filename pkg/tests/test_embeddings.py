import time

import numpy as np
import pytest

from conefan.core import catalog
from conefan.core.cones import cone_from_generators
from conefan.core.errors import InputError, PreconditionError
from conefan.core.embeddings import (
    alpha_subsets, embed_qtdi_in_tdi, embed_tdi_in_qtdi, global_alpha, inflate_d, parse_spec,
    qtdi, round_trip, sample_points, tdi, verify_embedding,
)
from conefan.core.fans import fan_from_maximal
from conefan.core.inclusions import check_well_defined
from conefan.core.models import DeltaVec

SQRT2 = np.sqrt(2.0)

CONTAINMENT_FANS = ["coordinate-2d", "narrow-wedge", "two-planes"]


class TestGlobalAlpha:
    def test_coordinate_fan(self, coordinate_fan):
        ga = global_alpha(coordinate_fan)
        assert ga.alpha == pytest.approx(SQRT2, abs=1e-6)
        assert ga.method == "exact-low-dim"
        assert not ga.capped

    def test_three_lines(self, lines_fan):
        # adjacent rays are 60 degrees apart
        assert global_alpha(lines_fan).alpha == pytest.approx(2.0, abs=1e-6)

    def test_two_planes_match_their_cross_section(self, planes_fan):
        # every cone contains the z-axis, so the fan is two lines at 45 degrees times R
        ga = global_alpha(planes_fan)
        assert ga.method == "exact-low-dim"
        assert ga.alpha == pytest.approx(global_alpha(catalog.narrow_wedge(45.0)).alpha, rel=1e-6)
        assert ga.alpha == pytest.approx(1 / np.sin(np.radians(22.5)), rel=1e-6)

    def test_subsets_skip_nested_pairs(self, coordinate_fan):
        subsets, capped = alpha_subsets(coordinate_fan)
        M = coordinate_fan.containment
        assert not capped
        for s in subsets:
            if len(s) == 2:
                i, j = s
                assert not (M[i, j] or M[j, i])
        # all 11 subsets of the four quadrants with two or more members are present
        assert sum(1 for s in subsets if set(s) <= set(coordinate_fan.maximal)) == 11


class TestConstruction:
    @pytest.mark.parametrize("delta", [1.0, 2.0])
    def test_coordinate_thresholds(self, coordinate_fan, delta):
        d = embed_tdi_in_qtdi(coordinate_fan, delta)
        assert d.certified
        np.testing.assert_allclose(d.d, [SQRT2 * delta, delta], rtol=1e-6)

    def test_qtdi_to_tdi_is_max(self):
        assert embed_qtdi_in_tdi(DeltaVec((3.0, 1.0))) == 3.0

    def test_round_trip(self, coordinate_fan):
        d, delta = round_trip(coordinate_fan, 1.0)
        assert delta == pytest.approx(SQRT2, rel=1e-6)
        assert delta == max(d.d)

    def test_inflate_fixes_the_narrow_wedge(self, wedge_fan):
        given = DeltaVec((1.0, 1.0))
        assert check_well_defined(wedge_fan, given).status == "refuted"
        inflated = inflate_d(wedge_fan, given)
        assert inflated.certified
        assert all(a >= b for a, b in zip(inflated.d, given.d))
        assert inflated.d[0] == pytest.approx(1 / np.sin(np.radians(5)), rel=1e-6)
        assert inflate_d(wedge_fan, given).d == inflated.d

    def test_nonpositive_delta(self, coordinate_fan):
        with pytest.raises(InputError):
            embed_tdi_in_qtdi(coordinate_fan, -1.0)

    def test_incomplete_fan(self):
        f = fan_from_maximal([cone_from_generators([[1, 0], [0, 1]], 2)])
        with pytest.raises(PreconditionError):
            embed_tdi_in_qtdi(f, 1.0)


class TestSpecs:
    def test_parse(self):
        assert parse_spec("tdi:1.5") == tdi(1.5)
        spec = parse_spec("qtdi:1.4142135623730951,1")
        assert spec.kind == "qtdi" and spec.d.d == (SQRT2, 1.0)
        assert spec.label == "qtdi:1.4142135623730951,1.0"

    @pytest.mark.parametrize("text", ["foo:1", "tdi", "tdi:1,2", "qtdi:a,b", "tdi:-1"])
    def test_rejects(self, text):
        with pytest.raises(InputError):
            parse_spec(text)


class TestVerify:
    @pytest.mark.parametrize("name", CONTAINMENT_FANS)
    def test_tdi_inside_qtdi(self, name):
        f = catalog.builtin(name)
        start = time.perf_counter()
        d = embed_tdi_in_qtdi(f, 1.0)
        report = verify_embedding(f, tdi(1.0), qtdi(d), n_samples=10_000, seed=7)
        assert time.perf_counter() - start < 60
        assert report.violations == 0
        assert report.ambiguous == 0
        assert report.ok

    @pytest.mark.parametrize("name", CONTAINMENT_FANS)
    def test_qtdi_inside_tdi_at_max(self, name):
        f = catalog.builtin(name)
        d = embed_tdi_in_qtdi(f, 1.0)
        report = verify_embedding(f, qtdi(d), tdi(embed_qtdi_in_tdi(d)), n_samples=10_000, seed=7)
        assert report.ok

    def test_too_small_outer_delta_is_caught(self, coordinate_fan):
        d = embed_tdi_in_qtdi(coordinate_fan, 1.0)
        report = verify_embedding(coordinate_fan, qtdi(d), tdi(1.0), n_samples=2_000, seed=7)
        assert report.violations > 0
        assert report.witnesses
        w = report.witnesses[0]
        assert not coordinate_fan.containment[w.outer_index, w.inner_index]

    def test_seeded_reports_are_identical(self, lines_fan):
        d = embed_tdi_in_qtdi(lines_fan, 1.0)
        a = verify_embedding(lines_fan, tdi(1.0), qtdi(d), n_samples=1_000, seed=3)
        b = verify_embedding(lines_fan, tdi(1.0), qtdi(d), n_samples=1_000, seed=3)
        assert a == b

    def test_default_radius(self, coordinate_fan):
        report = verify_embedding(coordinate_fan, tdi(1.0), tdi(2.0), n_samples=100, seed=0)
        assert report.radius == 20.0

    def test_structured_points_cover_every_cone(self, coordinate_fan):
        rng = np.random.default_rng(0)
        P = sample_points(coordinate_fan, (1.0,), 10, 5.0, rng)
        # 8 seeds per cone, 4 perturbation scales, one threshold
        assert len(P) == 10 + len(coordinate_fan.cones) * 8 * 4
