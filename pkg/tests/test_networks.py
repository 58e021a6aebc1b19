import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings

from conefan.core import catalog
from conefan.core.embeddings import qtdi, tdi
from conefan.core.errors import DomainError, InputError
from conefan.core.inclusions import certify
from conefan.core.models import DeltaVec, Trajectory
from conefan.core.networks import (
    ConstantRates, EGraph, PiecewiseRates, SinusoidalRates, egraph_from_json, egraph_to_json,
    is_endotactic, is_reversible, is_weakly_reversible, mass_action_rhs, network_check,
    parse_rates, persistence_diagnostics, read_trajectory_csv, simulate, stoichiometric_drift,
    trajectory_membership, write_trajectory_csv,
)

from conftest import weakly_reversible_graphs


def graph(vertices, edges, epsilon=1.0) -> EGraph:
    return EGraph(np.array(vertices, dtype=float), tuple(edges), epsilon)


def three_cycle() -> EGraph:
    return graph(np.eye(3), [(0, 1), (1, 2), (2, 0)])


def one_edge() -> EGraph:
    return graph([[0.0], [1.0]], [(0, 1)])


def inflow_outflow() -> EGraph:
    """0 <-> X1."""
    return graph([[0.0], [1.0]], [(0, 1), (1, 0)])


class TestEGraph:
    def test_self_loop_rejected(self):
        with pytest.raises(InputError):
            graph([[0.0], [1.0]], [(0, 0)])

    def test_missing_vertex(self):
        with pytest.raises(InputError):
            graph([[0.0], [1.0]], [(0, 2)])

    def test_epsilon_below_one(self):
        with pytest.raises(InputError):
            graph([[0.0], [1.0]], [(0, 1)], epsilon=0.5)

    def test_stoichiometric_subspace(self):
        g = three_cycle()
        assert g.stoich_basis.shape == (2, 3)
        np.testing.assert_allclose(g.stoich_basis @ np.ones(3), 0.0, atol=1e-12)

    def test_json_round_trip(self):
        g = three_cycle()
        back = egraph_from_json(egraph_to_json(g))
        np.testing.assert_array_equal(back.vertices, g.vertices)
        assert back.edges == g.edges

    @pytest.mark.parametrize("obj", [
        {"vertices": [], "edges": []},
        {"vertices": [[0, 1], [1]], "edges": []},
        {"vertices": [[0], [1]], "edges": [[0, 1, 2]]},
        {"edges": []},
    ])
    def test_bad_json(self, obj):
        with pytest.raises(InputError):
            egraph_from_json(obj)


class TestStructure:
    def test_three_cycle(self):
        g = three_cycle()
        assert is_weakly_reversible(g)
        assert not is_reversible(g)
        result = is_endotactic(g)
        assert result.endotactic and result.method == "exact"

    def test_single_irreversible_edge(self):
        g = one_edge()
        assert not is_weakly_reversible(g)
        result = is_endotactic(g)
        assert not result.endotactic
        np.testing.assert_allclose(result.witness, [1.0])

    def test_reversible_pair(self):
        g = inflow_outflow()
        assert is_reversible(g) and is_weakly_reversible(g)
        assert is_endotactic(g).endotactic

    def test_endotactic_but_not_weakly_reversible(self):
        # 2X -> X and 0 -> X: every gain is opposed from higher up
        g = graph([[2.0], [1.0], [0.0]], [(0, 1), (2, 1)])
        assert not is_weakly_reversible(g)
        assert is_endotactic(g).endotactic

    def test_network_check(self):
        check = network_check(three_cycle())
        assert (check.dim, check.n_vertices, check.n_edges, check.stoich_dim) == (3, 3, 3, 2)
        assert check.weakly_reversible and check.endotactic.endotactic

    @settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(weakly_reversible_graphs())
    def test_weakly_reversible_implies_endotactic(self, g):
        assert is_weakly_reversible(g)
        result = is_endotactic(g)
        assert result.endotactic, result.witness


class TestRates:
    def test_constant_broadcast(self):
        k = ConstantRates(2.0, 3)
        np.testing.assert_array_equal(k(0.0), [2.0, 2.0, 2.0])
        assert k.bounds == (2.0, 2.0)

    def test_constant_count_mismatch(self):
        with pytest.raises(InputError):
            ConstantRates([1.0, 2.0], 3)

    def test_nonpositive(self):
        with pytest.raises(InputError):
            ConstantRates([1.0, 0.0], 2)

    def test_sinusoidal_stays_in_bounds(self):
        k = SinusoidalRates(3.0, 4, seed=1)
        values = np.array([k(t) for t in np.linspace(0, 50, 500)])
        assert values.min() >= 1 / 3 - 1e-12 and values.max() <= 3 + 1e-12

    def test_piecewise_is_seeded_and_constant_per_piece(self):
        a, b = PiecewiseRates(2.0, 3, 0.5, seed=4), PiecewiseRates(2.0, 3, 0.5, seed=4)
        np.testing.assert_array_equal(a(0.1), a(0.4))
        np.testing.assert_array_equal(a(1.7), b(1.7))
        values = np.array([a(t) for t in np.arange(0, 20, 0.5)])
        assert values.min() >= 0.5 and values.max() <= 2.0

    def test_parse(self):
        g = three_cycle()
        assert isinstance(parse_rates("1,2,3", g), ConstantRates)
        assert isinstance(parse_rates("sin:2", g), SinusoidalRates)
        assert isinstance(parse_rates("piecewise:2:0.5", g), PiecewiseRates)
        with pytest.raises(InputError):
            parse_rates("fast", g)


class TestDynamics:
    def test_rhs(self):
        g = inflow_outflow()
        np.testing.assert_allclose(mass_action_rhs(g, ConstantRates(1.0, 2), 0.0, [0.5]), [0.5])

    def test_rhs_of_pure_inflow_is_the_rate(self):
        g = graph([[0.0], [1.0]], [(0, 1)])
        np.testing.assert_allclose(mass_action_rhs(g, ConstantRates(2.0, 1), 0.0, [0.7]), [2.0])

    def test_rhs_of_dimerization(self):
        g = graph([[1.0], [2.0]], [(0, 1), (1, 0)])
        np.testing.assert_allclose(mass_action_rhs(g, ConstantRates(1.0, 2), 0.0, [3.0]), [-6.0])

    @settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(weakly_reversible_graphs())
    def test_rhs_lies_in_stoichiometric_subspace(self, g):
        rng = np.random.default_rng(len(g.edges))
        k = ConstantRates(rng.uniform(0.1, 5.0, len(g.edges)), len(g.edges))
        for x in rng.uniform(0.1, 3.0, (20, g.dim)):
            rhs = mass_action_rhs(g, k, 0.0, x)
            off = rhs - rhs @ g.stoich_projector
            assert np.linalg.norm(off) <= 1e-9 * max(1.0, np.linalg.norm(rhs))

    def test_rhs_needs_positive_state(self):
        with pytest.raises(DomainError):
            mass_action_rhs(inflow_outflow(), ConstantRates(1.0, 2), 0.0, [0.0])

    def test_closed_form(self):
        g = inflow_outflow()
        traj = simulate(g, ConstantRates(1.0, 2), [0.5], 10.0)
        assert traj.reason == "horizon"
        assert traj.t[-1] == pytest.approx(10.0)
        assert abs(traj.x[-1, 0] - (1 + (0.5 - 1) * np.exp(-10))) < 1e-6
        assert abs(traj.x[-1, 0] - 1) < 1e-4
        assert stoichiometric_drift(traj, g) < 1e-8

    def test_conservation(self):
        g = graph([[1.0, 0.0], [0.0, 1.0]], [(0, 1), (1, 0)])
        traj = simulate(g, ConstantRates([2.0, 1.0], 2), [0.9, 0.1], 5.0, samples=101)
        assert len(traj) == 101
        assert stoichiometric_drift(traj, g) < 1e-8
        np.testing.assert_allclose(traj.x.sum(axis=1), 1.0, atol=1e-8)

    def test_growth_to_horizon(self):
        traj = simulate(graph([[1.0], [2.0]], [(0, 1)]), ConstantRates(1.0, 1), [1.0], 5.0)
        assert traj.reason == "horizon"
        assert traj.x[-1, 0] == pytest.approx(np.exp(5), rel=1e-6)

    def test_blow_up(self):
        traj = simulate(graph([[1.0], [2.0]], [(0, 1)]), ConstantRates(1.0, 1), [1.0], 40.0)
        assert traj.reason == "blow-up"
        assert traj.horizon == pytest.approx(np.log(1e12), abs=1e-3)

    def test_bad_initial_state(self):
        g = inflow_outflow()
        with pytest.raises(DomainError):
            simulate(g, ConstantRates(1.0, 2), [-1.0], 1.0)
        with pytest.raises(InputError):
            simulate(g, ConstantRates(1.0, 2), [1.0, 1.0], 1.0)

    def test_persistence_diagnostics(self):
        g = inflow_outflow()
        traj = simulate(g, ConstantRates(1.0, 2), [0.5], 10.0, samples=201)
        diag = persistence_diagnostics(traj, g)
        assert diag.tail_min[0] > 0.99
        assert diag.box_hi[0] <= 1.0 + 1e-9
        with pytest.raises(InputError):
            persistence_diagnostics(traj, g, tail_fraction=0.0)


class TestMembership:
    def test_relaxation_stays_in_the_inclusion(self):
        g = inflow_outflow()
        traj = simulate(g, ConstantRates(1.0, 2), [0.5], 10.0, samples=200)
        report = trajectory_membership(traj, catalog.coordinate(1), tdi(1.0))
        assert report.satisfied == report.samples == 200
        assert report.first_violation is None

    def test_violation_is_located(self):
        t = np.linspace(0.0, 1.0, 5)
        x = np.exp(np.full((5, 1), 5.0))
        traj = Trajectory(t, x, np.ones((5, 1)), "file", 1.0)
        report = trajectory_membership(traj, catalog.coordinate(1), tdi(1.0))
        assert report.satisfied == 0
        v = report.first_violation
        assert v.t == 0.0 and v.point == pytest.approx([5.0])

    def test_quasi_toric_spec(self):
        f = catalog.coordinate(1)
        d = certify(f, DeltaVec((1.0,)))
        traj = Trajectory(np.array([0.0]), np.array([[np.e ** 3]]), np.array([[-1.0]]), "file", 0.0)
        report = trajectory_membership(traj, f, qtdi(d))
        assert report.fraction == 1.0

    def test_dimension_mismatch(self):
        traj = Trajectory(np.array([0.0]), np.array([[1.0]]), np.array([[0.0]]), "file", 0.0)
        with pytest.raises(InputError):
            trajectory_membership(traj, catalog.coordinate(2), tdi(1.0))


class TestCsv:
    def test_round_trip(self, tmp_path):
        traj = simulate(inflow_outflow(), ConstantRates(1.0, 2), [0.5], 2.0, samples=11)
        path = tmp_path / "traj.csv"
        write_trajectory_csv(traj, path)
        assert path.read_text().splitlines()[0] == "t,x1,dx1"
        back = read_trajectory_csv(path)
        np.testing.assert_allclose(back.x, traj.x)
        np.testing.assert_allclose(back.dx, traj.dx)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,a\n0,1\n")
        with pytest.raises(InputError):
            read_trajectory_csv(path)
