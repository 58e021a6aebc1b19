"""Reaction networks as Euclidean embedded graphs: structure checks,
mass-action dynamics and trajectory membership in inclusion cones."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from pathlib import Path

import networkx as nx
import numpy as np
import polars as pl
from scipy.integrate import solve_ivp

from conefan.core import config
from conefan.core.cones import span_basis_of
from conefan.core.errors import DomainError, InputError, NumericalError
from conefan.core.fans import Fan
from conefan.core.inclusions import AMBIGUOUS, _require_complete, distance_matrix
from conefan.core.models import (
    EndotacticResult,
    MembershipReport,
    MembershipViolation,
    NetworkCheck,
    PersistenceDiagnostics,
    Trajectory,
)

logger = logging.getLogger(__name__)

RTOL = 1e-8
ATOL = 1e-10
POSITIVITY_FLOOR = 1e-12
BLOW_UP = 1e12
EXACT_ENDOTACTIC_DIM = 3
SAMPLED_DIRECTIONS = 20_000


@dataclass(frozen=True, eq=False)
class EGraph:
    vertices: np.ndarray  # (V, n) complexes
    edges: tuple[tuple[int, int], ...]
    epsilon: float = 1.0

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] < 1:
            raise InputError(f"vertices must be a (V, n) array, got shape {V.shape}")
        object.__setattr__(self, "vertices", V)
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if not (0 <= a < len(V) and 0 <= b < len(V)):
                raise InputError(f"edge ({a}, {b}) refers to a missing vertex")
            if a == b or np.array_equal(V[a], V[b]):
                raise InputError(f"edge ({a}, {b}) is a self-loop")
        object.__setattr__(self, "edges", edges)
        if not self.epsilon >= 1.0:
            raise InputError(f"epsilon must be >= 1, got {self.epsilon}")

    @property
    def dim(self) -> int:
        return int(self.vertices.shape[1])

    @cached_property
    def sources(self) -> np.ndarray:
        return self.vertices[[a for a, _ in self.edges]].reshape(-1, self.dim)

    @cached_property
    def targets(self) -> np.ndarray:
        return self.vertices[[b for _, b in self.edges]].reshape(-1, self.dim)

    @cached_property
    def reaction_vectors(self) -> np.ndarray:
        return self.targets - self.sources

    @cached_property
    def stoich_basis(self) -> np.ndarray:
        """Orthonormal basis of S = span{y' - y}."""
        return span_basis_of(self.reaction_vectors, config.tolerance())

    @cached_property
    def stoich_projector(self) -> np.ndarray:
        return self.stoich_basis.T @ self.stoich_basis

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.vertices)))
        g.add_edges_from(self.edges)
        return g


def egraph_from_json(obj: dict) -> EGraph:
    if not isinstance(obj, dict) or "vertices" not in obj or "edges" not in obj:
        raise InputError('E-graph JSON needs "vertices" and "edges"')
    vertices = obj["vertices"]
    if not isinstance(vertices, list) or not vertices:
        raise InputError('"vertices" must be a nonempty list')
    n = obj.get("dim", len(vertices[0]) if isinstance(vertices[0], list) else None)
    if not isinstance(n, int) or any(not isinstance(v, list) or len(v) != n for v in vertices):
        raise InputError(f"every vertex must be a list of {n} coordinates")
    edges = obj["edges"]
    if any(not isinstance(e, (list, tuple)) or len(e) != 2 for e in edges):
        raise InputError("edges must be [source, target] pairs")
    return EGraph(np.asarray(vertices, dtype=float), tuple(tuple(e) for e in edges),
                  float(obj.get("epsilon", 1.0)))


def egraph_to_json(g: EGraph) -> dict:
    return {"dim": g.dim, "vertices": g.vertices.tolist(),
            "edges": [list(e) for e in g.edges], "epsilon": g.epsilon}


# --- rates ----------------------------------------------------------------------

class RateSpec:
    """Per-edge rate constants as a function of time."""

    bounds: tuple[float, float] = (0.0, np.inf)

    def __call__(self, t: float) -> np.ndarray:
        raise NotImplementedError


class ConstantRates(RateSpec):
    def __init__(self, k, n_edges: int):
        k = np.broadcast_to(np.asarray(k, dtype=float), (n_edges,)).copy() if np.ndim(k) == 0 \
            else np.asarray(k, dtype=float)
        if k.shape != (n_edges,):
            raise InputError(f"expected {n_edges} rate constants, got {k.size}")
        if np.any(k <= 0) or not np.all(np.isfinite(k)):
            raise InputError("rate constants must be positive and finite")
        self.k = k
        self.bounds = (float(k.min()), float(k.max())) if k.size else (1.0, 1.0)

    def __call__(self, t: float) -> np.ndarray:
        return self.k


class SinusoidalRates(RateSpec):
    """k_e(t) = epsilon ** sin(omega_e t + phase_e), which stays in [1/eps, eps]."""

    def __init__(self, epsilon: float, n_edges: int, seed: int | None = None,
                 period: float = 2 * np.pi):
        if not epsilon >= 1.0:
            raise InputError(f"epsilon must be >= 1, got {epsilon}")
        rng = np.random.default_rng(config.current().seed if seed is None else seed)
        self.epsilon = float(epsilon)
        self.omega = (2 * np.pi / period) * rng.uniform(0.5, 1.5, n_edges)
        self.phase = rng.uniform(0.0, 2 * np.pi, n_edges)
        self.bounds = (1.0 / self.epsilon, self.epsilon)

    def __call__(self, t: float) -> np.ndarray:
        return self.epsilon ** np.sin(self.omega * t + self.phase)


class PiecewiseRates(RateSpec):
    """Log-uniform random constants in [1/eps, eps], redrawn every `interval`."""

    def __init__(self, epsilon: float, n_edges: int, interval: float = 1.0,
                 seed: int | None = None):
        if not epsilon >= 1.0:
            raise InputError(f"epsilon must be >= 1, got {epsilon}")
        if not interval > 0:
            raise InputError(f"interval must be positive, got {interval}")
        self.epsilon = float(epsilon)
        self.n_edges = n_edges
        self.interval = float(interval)
        self.seed = config.current().seed if seed is None else seed
        self.bounds = (1.0 / self.epsilon, self.epsilon)

    def __call__(self, t: float) -> np.ndarray:
        piece = int(np.floor(max(t, 0.0) / self.interval))
        rng = np.random.default_rng([self.seed, piece])
        return self.epsilon ** rng.uniform(-1.0, 1.0, self.n_edges)


def parse_rates(text: str, g: EGraph, seed: int | None = None) -> RateSpec:
    """`1,2.5` (constants), `sin` / `sin:eps`, `piecewise` / `piecewise:eps:interval`."""
    kind, _, rest = text.strip().partition(":")
    parts = [p for p in rest.split(":") if p]
    try:
        if kind == "sin":
            return SinusoidalRates(float(parts[0]) if parts else g.epsilon, len(g.edges), seed)
        if kind == "piecewise":
            eps = float(parts[0]) if parts else g.epsilon
            interval = float(parts[1]) if len(parts) > 1 else 1.0
            return PiecewiseRates(eps, len(g.edges), interval, seed)
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse rates {text!r}")
    return ConstantRates(values[0] if len(values) == 1 else values, len(g.edges))


# --- dynamics -------------------------------------------------------------------

def _rhs(g: EGraph, k: RateSpec, t: float, x: np.ndarray) -> np.ndarray:
    if not g.edges:
        return np.zeros(g.dim)
    monomials = np.exp(g.sources @ np.log(x))
    return (k(t) * monomials) @ g.reaction_vectors


def mass_action_rhs(g: EGraph, k: RateSpec, t: float, x) -> np.ndarray:
    """sum over edges of k(t) x^y (y' - y)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.dim,):
        raise InputError(f"x must have {g.dim} components, got shape {x.shape}")
    if np.any(x <= 0):
        raise DomainError(f"concentrations must be strictly positive, got {x.tolist()}")
    return _rhs(g, k, t, x)


def simulate(g: EGraph, k: RateSpec, x0, T: float, samples: int | None = None,
             rtol: float = RTOL, atol: float = ATOL) -> Trajectory:
    """Integrate mass-action dynamics with RK45 until T, the positivity floor
    or the blow-up ceiling, whichever comes first."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (g.dim,):
        raise InputError(f"x0 must have {g.dim} components, got shape {x0.shape}")
    if np.any(x0 <= 0):
        raise DomainError(f"x0 must be strictly positive, got {x0.tolist()}")
    if not T > 0:
        raise InputError(f"horizon must be positive, got {T}")

    def fun(t, x):
        # trial stages may step below zero; evaluate at the floor instead
        return _rhs(g, k, t, np.maximum(x, POSITIVITY_FLOOR * 1e-3))

    def floor(t, x):
        return float(np.min(x)) - POSITIVITY_FLOOR

    def ceiling(t, x):
        return BLOW_UP - float(np.linalg.norm(x))

    floor.terminal = ceiling.terminal = True
    floor.direction = ceiling.direction = -1

    t_eval = None if samples is None else np.linspace(0.0, T, samples)
    sol = solve_ivp(fun, (0.0, T), x0, method="RK45", t_eval=t_eval,
                    events=[floor, ceiling], rtol=rtol, atol=atol)
    t = sol.t
    x = sol.y.T
    if sol.status == 1:
        reason = "positivity-floor" if len(sol.t_events[0]) else "blow-up"
        hit = sol.y_events[0] if len(sol.t_events[0]) else sol.y_events[1]
        t_hit = sol.t_events[0] if len(sol.t_events[0]) else sol.t_events[1]
        if t_eval is not None and (len(t) == 0 or t[-1] < t_hit[0]):
            t = np.append(t, t_hit[0])
            x = np.vstack([x, hit[0]])
    elif sol.status == 0:
        reason = "horizon"
    else:
        partial = Trajectory(t, x, np.array([_rhs(g, k, ti, np.maximum(xi, POSITIVITY_FLOOR))
                                             for ti, xi in zip(t, x)]).reshape(-1, g.dim),
                             "failed", float(t[-1]) if len(t) else 0.0)
        raise NumericalError(f"integration failed: {sol.message}",
                             diagnostics={"t": float(t[-1]) if len(t) else 0.0, "nfev": sol.nfev},
                             partial=partial)
    dx = np.array([_rhs(g, k, ti, np.maximum(xi, POSITIVITY_FLOOR * 1e-3))
                   for ti, xi in zip(t, x)]).reshape(-1, g.dim)
    logger.debug("simulate: %d samples, stopped at t=%.6g (%s)", len(t), t[-1], reason)
    return Trajectory(t=t, x=x, dx=dx, reason=reason, horizon=float(t[-1]))


def stoichiometric_drift(traj: Trajectory, g: EGraph) -> float:
    """max_t distance of x(t) - x(0) from the stoichiometric subspace."""
    delta = traj.x - traj.x[0]
    off = delta - delta @ g.stoich_projector
    return float(np.max(np.linalg.norm(off, axis=1), initial=0.0))


def persistence_diagnostics(traj: Trajectory, g: EGraph, tail_fraction: float = 0.5) -> PersistenceDiagnostics:
    """Tail minima and bounding box; finite-horizon evidence, not a verdict."""
    if not 0 < tail_fraction <= 1:
        raise InputError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    start = traj.t[-1] - tail_fraction * (traj.t[-1] - traj.t[0])
    tail = traj.x[traj.t >= start]
    return PersistenceDiagnostics(
        tail_fraction=tail_fraction,
        tail_min=tail.min(axis=0).tolist(),
        box_lo=tail.min(axis=0).tolist(),
        box_hi=tail.max(axis=0).tolist(),
        drift=stoichiometric_drift(traj, g),
    )


# --- structure ------------------------------------------------------------------

def is_reversible(g: EGraph) -> bool:
    edges = set(g.edges)
    return all((b, a) in edges for a, b in edges)


def is_weakly_reversible(g: EGraph) -> bool:
    """Every edge lies in a strongly connected component (equivalently, on a cycle)."""
    component = {}
    for i, scc in enumerate(nx.strongly_connected_components(g.graph)):
        for v in scc:
            component[v] = i
    return all(component[a] == component[b] for a, b in g.edges)


def _violating(U: np.ndarray, R: np.ndarray, S: np.ndarray, tol: float) -> np.ndarray:
    """Rows u for which some edge gains along u with no opposing edge from a
    source strictly farther along u."""
    UR = U @ R.T
    US = U @ S.T
    scale = tol * np.maximum(1.0, np.abs(US).max(axis=1, initial=1.0))[:, None]
    opposing = UR < -scale
    top = np.where(opposing, US, -np.inf).max(axis=1, initial=-np.inf)
    gaining = UR > scale
    return np.any(gaining & (US >= top[:, None] - scale), axis=1)


def _unique_normals(N: np.ndarray) -> np.ndarray:
    out: list[np.ndarray] = []
    for v in N:
        norm = np.linalg.norm(v)
        if norm <= 1e-12:
            continue
        v = v / norm
        if not any(min(np.linalg.norm(v - w), np.linalg.norm(v + w)) <= 1e-9 for w in out):
            out.append(v)
    return np.array(out).reshape(-1, N.shape[1])


def _circle_points(normals: np.ndarray) -> np.ndarray:
    """One direction per cell of a central line arrangement in the plane."""
    perp = np.column_stack([-normals[:, 1], normals[:, 0]])
    rays = np.vstack([perp, -perp])
    angles = np.sort(np.mod(np.arctan2(rays[:, 1], rays[:, 0]), 2 * np.pi))
    nxt = np.append(angles[1:], angles[0] + 2 * np.pi)
    mids = (angles + nxt) / 2
    both = np.concatenate([angles, mids])
    return np.column_stack([np.cos(both), np.sin(both)])


def _sphere_points(normals: np.ndarray) -> np.ndarray:
    """One direction per cell of a central plane arrangement in R^3: vertices,
    arc midpoints on every great circle, and those midpoints pushed to both sides."""
    points = []
    for a, b in combinations(normals, 2):
        v = np.cross(a, b)
        if np.linalg.norm(v) > 1e-12:
            v /= np.linalg.norm(v)
            points.extend([v, -v])
    for i, a in enumerate(normals):
        # orthonormal frame of the great circle a . u = 0
        e1 = np.linalg.svd(a[None, :])[2][1]
        e2 = np.cross(a, e1)
        others = np.delete(normals, i, axis=0)
        cuts = []
        for b in others:
            v = np.cross(a, b)
            if np.linalg.norm(v) > 1e-12:
                for w in (v, -v):
                    cuts.append(np.arctan2(w @ e2, w @ e1))
        cuts = np.sort(np.mod(cuts, 2 * np.pi)) if cuts else np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
        nxt = np.append(cuts[1:], cuts[0] + 2 * np.pi)
        for mid in (cuts + nxt) / 2:
            m = np.cos(mid) * e1 + np.sin(mid) * e2
            gap = np.min(np.abs(others @ m)) if len(others) else 1.0
            push = 0.5 * min(gap, 1.0)
            points.extend([m, m + push * a, m - push * a])
    return np.array(points).reshape(-1, 3)


def is_endotactic(g: EGraph, seed: int | None = None) -> EndotacticResult:
    """Check that every direction gaining along some reaction is opposed by a
    reaction from a source strictly farther along that direction.

    The predicate only changes across the hyperplanes u . (y' - y) = 0 and
    u . (s - s~) = 0 (s, s~ sources), so it is tested on one direction per
    cell of that arrangement. Exact when the arrangement's span has
    dimension <= 3; sampled otherwise.
    """
    if not g.edges:
        return EndotacticResult(True, "exact", 0)
    tol = max(config.tolerance(), 1e-12)
    R, S = g.reaction_vectors, g.sources
    uniq_src = np.unique(S, axis=0)
    diffs = np.array([a - b for a, b in combinations(uniq_src, 2)]).reshape(-1, g.dim)
    normals = np.vstack([R, diffs])
    basis = span_basis_of(normals, tol)
    r = basis.shape[0]
    coords = _unique_normals(normals @ basis.T)

    if r == 1:
        local = np.array([[1.0], [-1.0]])
        method = "exact"
    elif r == 2:
        local = _circle_points(coords)
        method = "exact"
    elif r == 3:
        local = _sphere_points(coords)
        method = "exact"
    else:
        rng = np.random.default_rng(config.current().seed if seed is None else seed)
        local = rng.standard_normal((SAMPLED_DIRECTIONS, r))
        method = "sampled"
        logger.warning("endotactic check in dimension %d is sampled over %d directions",
                       r, SAMPLED_DIRECTIONS)
    U = np.vstack([R, local @ basis])
    bad = _violating(U, R, S, tol)
    if bad.any():
        u = U[int(np.argmax(bad))]
        return EndotacticResult(False, method, len(U), (u / np.linalg.norm(u)).tolist())
    return EndotacticResult(True, method, len(U))


def network_check(g: EGraph, seed: int | None = None) -> NetworkCheck:
    return NetworkCheck(
        dim=g.dim,
        n_vertices=len(g.vertices),
        n_edges=len(g.edges),
        stoich_dim=int(g.stoich_basis.shape[0]),
        reversible=is_reversible(g),
        weakly_reversible=is_weakly_reversible(g),
        endotactic=is_endotactic(g, seed),
    )


# --- membership -----------------------------------------------------------------

def trajectory_membership(traj: Trajectory, f: Fan, spec) -> MembershipReport:
    """Check dx/dt(t_j) in F(log x(t_j)) for every sample.

    `spec` is an `InclusionSpec`. Membership in the polar C° is u . g <= 0
    for every generator g of C.
    """
    _require_complete(f)
    if traj.dim != f.ambient_dim:
        raise InputError(f"trajectory has {traj.dim} species but the fan lives in R^{f.ambient_dim}")
    if np.any(traj.x <= 0):
        raise DomainError("trajectory states must be strictly positive")
    X = np.log(traj.x)
    idx, steps = spec.select(f, distance_matrix(f, X), X)
    tol = config.tolerance()
    ok = np.zeros(len(X), dtype=bool)
    for j in np.unique(idx[idx != AMBIGUOUS]):
        rows = idx == j
        gens = f.cones[j].generators
        if len(gens) == 0:
            ok[rows] = True
            continue
        scale = tol * np.maximum(1.0, np.linalg.norm(traj.dx[rows], axis=1))
        ok[rows] = np.all(traj.dx[rows] @ gens.T <= scale[:, None], axis=1)
    report = MembershipReport(spec=spec.label, samples=len(X), satisfied=int(ok.sum()),
                              ambiguous=int(np.sum(idx == AMBIGUOUS)))
    if not ok.all():
        p = int(np.argmax(~ok))
        report.first_violation = MembershipViolation(
            t=float(traj.t[p]), point=X[p].tolist(), derivative=traj.dx[p].tolist(),
            cone_index=int(idx[p]), step=int(steps[p]))
    return report


# --- trajectory CSV -------------------------------------------------------------

def trajectory_frame(traj: Trajectory) -> pl.DataFrame:
    n = traj.dim
    data = {"t": traj.t}
    data.update({f"x{i + 1}": traj.x[:, i] for i in range(n)})
    data.update({f"dx{i + 1}": traj.dx[:, i] for i in range(n)})
    return pl.DataFrame(data)


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    trajectory_frame(traj).write_csv(path)


def read_trajectory_csv(path: str | Path) -> Trajectory:
    """Load `t,x1..xn,dx1..dxn`; the termination reason is recorded as `file`."""
    try:
        df = pl.read_csv(path)
    except (OSError, pl.exceptions.PolarsError) as e:
        raise InputError(f"cannot read trajectory CSV {path}: {e}")
    cols = df.columns
    n = (len(cols) - 1) // 2
    expected = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"dx{i + 1}" for i in range(n)]
    if n < 1 or cols != expected:
        raise InputError(f"trajectory CSV header must be {','.join(expected) or 't,x1,...,dx1,...'}, "
                         f"got {','.join(cols)}")
    arr = df.select(expected).to_numpy().astype(float)
    return Trajectory(t=arr[:, 0], x=arr[:, 1:n + 1], dx=arr[:, n + 1:], reason="file",
                      horizon=float(arr[-1, 0]) if len(arr) else 0.0)
