"""Worst-case distance to an intersection cone over intersecting tubes.

For a target cone T (an intersection of fan cones) and constraint cones C_i
with weights w_i, every quantity of the form

    sup { dist(X, T) : w_i * dist(X, C_i) <= 1 for all i }

is, by positive homogeneity of cone distances, the supremum over unit
directions u of the ratio

    dist(u, T) / max_i w_i * dist(u, C_i).

A weight of +inf is a membership constraint (X must lie in C_i).

On the circle the sup is found by splitting at every angle where some
distance changes formula. On the 2-sphere each cone distance is the norm of
a residual projection inside the nearest-face region of one face, so the
ratio is piecewise a quotient of quadratic forms. Its maximizer is then a
stationary point of one quotient, a point on a region wall (a great circle),
or a point where two denominators tie (a quadric curve). Every candidate set
is enumerated and maximized in one variable. Above dimension three the sup
is estimated by random multistart and reported with a safety factor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eig, null_space
from scipy.optimize import minimize, minimize_scalar

from conefan.core import config
from conefan.core.cones import Cone, cone_from_generators, cone_from_halfspaces, intersect_cones
from conefan.core.errors import InputError

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 1.25
MEMBER_TOL = 1e-9
FLAT_TOL = 1e-10
DEN_FLOOR = 1e-7  # below this the ratio is membership-tolerance noise

CIRCLE_GRID = 65
ARC_GRID = 17
CURVE_GRID = 128
CURVE_PEAKS = 3
REFINE_PEAKS = 8
REFINE_BAND = 0.01
MAX_REFINE = 24
SAMPLED_DIRECTIONS = 10_000
SAMPLED_REFINE = 8

Curve = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TubeSup:
    value: float
    direction: np.ndarray | None  # maximizing unit direction
    point: np.ndarray | None  # the same direction rescaled onto the tube boundary
    method: str  # exact-low-dim, sampled
    samples: int
    restarts: int

class _Ratio:
    def __init__(self, target: Cone, cones: Sequence[Cone], weights: Sequence[float]):
        if len(cones) != len(weights):
            raise InputError("one weight per constraint cone is required")
        self.target = target
        self.soft = [(c, float(w)) for c, w in zip(cones, weights) if np.isfinite(w)]
        self.hard = [c for c, w in zip(cones, weights) if not np.isfinite(w)]

    def denominator(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        feasible = np.ones(len(U), dtype=bool)
        for c in self.hard:
            feasible &= c.distances(U) <= MEMBER_TOL
        den = np.zeros(len(U))
        for c, w in self.soft:
            den = np.maximum(den, w * c.distances(U))
        return den, feasible

    def __call__(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(U)
        norms = np.linalg.norm(U, axis=1, keepdims=True)
        U = U / np.where(norms > 0, norms, 1.0)
        num = self.target.distances(U)
        den, feasible = self.denominator(U)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > DEN_FLOOR, num / den, 0.0)
        # directions outside a membership cone are infeasible
        r = np.where(feasible, r, 0.0)
        return r

    def scalar(self, u: np.ndarray) -> float:
        return float(self(u[None, :])[0])

    def cones(self) -> list[Cone]:
        return [self.target, *self.hard, *(c for c, _ in self.soft)]


def _finish(ratio: _Ratio, value: float, u: np.ndarray | None, method: str,
            samples: int, restarts: int) -> TubeSup:
    if u is None or value <= 0.0:
        return TubeSup(0.0, None, None, method, samples, restarts)
    u = u / np.linalg.norm(u)
    den, _ = ratio.denominator(u[None, :])
    point = u / den[0] if den[0] > FLAT_TOL else u
    return TubeSup(float(value), u, point, method, samples, restarts)


# --- ambient dimension 1 and 2 -------------------------------------------------

def _critical_angles(cones: Sequence[Cone]) -> np.ndarray:
    """Angles where some distance function on the circle changes formula."""
    angles = [0.0]
    for c in cones:
        for g in np.vstack([c.generators, c.halfspaces]):
            phi = float(np.arctan2(g[1], g[0]))
            angles.extend([phi, phi + np.pi / 2, phi - np.pi / 2, phi + np.pi])
    return np.unique(np.round(np.mod(angles, 2 * np.pi), 14))


def _circle_sup(ratio: _Ratio) -> TubeSup:
    def on_circle(thetas):
        thetas = np.atleast_1d(thetas)
        return ratio(np.column_stack([np.cos(thetas), np.sin(thetas)]))

    cuts = np.append(_critical_angles(ratio.cones()), 2 * np.pi)
    best_val, best_theta = -1.0, None
    samples = restarts = 0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-12:
            continue
        grid = np.linspace(a, b, CIRCLE_GRID)
        vals = on_circle(grid)
        samples += len(grid)
        i_best = int(np.argmax(vals))
        if vals[i_best] > best_val:
            best_val, best_theta = float(vals[i_best]), float(grid[i_best])
        # local maxima of the grid bracket every interior maximizer
        peaks = [i for i in range(len(grid))
                 if vals[i] >= vals[max(i - 1, 0)] and vals[i] >= vals[min(i + 1, len(grid) - 1)]
                 and vals[i] > 0]
        for i in sorted(peaks, key=lambda i: -vals[i])[:3]:
            lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
            res = minimize_scalar(lambda t: -float(on_circle(t)[0]), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-12})
            restarts += 1
            if -res.fun > best_val:
                best_val, best_theta = float(-res.fun), float(res.x)
    u = None if best_theta is None else np.array([np.cos(best_theta), np.sin(best_theta)])
    return _finish(ratio, best_val, u, "exact-low-dim", samples, restarts)


def _line_sup(ratio: _Ratio) -> TubeSup:
    U = np.array([[1.0], [-1.0]])
    vals = ratio(U)
    i = int(np.argmax(vals))
    return _finish(ratio, float(vals[i]), U[i], "exact-low-dim", 2, 0)


# --- ambient dimension 3 -------------------------------------------------------

@lru_cache(maxsize=1024)
def _face_regions(c: Cone) -> tuple[tuple[np.ndarray, Cone], ...]:
    """(I - P_F, F + N_F) for every face F of c.

    N_F is the normal cone of c at F. On F + N_F the nearest point of c lies
    in F, so dist(u, c) = |(I - P_F) u| there.
    """
    n = c.ambient_dim
    eye = np.eye(n)
    out = []
    for k in range(c.dim + 1):
        for face in c.faces(k):
            orth = cone_from_halfspaces(np.zeros((0, n)), n, equalities=face.span_basis)
            normal = intersect_cones(c.polar, orth)
            region = cone_from_generators(np.vstack([face.generators, normal.generators]), n)
            out.append((eye - face.projector, region))
    return tuple(out)


def _unique_directions(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Unit representatives of the lines through `vectors`, one per line."""
    V = np.array(vectors, dtype=float).reshape(-1, 3)
    norms = np.linalg.norm(V, axis=1)
    V = V[norms > FLAT_TOL] / norms[norms > FLAT_TOL, None]
    if not len(V):
        return V
    lead = np.argmax(np.abs(V) > 1e-9, axis=1)
    V = V * np.sign(V[np.arange(len(V)), lead])[:, None]
    _, keep = np.unique(np.round(V, 9), axis=0, return_index=True)
    return V[np.sort(keep)]


def _wall_normals(ratio: _Ratio, regions: Sequence[Cone]) -> np.ndarray:
    normals = []
    for r in regions:
        walls = r.faces(2) if r.dim == 3 else [r] if r.dim == 2 else []
        normals.extend(np.cross(*w.span_basis) for w in walls)
    # a planar membership cone confines u to its own plane
    normals.extend(c.complement[0] for c in ratio.cones() if c.dim == 2)
    return _unique_directions(normals)


def _great_circle(e1: np.ndarray, e2: np.ndarray) -> Curve:
    return lambda ts: np.outer(np.cos(ts), e1) + np.outer(np.sin(ts), e2)


def _wall_circle(m: np.ndarray, others: np.ndarray) -> tuple[Curve, np.ndarray]:
    """The great circle orthogonal to m, sampled on every arc between walls."""
    e1, e2 = null_space(m[None, :]).T
    crossings = np.cross(m, others)
    crossings = crossings[np.linalg.norm(crossings, axis=1) > FLAT_TOL]
    phi = np.arctan2(crossings @ e2, crossings @ e1)
    cuts = np.unique(np.round(np.mod(np.concatenate([[0.0], phi, phi + np.pi]), 2 * np.pi), 14))
    cuts = np.append(cuts, 2 * np.pi)
    ts = np.concatenate([np.linspace(a, b, ARC_GRID, endpoint=False)
                         for a, b in zip(cuts[:-1], cuts[1:]) if b - a > 1e-12])
    return _great_circle(e1, e2), ts


def _tie_curves(A: np.ndarray) -> tuple[list[Curve], np.ndarray]:
    """{u : u.A.u = 0} on the unit sphere for symmetric A.

    Returned as parametrized branches plus isolated directions.
    """
    lam, V = np.linalg.eigh(A)
    tol = 1e-9 * max(1.0, float(np.abs(lam).max()))
    if np.all(np.abs(lam) <= tol):
        return [], np.zeros((0, 3))
    if lam[1] < -tol:
        lam, V = -lam[::-1], V[:, ::-1]
    c = -lam[0]
    if c <= tol:
        # semidefinite: the zero set is the null space of A
        null = V[:, np.abs(lam) <= tol]
        if null.shape[1] == 2:
            return [_great_circle(null[:, 0], null[:, 1])], np.zeros((0, 3))
        return [], np.vstack([null.T, -null.T])
    a, b = max(lam[1], 0.0), max(lam[2], 0.0)
    ez, ea, eb = V[:, 0], V[:, 1], V[:, 2]

    def branch(sign: float) -> Curve:
        def curve(ts):
            cos, sin = np.cos(ts), np.sin(ts)
            lift = sign * np.sqrt((a * cos ** 2 + b * sin ** 2) / c)
            return np.outer(cos, ea) + np.outer(sin, eb) + np.outer(lift, ez)
        return curve

    return [branch(1.0), branch(-1.0)], np.zeros((0, 3))


def _stationary_directions(N: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Directions where u.N.u / u.D.u is stationary on the sphere.

    These are generalized eigenvectors of (N, D) after removing the common
    null space, along which both forms vanish.
    """
    common = null_space(np.vstack([N, D]))
    W = np.eye(len(N)) if common.shape[1] == 0 else null_space(common.T)
    if W.shape[1] == 0:
        return np.zeros((0, len(N)))
    lam, vecs = eig(W.T @ N @ W, W.T @ D @ W)
    keep = np.isfinite(lam)
    return (W @ vecs[:, keep].real).T


class _Search:
    """Best ratio value over candidate directions and 1D curves."""

    def __init__(self, ratio: _Ratio):
        self.ratio = ratio
        self.value = 0.0
        self.direction: np.ndarray | None = None
        self.samples = 0
        self.brackets: list[tuple[float, Curve, float, float]] = []

    def points(self, U: np.ndarray) -> np.ndarray:
        if not len(U):
            return np.zeros(0)
        vals = self.ratio(U)
        self.samples += len(U)
        i = int(np.argmax(vals))
        if vals[i] > self.value:
            self.value, self.direction = float(vals[i]), U[i]
        return vals

    def curve(self, curve: Curve, ts: np.ndarray) -> None:
        """Sample a closed curve on `ts` (increasing, within one period) and
        queue brackets around its local maxima."""
        vals = self.points(curve(ts))
        peaks = np.flatnonzero((vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1)) & (vals > 0))
        lo, hi = np.roll(ts, 1), np.roll(ts, -1)
        lo[0] -= 2 * np.pi
        hi[-1] += 2 * np.pi
        for i in sorted(peaks, key=lambda i: -vals[i])[:CURVE_PEAKS]:
            self.brackets.append((float(vals[i]), curve, float(lo[i]), float(hi[i])))

    def refine(self) -> int:
        if not self.brackets:
            return 0
        ranked = sorted(self.brackets, key=lambda b: -b[0])
        cutoff = (1.0 - REFINE_BAND) * ranked[0][0]
        chosen = ranked[:REFINE_PEAKS] + [b for b in ranked[REFINE_PEAKS:] if b[0] >= cutoff]
        for _, curve, lo, hi in chosen[:MAX_REFINE]:
            res = minimize_scalar(lambda t: -self.ratio.scalar(curve(np.array([t]))[0]),
                                  bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            if -res.fun > self.value:
                self.value, self.direction = float(-res.fun), curve(np.array([res.x]))[0]
        return min(len(chosen), MAX_REFINE)


def _sphere_sup(ratio: _Ratio) -> TubeSup:
    target = _face_regions(ratio.target)
    soft = [[(w * w * Q, r) for Q, r in _face_regions(c)] for c, w in ratio.soft]
    hard = [r for c in ratio.hard for _, r in _face_regions(c)]
    regions = [r for _, r in target] + [r for forms in soft for _, r in forms] + hard

    search = _Search(ratio)
    gens = [r.generators for r in regions if len(r.generators)]
    if gens:
        search.points(np.vstack(gens))

    normals = _wall_normals(ratio, regions)
    for m in normals:
        search.curve(*_wall_circle(m, normals))

    for N, _ in target:
        for forms in soft:
            for D, _ in forms:
                U = _stationary_directions(N, D)
                search.points(np.vstack([U, -U]))

    ts = np.linspace(0.0, 2 * np.pi, CURVE_GRID, endpoint=False)
    for forms_a, forms_b in combinations(soft, 2):
        for A, _ in forms_a:
            for B, _ in forms_b:
                curves, U = _tie_curves(A - B)
                search.points(U)
                for curve in curves:
                    search.curve(curve, ts)

    restarts = search.refine()
    return _finish(ratio, search.value, search.direction, "exact-low-dim", search.samples, restarts)


# --- ambient dimension >= 4 -------------------------------------------------

def _structured_directions(cones: Sequence[Cone], n: int) -> np.ndarray:
    vecs = [v for c in cones for v in np.vstack([c.generators, c.halfspaces])]
    vecs += list(np.eye(n))
    base = np.array(vecs) if vecs else np.zeros((0, n))
    pairs = [a + b for k, a in enumerate(base) for b in base[k + 1:]]
    out = np.vstack([base, -base] + ([np.array(pairs)] if pairs else []))
    norms = np.linalg.norm(out, axis=1)
    return out[norms > 1e-9] / norms[norms > 1e-9, None]


def _refine(ratio: _Ratio, U: np.ndarray, vals: np.ndarray, k: int) -> tuple[float, np.ndarray, int]:
    order = np.argsort(-vals)[:k]
    best_val, best_u = float(vals[order[0]]), U[order[0]]
    restarts = 0
    for i in order:
        if vals[i] <= 0:
            continue
        res = minimize(lambda v: -ratio.scalar(v), U[i], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        restarts += 1
        if -res.fun > best_val and np.linalg.norm(res.x) > 0:
            best_val, best_u = float(-res.fun), res.x / np.linalg.norm(res.x)
    return best_val, best_u, restarts


def _sampled_sup(ratio: _Ratio, n: int, seed: int) -> TubeSup:
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((SAMPLED_DIRECTIONS, n))
    R /= np.linalg.norm(R, axis=1, keepdims=True)
    U = np.vstack([R, _structured_directions(ratio.cones(), n)])
    vals = ratio(U)
    value, u, restarts = _refine(ratio, U, vals, SAMPLED_REFINE)
    logger.warning("sampled tube bound in dimension %d: best witness %.6g, reporting x%.2f",
                   n, value, SAFETY_FACTOR)
    sup = _finish(ratio, value, u, "sampled", len(U), restarts)
    return TubeSup(sup.value * SAFETY_FACTOR, sup.direction, sup.point, sup.method,
                   sup.samples, sup.restarts)


def tube_sup(target: Cone, cones: Sequence[Cone], weights: Sequence[float],
             seed: int | None = None) -> TubeSup:
    """sup of dist(u, target) / max_i w_i dist(u, C_i) over unit directions u."""
    n = target.ambient_dim
    ratio = _Ratio(target, cones, weights)
    if n == 1:
        return _line_sup(ratio)
    if n == 2:
        return _circle_sup(ratio)
    if n == 3:
        return _sphere_sup(ratio)
    return _sampled_sup(ratio, n, config.current().seed if seed is None else seed)
