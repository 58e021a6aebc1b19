"""Convex polyhedral cones: dual description, polarity, faces, projection.

A cone is stored with both representations:

    C = {sum_i lambda_i g_i : lambda_i >= 0}            (generators)
      = {x in S(C) : a_j . x <= 0 for every facet j}    (halfspaces)

where S(C) is the linear span of C and every facet normal a_j lies in S(C).
Generators are unit length and irredundant.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from conefan.core import config
from conefan.core.errors import InputError, NumericalError


KEY_DECIMALS = 9
NNLS_ITER_FACTOR = 100


def _rank_tol(tol: float) -> float:
    return max(100.0 * tol, 1e-12)


def _clean(a: np.ndarray, decimals: int = KEY_DECIMALS) -> np.ndarray:
    # round and drop negative zeros so keys hash consistently
    return np.round(a, decimals) + 0.0


# --- linear algebra helpers -------------------------------------------------

def span_basis_of(vectors: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal rows spanning the row space of `vectors`."""
    if vectors.size == 0:
        return np.zeros((0, vectors.shape[1] if vectors.ndim == 2 else 0))
    _, s, vt = np.linalg.svd(vectors, full_matrices=False)
    rank = int(np.sum(s > _rank_tol(tol) * max(1.0, s[0])))
    return vt[:rank]


def complement_basis(basis: np.ndarray, ambient_dim: int) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of `basis` rows."""
    if basis.shape[0] == 0:
        return np.eye(ambient_dim)
    if basis.shape[0] == ambient_dim:
        return np.zeros((0, ambient_dim))
    _, _, vt = np.linalg.svd(basis, full_matrices=True)
    return vt[basis.shape[0]:]


def nnls(A: np.ndarray, b: np.ndarray, maxiter: int | None = None) -> tuple[np.ndarray, float]:
    """Active-set solve of min ||A x - b|| subject to x >= 0.

    Returns (x, residual norm). Raises NumericalError when the solver exceeds
    `maxiter` (default 100 * number of columns).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    if n == 0:
        return np.zeros(0), float(np.linalg.norm(b))
    if maxiter is None:
        maxiter = NNLS_ITER_FACTOR * n
    try:
        x, residual = optimize.nnls(A, b, maxiter=maxiter)
    except RuntimeError as e:
        raise NumericalError(f"NNLS did not converge within {maxiter} iterations",
                             diagnostics={"columns": n, "reason": str(e)})
    return x, float(residual)


def _oriented_facets(coords: np.ndarray, tol: float) -> np.ndarray:
    """Facet normals (rows, unit) of the full-dimensional cone generated by `coords` rows.

    Works in the span coordinates of the cone: every facet hyperplane contains
    rank-1 independent generators, so candidates come from the null space of
    each such subset and survive only if all generators lie on one side.
    """
    m, r = coords.shape
    if r == 0 or m == 0:
        return np.zeros((0, r))
    side_tol = _rank_tol(tol)
    if r == 1:
        candidates = [np.array([1.0]), np.array([-1.0])]
    else:
        candidates = []
        for subset in combinations(range(m), r - 1):
            sub = coords[list(subset)]
            _, s, vt = np.linalg.svd(sub, full_matrices=True)
            if np.sum(s > side_tol * max(1.0, s[0])) != r - 1:
                continue
            candidates.append(vt[-1])

    normals: list[np.ndarray] = []
    for a in candidates:
        a = a / np.linalg.norm(a)
        side = coords @ a
        if np.all(side <= side_tol):
            pass
        elif np.all(side >= -side_tol):
            a = -a
        else:
            continue
        if np.all(np.abs(coords @ a) <= side_tol):
            continue
        if any(np.linalg.norm(a - other) <= 1e-7 for other in normals):
            continue
        normals.append(a)
    if not normals:
        return np.zeros((0, r))
    return np.array(normals)


def _unit_rows(vectors: np.ndarray, tol: float) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    keep = norms > tol
    units = vectors[keep] / norms[keep, None]
    unique: list[np.ndarray] = []
    for u in units:
        if not any(np.linalg.norm(u - v) <= 1e-9 for v in unique):
            unique.append(u)
    if not unique:
        return np.zeros((0, vectors.shape[1]))
    return np.array(unique)


def _irredundant(gens: np.ndarray, tol: float) -> np.ndarray:
    keep = list(range(len(gens)))
    for i in range(len(gens)):
        others = [j for j in keep if j != i]
        if not others:
            continue
        _, residual = nnls(gens[others].T, gens[i])
        if residual <= _rank_tol(tol):
            keep = others
    return gens[keep]


# --- the cone type ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Cone:
    ambient_dim: int
    generators: np.ndarray   # (m, n) unit rows
    halfspaces: np.ndarray   # (h, n) unit facet normals, a . x <= 0
    span_basis: np.ndarray   # (dim, n) orthonormal rows of S(C)

    @property
    def dim(self) -> int:
        return int(self.span_basis.shape[0])

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    def __repr__(self) -> str:
        return (f"Cone(ambient_dim={self.ambient_dim}, dim={self.dim}, "
                f"generators={np.round(self.generators, 6).tolist()})")

    @cached_property
    def projector(self) -> np.ndarray:
        return self.span_basis.T @ self.span_basis

    @cached_property
    def complement(self) -> np.ndarray:
        return complement_basis(self.span_basis, self.ambient_dim)

    @cached_property
    def lineality_dim(self) -> int:
        lattice = self._face_lattice
        return min(lattice)

    @property
    def is_pointed(self) -> bool:
        return self.lineality_dim == 0

    @cached_property
    def interior_point(self) -> np.ndarray:
        """A point of the relative interior (sum of all generators)."""
        if len(self.generators) == 0:
            return np.zeros(self.ambient_dim)
        return self.generators.sum(axis=0)

    @cached_property
    def key(self) -> tuple:
        return canonical_key(self)

    @cached_property
    def polar(self) -> Cone:
        normals = [self.halfspaces, self.complement, -self.complement]
        return cone_from_generators(np.vstack(normals), self.ambient_dim)

    # membership --------------------------------------------------------

    def contains_points(self, points: np.ndarray, tol: float | None = None) -> np.ndarray:
        tol = config.tolerance(tol)
        P = np.atleast_2d(np.asarray(points, dtype=float))
        scale = np.maximum(1.0, np.linalg.norm(P, axis=1))
        off_span = np.linalg.norm(P - P @ self.projector, axis=1)
        ok = off_span <= tol * scale
        if len(self.halfspaces):
            ok &= np.all(P @ self.halfspaces.T <= (tol * scale)[:, None], axis=1)
        return ok

    def contains_point(self, x, tol: float | None = None) -> bool:
        return bool(self.contains_points(np.asarray(x, dtype=float)[None, :], tol)[0])

    # faces ---------------------------------------------------------------

    @cached_property
    def _face_lattice(self) -> dict[int, list[Cone]]:
        """All faces grouped by dimension, found by descending through facets."""
        tol = config.tolerance()
        side_tol = _rank_tol(tol)
        full = frozenset(range(len(self.generators)))
        seen: dict[frozenset, Cone] = {full: self}
        frontier = [(full, self)]
        while frontier:
            nxt = []
            for index_set, face in frontier:
                for a in face.halfspaces:
                    sub = frozenset(i for i in index_set
                                    if abs(float(self.generators[i] @ a)) <= side_tol)
                    if sub in seen:
                        continue
                    sub_cone = cone_from_generators(self.generators[sorted(sub)], self.ambient_dim)
                    seen[sub] = sub_cone
                    nxt.append((sub, sub_cone))
            frontier = nxt
        lattice: dict[int, list[Cone]] = {}
        for face in seen.values():
            lattice.setdefault(face.dim, []).append(face)
        return lattice

    def faces(self, k: int) -> list[Cone]:
        if not 0 <= k <= self.dim:
            raise InputError(f"face dimension {k} out of range 0..{self.dim}")
        return list(self._face_lattice.get(k, []))

    def facets(self) -> list[Cone]:
        return self.faces(self.dim - 1) if self.dim > 0 else []

    def is_face(self, other: Cone) -> bool:
        if other.dim > self.dim:
            return False
        return any(cone_equal(f, other) for f in self._face_lattice.get(other.dim, []))

    @cached_property
    def _all_faces(self) -> list[Cone]:
        return [f for faces in self._face_lattice.values() for f in faces]

    # distances -----------------------------------------------------------

    def distances(self, points: np.ndarray, tol: float | None = None) -> np.ndarray:
        """Euclidean distance from each row of `points` to the cone.

        The metric projection lies in the relative interior of some face F,
        where it coincides with the orthogonal projection onto S(F); taking
        the minimum over faces whose projection stays inside F is exact.
        """
        tol = config.tolerance(tol)
        P = np.atleast_2d(np.asarray(points, dtype=float))
        best = np.full(len(P), np.inf)
        for face in self._all_faces:
            Q = P @ face.projector
            member = face.contains_points(Q, tol=max(tol, 1e-9))
            d = np.linalg.norm(P - Q, axis=1)
            best = np.where(member & (d < best), d, best)
        missing = ~np.isfinite(best)
        for i in np.flatnonzero(missing):
            best[i] = project_point(self, P[i]).distance
        return best

    def distance(self, x) -> float:
        return float(self.distances(np.asarray(x, dtype=float)[None, :])[0])


# --- constructors -----------------------------------------------------------

def _as_rays(rays: Iterable[Sequence[float]] | np.ndarray, ambient_dim: int) -> np.ndarray:
    if ambient_dim < 1:
        raise InputError(f"ambient dimension must be >= 1, got {ambient_dim}")
    if isinstance(rays, np.ndarray):
        arr = np.asarray(rays, dtype=float)
        if arr.size == 0:
            return np.zeros((0, ambient_dim))
        if arr.ndim != 2 or arr.shape[1] != ambient_dim:
            raise InputError(f"rays must have shape (m, {ambient_dim}), got {arr.shape}")
        return arr
    rows = [list(r) for r in rays]
    for i, r in enumerate(rows):
        if len(r) != ambient_dim:
            raise InputError(f"ray {i} has length {len(r)}, expected {ambient_dim}")
    if not rows:
        return np.zeros((0, ambient_dim))
    arr = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError("rays must be finite")
    return arr


def cone_from_generators(rays, ambient_dim: int, tol: float | None = None) -> Cone:
    """Build a cone from rays (zero rays are ignored) with both representations."""
    tol = config.tolerance(tol)
    arr = _as_rays(rays, ambient_dim)
    gens = _unit_rows(arr, tol) if len(arr) else arr
    if len(gens):
        gens = _irredundant(gens, tol)
    basis = span_basis_of(gens, tol) if len(gens) else np.zeros((0, ambient_dim))
    if basis.shape[0] == 0:
        return Cone(ambient_dim, np.zeros((0, ambient_dim)), np.zeros((0, ambient_dim)),
                    np.zeros((0, ambient_dim)))
    coords = gens @ basis.T
    normals = _oriented_facets(coords, tol) @ basis
    return Cone(ambient_dim, gens, normals.reshape(-1, ambient_dim), basis)


def zero_cone(ambient_dim: int) -> Cone:
    return cone_from_generators([], ambient_dim)


def whole_space(ambient_dim: int) -> Cone:
    eye = np.eye(ambient_dim)
    return cone_from_generators(np.vstack([eye, -eye]), ambient_dim)


def cone_from_halfspaces(normals, ambient_dim: int, equalities=(),
                         tol: float | None = None) -> Cone:
    """{x : a . x <= 0 for a in normals, e . x = 0 for e in equalities}.

    Converted to generators by polarity inside the subspace cut out by the
    equalities: {y : A y <= 0} is the polar of the cone generated by A's rows.
    """
    tol = config.tolerance(tol)
    A = _as_rays(normals, ambient_dim)
    E = _as_rays(equalities, ambient_dim)
    basis = complement_basis(span_basis_of(E, tol), ambient_dim) if len(E) else np.eye(ambient_dim)
    s = basis.shape[0]
    if s == 0:
        return zero_cone(ambient_dim)
    restricted = A @ basis.T if len(A) else np.zeros((0, s))
    inner = cone_from_generators(restricted, s, tol).polar
    return cone_from_generators(inner.generators @ basis, ambient_dim, tol)


def intersect_cones(a: Cone, b: Cone, tol: float | None = None) -> Cone:
    _check_same_ambient(a, b)
    normals = np.vstack([a.halfspaces, b.halfspaces])
    equalities = np.vstack([a.complement, b.complement])
    return cone_from_halfspaces(normals, a.ambient_dim, equalities, tol)


def intersect_all(cones: Sequence[Cone], tol: float | None = None) -> Cone:
    if not cones:
        raise InputError("cannot intersect an empty family of cones")
    result = cones[0]
    for c in cones[1:]:
        result = intersect_cones(result, c, tol)
    return result


# --- operations -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProjectionResult:
    nearest_point: np.ndarray
    distance: float
    active_face_dim: int


def polar(c: Cone) -> Cone:
    return c.polar


def halfspace_representation(c: Cone) -> list[np.ndarray]:
    """Facet normals a with C = {x in S(C) : a . x <= 0}."""
    return [row.copy() for row in c.halfspaces]


def project_point(c: Cone, x, tol: float | None = None) -> ProjectionResult:
    """Metric projection of `x` onto `c` by nonnegative least squares."""
    tol = config.tolerance(tol)
    x = np.asarray(x, dtype=float)
    if x.shape != (c.ambient_dim,):
        raise InputError(f"point has shape {x.shape}, expected ({c.ambient_dim},)")
    if len(c.generators) == 0:
        return ProjectionResult(np.zeros(c.ambient_dim), float(np.linalg.norm(x)), 0)
    lam, _ = nnls(c.generators.T, x)
    nearest = c.generators.T @ lam
    return ProjectionResult(nearest, float(np.linalg.norm(x - nearest)),
                            _active_face_dim(c, nearest, tol))


def _active_face_dim(c: Cone, p: np.ndarray, tol: float) -> int:
    scale = max(1.0, float(np.linalg.norm(p)))
    side_tol = _rank_tol(tol)
    tight = [a for a in c.halfspaces if abs(float(a @ p)) <= side_tol * scale]
    gens = [g for g in c.generators if all(abs(float(a @ g)) <= side_tol for a in tight)]
    if not gens:
        return 0
    return int(span_basis_of(np.array(gens), tol).shape[0])


def faces(c: Cone, k: int) -> list[Cone]:
    return c.faces(k)


def _check_same_ambient(a: Cone, b: Cone) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise InputError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def cone_contains_cone(outer: Cone, inner: Cone, tol: float | None = None) -> bool:
    _check_same_ambient(outer, inner)
    if len(inner.generators) == 0:
        return True
    return bool(np.all(outer.contains_points(inner.generators, tol)))


def cone_equal(a: Cone, b: Cone, tol: float | None = None) -> bool:
    if a.dim != b.dim:
        return False
    return cone_contains_cone(a, b, tol) and cone_contains_cone(b, a, tol)


def canonical_key(c: Cone) -> tuple:
    """Representation-independent identity: span projector plus sorted facet normals."""
    projector = tuple(_clean(c.projector).ravel().tolist())
    normals = tuple(sorted(tuple(_clean(a).tolist()) for a in c.halfspaces))
    return (c.ambient_dim, c.dim, projector, normals)


def ray(direction) -> Cone:
    direction = np.asarray(direction, dtype=float)
    return cone_from_generators(direction[None, :], len(direction))


# --- JSON codec -------------------------------------------------------------

def cone_to_json(c: Cone) -> dict:
    return {
        "ambient_dim": c.ambient_dim,
        "dim": c.dim,
        "generators": c.generators.tolist(),
        "halfspaces": c.halfspaces.tolist(),
    }


def cone_from_json(obj: dict) -> Cone:
    if not isinstance(obj, dict) or "ambient_dim" not in obj or "generators" not in obj:
        raise InputError('cone JSON needs "ambient_dim" and "generators"')
    try:
        n = int(obj["ambient_dim"])
    except (TypeError, ValueError):
        raise InputError(f"ambient_dim must be an integer, got {obj['ambient_dim']!r}")
    return cone_from_generators(obj["generators"], n)
