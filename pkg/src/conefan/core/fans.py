"""Polyhedral fans: validation, completeness, hyperplane arrangements, projection.

A `Fan` is always stored closed under faces. Cone indices are positions in
`Fan.cones` and are stable for the lifetime of the fan; they are the
provenance reported by the inclusion evaluators.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from conefan.core import config
from conefan.core.cones import (
    Cone,
    _as_rays,
    _rank_tol,
    cone_equal,
    cone_from_generators,
    cone_from_halfspaces,
    cone_from_json,
    cone_to_json,
    intersect_all,
    intersect_cones,
    span_basis_of,
)
from conefan.core.errors import FanInvariantError, InputError
from conefan.core.models import CompletenessReport, FanValidation, FanViolation

logger = logging.getLogger(__name__)

MAX_HYPERPLANES = 12


class _ConeIndex:
    """Key lookup with a mutual-containment fallback for rounding near the key grid."""

    def __init__(self, cones: Iterable[Cone] = ()):
        self.cones: list[Cone] = []
        self._by_key: dict[tuple, int] = {}
        self._by_dim: dict[int, list[int]] = {}
        for c in cones:
            self.add(c)

    def find(self, cone: Cone) -> int | None:
        hit = self._by_key.get(cone.key)
        if hit is not None:
            return hit
        for i in self._by_dim.get(cone.dim, []):
            if cone_equal(self.cones[i], cone):
                return i
        return None

    def add(self, cone: Cone) -> int:
        i = len(self.cones)
        self.cones.append(cone)
        self._by_key.setdefault(cone.key, i)
        self._by_dim.setdefault(cone.dim, []).append(i)
        return i


@dataclass(frozen=True, eq=False)
class Fan:
    ambient_dim: int
    cones: tuple[Cone, ...]
    complete: bool = False
    completeness: str = "unchecked"  # unchecked, sampled, construction, asserted

    def __len__(self) -> int:
        return len(self.cones)

    def __repr__(self) -> str:
        dims = [c.dim for c in self.cones]
        counts = {k: dims.count(k) for k in sorted(set(dims))}
        return f"Fan(ambient_dim={self.ambient_dim}, cones_by_dim={counts}, complete={self.complete})"

    @cached_property
    def _index(self) -> _ConeIndex:
        return _ConeIndex(self.cones)

    @cached_property
    def maximal(self) -> list[int]:
        return self.cones_of_dim(self.ambient_dim)

    @cached_property
    def dims(self) -> np.ndarray:
        return np.array([c.dim for c in self.cones], dtype=int)

    def cones_of_dim(self, k: int) -> list[int]:
        return [i for i, c in enumerate(self.cones) if c.dim == k]

    def index_of(self, cone: Cone) -> int | None:
        if cone.ambient_dim != self.ambient_dim:
            return None
        return self._index.find(cone)

    @cached_property
    def containment(self) -> np.ndarray:
        """Boolean matrix M with M[i, j] true iff cone i is contained in cone j."""
        n_cones = len(self.cones)
        owners = np.concatenate([np.full(len(c.generators), i) for i, c in enumerate(self.cones)]
                                + [np.zeros(0, dtype=int)]).astype(int)
        stacked = np.vstack([c.generators for c in self.cones] + [np.zeros((0, self.ambient_dim))])
        M = np.zeros((n_cones, n_cones), dtype=bool)
        for j, outer in enumerate(self.cones):
            inside = outer.contains_points(stacked) if len(stacked) else np.zeros(0, dtype=bool)
            outside = np.bincount(owners[~inside], minlength=n_cones)
            M[:, j] = outside == 0
        return M

    def meet(self, indices: Iterable[int]) -> int:
        """Index of the fan cone equal to the intersection of the given cones."""
        idx = sorted(set(indices))
        if not idx:
            raise InputError("meet needs a nonempty set of cone indices")
        for i in idx:
            if not 0 <= i < len(self.cones):
                raise InputError(f"cone index {i} out of range 0..{len(self.cones) - 1}")
        common = np.all(self.containment[:, idx], axis=1)
        candidates = np.flatnonzero(common)
        if len(candidates) == 0:
            raise FanInvariantError(f"cones {idx} have no common face in the fan")
        best = candidates[np.argmax(self.dims[candidates])]
        return int(best)

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.ambient_dim).encode())
        for c in self.cones:
            h.update(repr(c.key).encode())
        return h.hexdigest()[:16]

    def with_completeness(self, complete: bool, how: str) -> Fan:
        return Fan(self.ambient_dim, self.cones, complete, how)


# --- validation -------------------------------------------------------------

def _ambient_of(cones: Sequence[Cone]) -> int:
    if not cones:
        raise InputError("a fan needs at least one cone")
    n = cones[0].ambient_dim
    for i, c in enumerate(cones):
        if c.ambient_dim != n:
            raise InputError(f"cone {i} has ambient dimension {c.ambient_dim}, expected {n}")
    return n


def validate_fan(cones: Sequence[Cone], tol: float | None = None) -> FanValidation:
    """Check face closure and the pairwise face-intersection property.

    Missing faces are reported, never added. On success the report carries
    the `Fan` (completeness still unchecked).
    """
    n = _ambient_of(cones)
    report = FanValidation(ambient_dim=n, n_cones=len(cones))
    index = _ConeIndex()
    for i, c in enumerate(cones):
        prior = index.find(c)
        if prior is not None:
            report.violations.append(FanViolation(
                "duplicate", [prior, i], f"cone {i} repeats cone {prior}"))
        index.add(c)

    for i, c in enumerate(cones):
        for k in range(c.dim):
            for face in c.faces(k):
                if index.find(face) is None:
                    report.violations.append(FanViolation(
                        "missing-face", [i],
                        f"{k}-dimensional face of cone {i} is not in the fan", face))

    for i, j in combinations(range(len(cones)), 2):
        a, b = cones[i], cones[j]
        meet = intersect_cones(a, b, tol)
        if not (a.is_face(meet) and b.is_face(meet)):
            report.violations.append(FanViolation(
                "intersection", [i, j],
                f"intersection of cones {i} and {j} (dim {meet.dim}) is not a face of both",
                meet))

    if report.valid:
        report.fan = Fan(n, tuple(cones))
    else:
        logger.info("fan validation found %d violation(s)", len(report.violations))
    return report


def require_fan(cones: Sequence[Cone], tol: float | None = None) -> Fan:
    report = validate_fan(cones, tol)
    if not report.valid:
        first = report.violations[0]
        raise FanInvariantError(
            f"invalid fan ({len(report.violations)} violation(s)); first: {first.detail}")
    return report.fan


# --- completeness -----------------------------------------------------------

def _unit_directions(n: int, samples: int, seed: int) -> np.ndarray:
    eye = np.eye(n)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((samples, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return np.vstack([eye, -eye, U])


def is_complete(f: Fan, samples: int | None = None, seed: int | None = None,
                tol: float | None = None) -> CompletenessReport:
    """Sample unit directions; every one must land in some maximal cone.

    Coordinate directions are tried first, so the witness is a signed unit
    vector whenever one is uncovered.
    """
    settings = config.current()
    samples = settings.samples if samples is None else samples
    seed = settings.seed if seed is None else seed
    if f.completeness == "construction":
        return CompletenessReport(complete=True, method="construction", samples=0)

    U = _unit_directions(f.ambient_dim, samples, seed)
    covered = np.zeros(len(U), dtype=bool)
    for i in f.maximal:
        covered |= f.cones[i].contains_points(U, tol)
    if covered.all():
        return CompletenessReport(complete=True, method="sampled", samples=len(U))
    first = int(np.flatnonzero(~covered)[0])
    return CompletenessReport(complete=False, method="sampled", samples=len(U),
                              witness=U[first].tolist())


def certify_complete(f: Fan, samples: int | None = None, seed: int | None = None) -> Fan:
    report = is_complete(f, samples, seed)
    return f.with_completeness(report.complete, report.method)


# --- constructors -----------------------------------------------------------

def _sort_cones(cones: list[Cone]) -> list[Cone]:
    return sorted(cones, key=lambda c: (c.dim, c.key))


def fan_from_maximal(cones: Sequence[Cone], tol: float | None = None) -> Fan:
    """Close the given cones under faces and validate the result."""
    _ambient_of(cones)
    index = _ConeIndex()
    for c in cones:
        for face in c._all_faces:
            if index.find(face) is None:
                index.add(face)
    return require_fan(_sort_cones(index.cones), tol)


def _hyperplanes(normals, tol: float) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(normals, dtype=float))
    if arr.size == 0:
        return arr.reshape(0, arr.shape[-1] if arr.ndim == 2 else 0)
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms <= tol):
        raise InputError("hyperplane normals must be nonzero")
    unique: list[np.ndarray] = []
    for a in arr / norms[:, None]:
        if not any(min(np.linalg.norm(a - b), np.linalg.norm(a + b)) <= 1e-9 for b in unique):
            unique.append(a)
    return np.array(unique)


def _sign_vector(normals: np.ndarray, point: np.ndarray, tol: float) -> tuple[int, ...]:
    scale = max(1.0, float(np.linalg.norm(point)))
    vals = normals @ point
    return tuple(int(s) for s in np.where(np.abs(vals) <= tol * scale, 0, np.sign(vals)))


def hyperplane_fan(normals, ambient_dim: int | None = None, tol: float | None = None) -> Fan:
    """Complete fan of all cells of the central arrangement {a . x = 0}.

    Cells are indexed by sign vectors in {-, 0, +}^k. The arrangement is
    refined one hyperplane at a time so empty sign vectors are pruned early;
    a sign vector survives only if the relative interior of its closed cell
    realizes it exactly.
    """
    tol = config.tolerance(tol)
    if ambient_dim is None:
        arr = np.asarray(normals, dtype=float)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise InputError("ambient_dim is required when no normals are given")
        ambient_dim = arr.shape[1]
    rows = _as_rays(normals, ambient_dim)
    A = _hyperplanes(rows, tol) if len(rows) else np.zeros((0, ambient_dim))
    if len(A) > MAX_HYPERPLANES:
        raise InputError(f"at most {MAX_HYPERPLANES} hyperplanes are supported, got {len(A)}")
    sign_tol = _rank_tol(tol) * 10

    cells: list[tuple[int, ...]] = [()]
    for k in range(len(A)):
        refined = []
        for signs, s in product(cells, (-1, 0, 1)):
            cand = signs + (s,)
            cell = _cell(A[:k + 1], cand, ambient_dim, tol)
            if _sign_vector(A[:k + 1], cell.interior_point, sign_tol) == cand:
                refined.append(cand)
        cells = refined

    found = _ConeIndex()
    for signs in cells:
        cell = _cell(A, signs, ambient_dim, tol)
        if found.find(cell) is None:
            found.add(cell)
    logger.debug("hyperplane fan: %d hyperplanes, %d cells", len(A), len(found.cones))
    return Fan(ambient_dim, tuple(_sort_cones(found.cones)), True, "construction")


def _cell(A: np.ndarray, signs: tuple[int, ...], n: int, tol: float) -> Cone:
    ineq = [-s * a for a, s in zip(A, signs) if s != 0]
    eq = [a for a, s in zip(A, signs) if s == 0]
    return cone_from_halfspaces(np.array(ineq).reshape(-1, n), n,
                                np.array(eq).reshape(-1, n), tol)


# --- queries ----------------------------------------------------------------

def intersect_in_fan(f: Fan, indices: Iterable[int], tol: float | None = None) -> tuple[Cone, int]:
    """Geometric intersection of the given fan cones together with its fan index."""
    idx = sorted(set(indices))
    if not idx:
        raise InputError("intersect_in_fan needs a nonempty set of cone indices")
    for i in idx:
        if not 0 <= i < len(f.cones):
            raise InputError(f"cone index {i} out of range 0..{len(f.cones) - 1}")
    meet = intersect_all([f.cones[i] for i in idx], tol)
    where = f.index_of(meet)
    if where is None:
        raise FanInvariantError(f"intersection of cones {idx} (dim {meet.dim}) is not a cone of the fan")
    return f.cones[where], where


def orthogonal_projector(kernel_basis, ambient_dim: int, tol: float | None = None) -> np.ndarray:
    """Projector onto the orthogonal complement of span(kernel_basis)."""
    tol = config.tolerance(tol)
    K = _as_rays(kernel_basis, ambient_dim)
    basis = span_basis_of(K, tol) if len(K) else np.zeros((0, ambient_dim))
    return np.eye(ambient_dim) - basis.T @ basis


def project_cone(c: Cone, projector: np.ndarray) -> Cone:
    return cone_from_generators(c.generators @ projector, c.ambient_dim)


def project_fan(f: Fan, kernel_basis) -> list[Cone]:
    """pi(C_i) for every fan cone, pi the orthogonal projection killing span(kernel_basis)."""
    P = orthogonal_projector(kernel_basis, f.ambient_dim)
    return [project_cone(c, P) for c in f.cones]


# --- JSON codec -------------------------------------------------------------

def fan_to_json(f: Fan) -> dict:
    return {
        "ambient_dim": f.ambient_dim,
        "complete": f.complete,
        "cones": [cone_to_json(c) for c in f.cones],
    }


def cones_from_json(obj: dict) -> list[Cone]:
    if not isinstance(obj, dict) or "cones" not in obj:
        raise InputError('fan JSON needs "cones" or "hyperplanes"')
    cones = obj["cones"]
    if not isinstance(cones, list):
        raise InputError('"cones" must be a list')
    n = obj.get("ambient_dim")
    out = []
    for i, raw in enumerate(cones):
        if isinstance(raw, dict) and "ambient_dim" not in raw and n is not None:
            raw = {**raw, "ambient_dim": n}
        try:
            out.append(cone_from_json(raw))
        except InputError as e:
            raise InputError(f"cone {i}: {e}")
    return out


def fan_from_json(obj: dict, samples: int | None = None, seed: int | None = None) -> Fan:
    """Load a fan: hyperplane form is complete by construction, cone lists are
    validated and then certified complete by sampling."""
    if isinstance(obj, dict) and "hyperplanes" in obj:
        return hyperplane_fan(obj["hyperplanes"], obj.get("ambient_dim"))
    fan = require_fan(cones_from_json(obj))
    if obj.get("complete") is True and samples == 0:
        return fan.with_completeness(True, "asserted")
    return certify_complete(fan, samples, seed)
