"""Toric and quasi-toric differential inclusions over a complete fan.

Both evaluators pick a fan cone C and return its polar C°. The selection
logic works on a distance matrix D (points x fan cones) so that a single
point and a batch of ten thousand points share one code path.
"""

from __future__ import annotations

import dataclasses
import logging
from itertools import combinations
from typing import Iterable

import numpy as np

from conefan.core import cache, config
from conefan.core.errors import AmbiguityError, InputError, PreconditionError
from conefan.core.fans import Fan, intersect_in_fan
from conefan.core.models import AlphaCertificate, Certificate, DeltaVec, InclusionRHS
from conefan.core.tubes import tube_sup

logger = logging.getLogger(__name__)

REFUTE_SLACK = 1e-6
AMBIGUOUS = -1


def _require_complete(f: Fan) -> None:
    if not f.complete:
        raise PreconditionError(
            "the fan is not certified complete (completeness: "
            f"{f.completeness}); inclusions need a complete fan")


def _as_points(f: Fan, X) -> np.ndarray:
    P = np.atleast_2d(np.asarray(X, dtype=float))
    if P.shape[1] != f.ambient_dim:
        raise InputError(f"points must have {f.ambient_dim} coordinates, got {P.shape[1]}")
    if not np.all(np.isfinite(P)):
        raise InputError("points must be finite")
    return P


def _check_d(f: Fan, d: DeltaVec) -> None:
    if len(d) != f.ambient_dim:
        raise InputError(f"d must have {f.ambient_dim} entries (d_0..d_{f.ambient_dim - 1}), got {len(d)}")


def distance_matrix(f: Fan, X) -> np.ndarray:
    """D[p, j] = dist(X_p, C_j) for every fan cone."""
    P = _as_points(f, X)
    D = np.empty((len(P), len(f.cones)))
    for j, c in enumerate(f.cones):
        D[:, j] = c.distances(P)
    return D


def _slack(P: np.ndarray) -> np.ndarray:
    return config.tolerance() * np.maximum(1.0, np.linalg.norm(P, axis=1))


# --- selectors ------------------------------------------------------------------

def select_tdi(f: Fan, D: np.ndarray, P: np.ndarray, delta: float) -> np.ndarray:
    """Fan index of C* = intersection of the maximal cones within delta, per row."""
    maximal = np.array(f.maximal, dtype=int)
    if len(maximal) == 0:
        raise PreconditionError("the fan has no maximal cones")
    hits = D[:, maximal] <= delta + _slack(P)[:, None]
    out = np.empty(len(D), dtype=int)
    memo: dict[tuple[int, ...], int] = {}
    for p, row in enumerate(hits):
        members = tuple(maximal[row].tolist())
        if not members:
            raise PreconditionError(
                f"X={P[p].tolist()} is farther than delta from every maximal cone; the fan is not complete")
        if members not in memo:
            memo[members] = f.meet(members)
        out[p] = memo[members]
    return out


def select_qtdi(f: Fan, D: np.ndarray, P: np.ndarray, d: DeltaVec,
                strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Steps 0..n of the quasi-toric rule, per row: (fan index, step).

    With `strict` an ambiguous step raises `AmbiguityError`; otherwise the
    row gets index AMBIGUOUS and the step where the collision happened.
    """
    n = f.ambient_dim
    m = len(D)
    idx = np.full(m, AMBIGUOUS, dtype=int)
    steps = np.full(m, n, dtype=int)
    open_rows = np.ones(m, dtype=bool)
    slack = _slack(P)
    for k in range(n):
        cols = np.array(f.cones_of_dim(k), dtype=int)
        if len(cols) == 0 or not open_rows.any():
            continue
        rows = np.flatnonzero(open_rows)
        hits = D[np.ix_(rows, cols)] <= d[k] + slack[rows, None]
        count = hits.sum(axis=1)
        many = count >= 2
        if many.any():
            first = int(np.flatnonzero(many)[0])
            if strict:
                raise AmbiguityError(k, tuple(cols[hits[first]].tolist()), P[rows[first]])
            steps[rows[many]] = k
            open_rows[rows[many]] = False
        one = count == 1
        idx[rows[one]] = cols[np.argmax(hits[one], axis=1)]
        steps[rows[one]] = k
        open_rows[rows[one]] = False

    rows = np.flatnonzero(open_rows)
    if len(rows):
        maximal = np.array(f.maximal, dtype=int)
        inside = D[np.ix_(rows, maximal)] <= slack[rows, None]
        for r, row in zip(rows, inside):
            found = maximal[row]
            if len(found) == 0:
                # numerically outside every maximal cone: take the nearest one
                found = maximal[[int(np.argmin(D[r, maximal]))]]
            if len(found) > 1:
                if d.certified:
                    logger.debug("step %d tie at X=%s broken by lowest index", n, P[r].tolist())
                else:
                    logger.warning("step %d tie between maximal cones %s at X=%s under unchecked d; "
                                   "using cone %d", n, found.tolist(), P[r].tolist(), found[0])
            idx[r] = int(found[0])
            steps[r] = n
    return idx, steps


# --- evaluators -----------------------------------------------------------------

def eval_tdi(f: Fan, delta: float, X) -> InclusionRHS:
    """Right-hand side of the toric inclusion: polar of the intersection of
    all maximal cones within `delta` of X."""
    _require_complete(f)
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    P = _as_points(f, X)
    j = int(select_tdi(f, distance_matrix(f, P), P, delta)[0])
    return InclusionRHS(f.cones[j].polar, j, f.ambient_dim + 1, kind="tdi")


def eval_qtdi(f: Fan, d: DeltaVec, X, allow_unchecked: bool = False) -> InclusionRHS:
    """Right-hand side of the quasi-toric inclusion (steps 0..n)."""
    _require_complete(f)
    _check_d(f, d)
    if not d.certified and not allow_unchecked:
        raise PreconditionError(
            f"d={list(d.d)} is {d.certificate.status}; certify it first or pass allow_unchecked")
    P = _as_points(f, X)
    idx, steps = select_qtdi(f, distance_matrix(f, P), P, d, strict=True)
    j = int(idx[0])
    return InclusionRHS(f.cones[j].polar, j, int(steps[0]), kind="qtdi")


def eval_tdi_batch(f: Fan, delta: float, X) -> np.ndarray:
    _require_complete(f)
    P = _as_points(f, X)
    return select_tdi(f, distance_matrix(f, P), P, delta)


def eval_qtdi_batch(f: Fan, d: DeltaVec, X, strict: bool = False) -> tuple[np.ndarray, np.ndarray]:
    _require_complete(f)
    _check_d(f, d)
    P = _as_points(f, X)
    return select_qtdi(f, distance_matrix(f, P), P, d, strict=strict)


# --- alpha ----------------------------------------------------------------------

def _subset_key(subset: tuple[int, ...], seed: int | None = None) -> str:
    s = config.current()
    seed = s.seed if seed is None else seed
    return f"{','.join(map(str, subset))}|tol={s.tolerance!r}|seed={seed}"


def estimate_alpha(f: Fan, subset: Iterable[int], seed: int | None = None) -> AlphaCertificate:
    """sup of dist(X, C^) over X within unit distance of every cone in `subset`,
    C^ the intersection of the subset."""
    members = tuple(sorted(set(subset)))
    if not members:
        raise InputError("subset must be nonempty")
    meet, where = intersect_in_fan(f, members)
    if where in members:
        return AlphaCertificate(members, where, 1.0, "exact-low-dim")

    key = _subset_key(members, seed)
    hit = cache.get(f.fingerprint, key)
    if hit is not None:
        hit["subset"] = tuple(hit["subset"])
        return AlphaCertificate(**hit)

    sup = tube_sup(meet, [f.cones[i] for i in members], [1.0] * len(members), seed)
    cert = AlphaCertificate(
        subset=members,
        intersection_index=where,
        alpha=max(1.0, sup.value),
        method=sup.method,
        samples=sup.samples,
        restarts=sup.restarts,
        witness=None if sup.point is None else sup.point.tolist(),
    )
    cache.put(f.fingerprint, key, dataclasses.asdict(cert))
    return cert


# --- well-definedness -----------------------------------------------------------

def _threshold(f: Fan, d: DeltaVec, j: int) -> float:
    dim = f.cones[j].dim
    return 0.0 if dim == f.ambient_dim else d[dim]


def _method_for(n: int) -> str:
    return "exact-low-dim" if n <= 3 else "sampled"


def check_well_defined(f: Fan, d: DeltaVec, seed: int | None = None) -> Certificate:
    """Certify or refute that d makes every quasi-toric step unambiguous.

    For each pair of fan cones (C, C~) with thresholds d_k, d_m and
    intersection C^ of dimension h, checks
    sup { dist(X, C^) : dist(X, C) <= d_k, dist(X, C~) <= d_m } <= d_h.
    Maximal cones take threshold 0 (membership). Nested pairs and pairs of
    maximal cones hold trivially.
    """
    _require_complete(f)
    _check_d(f, d)
    M = f.containment
    worst = 0.0
    checked = 0
    for i, j in combinations(range(len(f.cones)), 2):
        if M[i, j] or M[j, i]:
            continue
        ti, tj = _threshold(f, d, i), _threshold(f, d, j)
        if ti == 0.0 and tj == 0.0:
            continue
        h = f.meet((i, j))
        bound = d[f.cones[h].dim]
        weights = [np.inf if t == 0.0 else 1.0 / t for t in (ti, tj)]
        sup = tube_sup(f.cones[h], [f.cones[i], f.cones[j]], weights, seed)
        checked += 1
        worst = max(worst, sup.value / bound)
        if sup.value > bound * (1.0 + REFUTE_SLACK):
            logger.info("d=%s refuted on cones (%d, %d): sup %.6g > d_%d = %.6g",
                        list(d.d), i, j, sup.value, f.cones[h].dim, bound)
            return Certificate(
                status="refuted",
                method=sup.method,
                witness=None if sup.point is None else sup.point.tolist(),
                cones=[i, j],
                worst_ratio=sup.value / bound,
                pairs_checked=checked,
            )
    return Certificate(status="certified", method=_method_for(f.ambient_dim),
                       worst_ratio=worst, pairs_checked=checked)


def certify(f: Fan, d: DeltaVec, seed: int | None = None) -> DeltaVec:
    """`d` with its well-definedness certificate attached."""
    return DeltaVec(d.d, check_well_defined(f, d, seed))
