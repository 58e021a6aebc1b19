"""Embeddings between toric and quasi-toric inclusions, and their verification."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from conefan.core import config
from conefan.core.cones import project_point
from conefan.core.errors import InputError, NumericalError
from conefan.core.fans import Fan
from conefan.core.inclusions import (
    AMBIGUOUS,
    _check_d,
    _require_complete,
    check_well_defined,
    distance_matrix,
    estimate_alpha,
    select_qtdi,
    select_tdi,
)
from conefan.core.models import (
    DeltaVec,
    EmbeddingReport,
    EmbeddingViolation,
    GlobalAlpha,
)

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_SUBSETS = 4096
CAPPED_SUBSET_SIZE = 3
ALPHA_RETRIES = 4
STRUCTURED_PER_CONE = 8
PERTURB_SCALES = (0.1, 0.5, 1.0, 2.0)
MAX_WITNESSES = 10

_METHOD_RANK = {"exact-low-dim": 0, "sampled": 1}


# --- alpha over the fan ---------------------------------------------------------

def alpha_subsets(f: Fan) -> tuple[list[tuple[int, ...]], bool]:
    """Subsets of maximal cones (size >= 2) plus every non-nested pair of cones."""
    maximal = f.maximal
    capped = 2 ** len(maximal) > MAX_EXHAUSTIVE_SUBSETS
    top = CAPPED_SUBSET_SIZE if capped else len(maximal)
    if capped:
        logger.warning("%d maximal cones: alpha subsets capped at size %d",
                       len(maximal), CAPPED_SUBSET_SIZE)
    subsets = [s for size in range(2, top + 1) for s in combinations(maximal, size)]
    seen = set(subsets)
    M = f.containment
    for i, j in combinations(range(len(f.cones)), 2):
        if M[i, j] or M[j, i] or (i, j) in seen:
            continue
        subsets.append((i, j))
    return subsets, capped


def global_alpha(f: Fan, seed: int | None = None) -> GlobalAlpha:
    _require_complete(f)
    subsets, capped = alpha_subsets(f)
    best = None
    method = "exact-low-dim"
    checked = 0
    for subset in subsets:
        if f.meet(subset) in subset:
            continue
        cert = estimate_alpha(f, subset, seed)
        checked += 1
        if _METHOD_RANK[cert.method] > _METHOD_RANK[method]:
            method = cert.method
        if best is None or cert.alpha > best.alpha:
            best = cert
    alpha = 1.0 if best is None else best.alpha
    logger.info("global alpha %.6g over %d subset(s) (%s)", alpha, checked, method)
    return GlobalAlpha(alpha=alpha, method=method, subsets_checked=checked,
                       worst=best, capped=capped)


def _ladder(top: float, factor: float, n: int) -> tuple[float, ...]:
    d = [0.0] * n
    d[n - 1] = top
    for k in range(n - 2, -1, -1):
        d[k] = factor * d[k + 1]
    return tuple(d)


def _construct(f: Fan, top: float, seed: int | None) -> DeltaVec:
    """d_{n-1} = top, d_k = lambda * alpha * d_{k+1}, certified; alpha doubles on refutation."""
    ga = global_alpha(f, seed)
    alpha = ga.alpha
    for _ in range(ALPHA_RETRIES + 1):
        lam = max(1.0, 1.0 / alpha)
        d = DeltaVec(_ladder(top, lam * alpha, f.ambient_dim))
        cert = check_well_defined(f, d, seed)
        if cert.certified:
            cert.alpha = alpha
            return DeltaVec(d.d, cert)
        logger.warning("d=%s refuted on cones %s with alpha=%.6g; retrying with alpha doubled",
                       list(d.d), cert.cones, alpha)
        alpha *= 2.0
    raise NumericalError(
        f"could not certify a threshold vector after {ALPHA_RETRIES} alpha doublings",
        diagnostics={"alpha": alpha, "last": list(d.d), "witness": cert.witness, "cones": cert.cones},
    )


def inflate_d(f: Fan, d: DeltaVec, seed: int | None = None) -> DeltaVec:
    """A certified d~ >= d built from max(d) downward."""
    _require_complete(f)
    _check_d(f, d)
    return _construct(f, max(d.d), seed)


def embed_tdi_in_qtdi(f: Fan, delta: float, seed: int | None = None) -> DeltaVec:
    """Thresholds d with F_delta(X) contained in F_d(X) for every X."""
    _require_complete(f)
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    return _construct(f, float(delta), seed)


def embed_qtdi_in_tdi(d: DeltaVec) -> float:
    """delta = max(d), so that F_d(X) is contained in F_delta(X)."""
    if not d.certified:
        logger.warning("embedding unchecked d=%s; containment relies on well-definedness", list(d.d))
    return max(d.d)


def round_trip(f: Fan, delta: float, seed: int | None = None) -> tuple[DeltaVec, float]:
    d = embed_tdi_in_qtdi(f, delta, seed)
    return d, embed_qtdi_in_tdi(d)


# --- inclusion specs ------------------------------------------------------------

@dataclass(frozen=True)
class InclusionSpec:
    kind: str  # tdi, qtdi
    delta: float | None = None
    d: DeltaVec | None = None

    @property
    def label(self) -> str:
        if self.kind == "tdi":
            return f"tdi:{self.delta!r}"
        return "qtdi:" + ",".join(repr(v) for v in self.d.d)

    @property
    def thresholds(self) -> tuple[float, ...]:
        return (self.delta,) if self.kind == "tdi" else self.d.d

    def select(self, f: Fan, D: np.ndarray, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(fan index, step) per row; ambiguous quasi-toric rows get AMBIGUOUS."""
        if self.kind == "tdi":
            idx = select_tdi(f, D, P, self.delta)
            return idx, np.full(len(idx), f.ambient_dim + 1, dtype=int)
        _check_d(f, self.d)
        return select_qtdi(f, D, P, self.d, strict=False)


def tdi(delta: float) -> InclusionSpec:
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    return InclusionSpec("tdi", delta=float(delta))


def qtdi(d: DeltaVec | tuple[float, ...] | list[float]) -> InclusionSpec:
    return InclusionSpec("qtdi", d=d if isinstance(d, DeltaVec) else DeltaVec(tuple(d)))


def parse_spec(text: str) -> InclusionSpec:
    """`tdi:1.0` or `qtdi:1.414,1.0`."""
    kind, sep, body = text.strip().partition(":")
    kind = kind.lower()
    if not sep or kind not in ("tdi", "qtdi"):
        raise InputError(f"inclusion spec must look like tdi:<delta> or qtdi:<d0,...>, got {text!r}")
    try:
        values = [float(v) for v in body.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"inclusion spec has a non-numeric threshold: {text!r}")
    if kind == "tdi":
        if len(values) != 1:
            raise InputError(f"tdi spec takes one delta, got {text!r}")
        return tdi(values[0])
    return qtdi(values)


# --- verification ---------------------------------------------------------------

def _ball(rng: np.random.Generator, m: int, n: int, radius: float) -> np.ndarray:
    U = rng.standard_normal((m, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return U * radius * rng.random((m, 1)) ** (1.0 / n)


def sample_points(f: Fan, thresholds: tuple[float, ...], n_samples: int, radius: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the ball plus points near every cone at threshold scale."""
    n = f.ambient_dim
    points = [_ball(rng, n_samples, n, radius)]
    for c in f.cones:
        seeds = _ball(rng, STRUCTURED_PER_CONE, n, radius)
        anchors = np.array([project_point(c, x).nearest_point for x in seeds])
        for scale in PERTURB_SCALES:
            for t in thresholds:
                U = rng.standard_normal((len(anchors), n))
                U /= np.linalg.norm(U, axis=1, keepdims=True)
                points.append(anchors + scale * t * U)
    return np.vstack(points)


def verify_embedding(f: Fan, inner: InclusionSpec, outer: InclusionSpec,
                     n_samples: int = 10_000, radius: float | None = None,
                     seed: int | None = None) -> EmbeddingReport:
    """Check inner(X) ⊆ outer(X) on sampled X.

    Polars reverse inclusion: C_outer° ⊇ C_inner° iff C_outer ⊆ C_inner, so
    each check is a lookup in the fan's containment matrix.
    """
    _require_complete(f)
    seed = config.current().seed if seed is None else seed
    thresholds = tuple(sorted(set(inner.thresholds + outer.thresholds)))
    if radius is None:
        radius = 10.0 * max(thresholds)
    rng = np.random.default_rng(seed)
    P = sample_points(f, thresholds, n_samples, radius, rng)
    D = distance_matrix(f, P)
    i_idx, i_step = inner.select(f, D, P)
    o_idx, o_step = outer.select(f, D, P)

    ambiguous = (i_idx == AMBIGUOUS) | (o_idx == AMBIGUOUS)
    ok = np.zeros(len(P), dtype=bool)
    clear = ~ambiguous
    ok[clear] = f.containment[o_idx[clear], i_idx[clear]]
    bad = np.flatnonzero(~ok)

    report = EmbeddingReport(inner=inner.label, outer=outer.label, samples=len(P),
                             radius=float(radius), seed=int(seed),
                             violations=int(np.sum(~ok & clear)), ambiguous=int(ambiguous.sum()))
    for p in bad[:MAX_WITNESSES]:
        report.witnesses.append(EmbeddingViolation(
            point=P[p].tolist(), inner_index=int(i_idx[p]), inner_step=int(i_step[p]),
            outer_index=int(o_idx[p]), outer_step=int(o_step[p])))
    if not report.ok:
        logger.info("embedding %s -> %s: %d violation(s), %d ambiguous",
                    inner.label, outer.label, report.violations, report.ambiguous)
    return report
