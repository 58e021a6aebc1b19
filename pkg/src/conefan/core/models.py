"""Report and result dataclasses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from conefan.core.errors import InputError

if TYPE_CHECKING:
    from conefan.core.cones import Cone
    from conefan.core.fans import Fan


# --- fans ---------------------------------------------------------------------

@dataclass
class FanViolation:
    kind: str  # duplicate, missing-face, intersection
    cones: list[int]
    detail: str
    witness: Cone | None = None  # the missing face or the offending intersection


@dataclass
class FanValidation:
    ambient_dim: int
    n_cones: int
    violations: list[FanViolation] = field(default_factory=list)
    fan: Fan | None = None

    @property
    def valid(self) -> bool:
        return not self.violations


@dataclass
class CompletenessReport:
    complete: bool
    method: str  # construction, sampled
    samples: int
    witness: list[float] | None = None


# --- inclusions -----------------------------------------------------------------

@dataclass
class InclusionRHS:
    cone: Cone  # the polar of the source cone
    source_cone_index: int
    step: int  # QTDI step 0..n, or n+1 for TDI evaluations
    kind: str = "qtdi"


@dataclass
class Certificate:
    status: str  # certified, refuted, unchecked
    method: str | None = None
    alpha: float | None = None
    witness: list[float] | None = None
    cones: list[int] | None = None
    worst_ratio: float | None = None  # sup dist(X, C^) / d_h over checked pairs
    pairs_checked: int = 0

    @property
    def certified(self) -> bool:
        return self.status == "certified"


def unchecked() -> Certificate:
    return Certificate(status="unchecked")


@dataclass
class DeltaVec:
    d: tuple[float, ...]
    certificate: Certificate = field(default_factory=unchecked)

    def __post_init__(self):
        self.d = tuple(float(v) for v in self.d)
        if not self.d:
            raise InputError("d must have at least one entry")
        if not all(np.isfinite(v) and v > 0 for v in self.d):
            raise InputError(f"d entries must be finite and strictly positive, got {list(self.d)}")

    def __len__(self) -> int:
        return len(self.d)

    def __getitem__(self, k: int) -> float:
        return self.d[k]

    @property
    def certified(self) -> bool:
        return self.certificate.certified


@dataclass
class AlphaCertificate:
    subset: tuple[int, ...]
    intersection_index: int
    alpha: float
    method: str  # exact-low-dim, sampled
    samples: int = 0
    restarts: int = 0
    witness: list[float] | None = None


@dataclass
class GlobalAlpha:
    alpha: float
    method: str
    subsets_checked: int
    worst: AlphaCertificate | None = None
    capped: bool = False


# --- embeddings -------------------------------------------------------------------

@dataclass
class EmbeddingViolation:
    point: list[float]
    inner_index: int
    inner_step: int
    outer_index: int
    outer_step: int


@dataclass
class EmbeddingReport:
    inner: str
    outer: str
    samples: int
    radius: float
    seed: int
    violations: int = 0
    ambiguous: int = 0
    witnesses: list[EmbeddingViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.ambiguous == 0


# --- networks ---------------------------------------------------------------------

@dataclass
class EndotacticResult:
    endotactic: bool
    method: str  # exact, sampled
    directions_checked: int
    witness: list[float] | None = None


@dataclass
class NetworkCheck:
    dim: int
    n_vertices: int
    n_edges: int
    stoich_dim: int
    reversible: bool
    weakly_reversible: bool
    endotactic: EndotacticResult


@dataclass
class Trajectory:
    t: np.ndarray  # (m,)
    x: np.ndarray  # (m, n)
    dx: np.ndarray  # (m, n)
    reason: str  # horizon, positivity-floor, blow-up
    horizon: float  # last time the solution was defined

    @property
    def dim(self) -> int:
        return int(self.x.shape[1])

    def __len__(self) -> int:
        return len(self.t)


@dataclass
class MembershipViolation:
    t: float
    point: list[float]  # X = log x(t)
    derivative: list[float]
    cone_index: int
    step: int


@dataclass
class MembershipReport:
    spec: str
    samples: int
    satisfied: int
    first_violation: MembershipViolation | None = None
    ambiguous: int = 0

    @property
    def fraction(self) -> float:
        return self.satisfied / self.samples if self.samples else 1.0


@dataclass
class PersistenceDiagnostics:
    tail_fraction: float
    tail_min: list[float]
    box_lo: list[float]
    box_hi: list[float]
    drift: float  # max distance of x(t) - x(0) from the stoichiometric subspace
