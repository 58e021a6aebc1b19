"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations

from typing import Any


class ConefanError(Exception):
    pass


class InputError(ConefanError):
    pass


class DomainError(InputError):
    pass


class PreconditionError(ConefanError):
    pass


class FanInvariantError(ConefanError):
    pass


class NumericalError(ConefanError):
    """Iterative routine failed; `diagnostics` keeps whatever state it reached."""

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None,
                 partial: Any = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        self.partial = partial


class AmbiguityError(ConefanError):
    """Two cones of the same dimension qualified at one QTDI step."""

    def __init__(self, step: int, indices: tuple[int, ...], point):
        self.step = step
        self.indices = tuple(indices)
        self.point = [float(v) for v in point]
        super().__init__(
            f"step {step} is ambiguous: cones {list(self.indices)} all qualify "
            f"at X={self.point}"
        )
