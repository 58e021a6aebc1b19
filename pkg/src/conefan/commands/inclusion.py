"""Inclusion right-hand sides, well-definedness certificates and alpha."""

from __future__ import annotations

import logging

from rich.status import Status

from conefan.cli import EXIT_OK, EXIT_REFUTED, ConefanContext, err_console
from conefan.commands.fan import emit, load_fan
from conefan.core.fans import Fan
from conefan.core.inclusions import certify, estimate_alpha, eval_qtdi, eval_tdi
from conefan.core.models import DeltaVec, InclusionRHS
from conefan.core.serialize import parse_indices, parse_vector
from conefan.display.tables import display_alpha, display_certificate, display_rhs
from conefan.frames import alpha_frames, delta_frames, rhs_frames

logger = logging.getLogger(__name__)


def parse_d(f: Fan, d_text: str) -> DeltaVec:
    return DeltaVec(tuple(parse_vector(d_text, "d", f.ambient_dim)))


def _emit_rhs(ctx: ConefanContext, f: Fan, rhs: InclusionRHS, x) -> None:
    data = {
        "point": x,
        "kind": rhs.kind,
        "step": rhs.step,
        "source_cone_index": rhs.source_cone_index,
        "source_cone": f.cones[rhs.source_cone_index],
        "rhs": rhs.cone,
    }
    emit(ctx, data, lambda: rhs_frames(rhs, x), lambda: display_rhs(rhs, x))


def run_tdi_eval(ctx: ConefanContext, fan_spec: str, delta: float, point: str) -> int:
    f = load_fan(ctx, fan_spec)
    x = parse_vector(point, "point", f.ambient_dim)
    _emit_rhs(ctx, f, eval_tdi(f, delta, x), x)
    return EXIT_OK


def _emit_certificate(ctx: ConefanContext, d: DeltaVec) -> None:
    emit(ctx, {"d": d.d, "certificate": d.certificate},
         lambda: delta_frames(d), lambda: display_certificate(d.certificate, d))


def run_qtdi_eval(ctx: ConefanContext, fan_spec: str, d_text: str, point: str,
                  unchecked: bool) -> int:
    f = load_fan(ctx, fan_spec)
    d = parse_d(f, d_text)
    x = parse_vector(point, "point", f.ambient_dim)
    if not unchecked:
        d = certify(f, d, ctx.seed)
        if not d.certified:
            logger.warning("d=%s is not well-defined on this fan", list(d.d))
            _emit_certificate(ctx, d)
            return EXIT_REFUTED
    _emit_rhs(ctx, f, eval_qtdi(f, d, x, allow_unchecked=unchecked), x)
    return EXIT_OK


def run_qtdi_certify(ctx: ConefanContext, fan_spec: str, d_text: str) -> int:
    f = load_fan(ctx, fan_spec)
    with Status("Certifying thresholds...", console=err_console):
        d = certify(f, parse_d(f, d_text), ctx.seed)
    _emit_certificate(ctx, d)
    return EXIT_OK if d.certified else EXIT_REFUTED


def run_alpha(ctx: ConefanContext, fan_spec: str, subset: str) -> int:
    f = load_fan(ctx, fan_spec)
    cert = estimate_alpha(f, parse_indices(subset), ctx.seed)
    emit(ctx, cert, lambda: alpha_frames(cert), lambda: display_alpha(cert))
    return EXIT_OK
