"""Embedding constructions and their sampled verification."""

from __future__ import annotations

import ibis
from rich.status import Status

from conefan.cli import EXIT_OK, EXIT_REFUTED, ConefanContext, err_console
from conefan.commands.fan import emit, load_fan
from conefan.commands.inclusion import parse_d
from conefan.core.embeddings import (
    embed_qtdi_in_tdi, embed_tdi_in_qtdi, inflate_d, parse_spec, verify_embedding,
)
from conefan.core.models import DeltaVec
from conefan.core.serialize import parse_vector
from conefan.display.tables import console, display_delta, display_embedding
from conefan.frames import delta_frames, embedding_frames

DEFAULT_VERIFY_SAMPLES = 10_000


def _emit_delta(ctx: ConefanContext, d: DeltaVec, title: str, **extra) -> None:
    emit(ctx, {**extra, "d": d.d, "certificate": d.certificate},
         lambda: delta_frames(d), lambda: display_delta(d, title))


def run_tdi_to_qtdi(ctx: ConefanContext, fan_spec: str, delta: float) -> int:
    f = load_fan(ctx, fan_spec)
    with Status(f"Constructing thresholds for delta = {delta:g}...", console=err_console):
        d = embed_tdi_in_qtdi(f, delta, ctx.seed)
    _emit_delta(ctx, d, f"Quasi-toric thresholds for delta = {delta:g}", delta=delta)
    return EXIT_OK


def run_inflate(ctx: ConefanContext, fan_spec: str, d_text: str) -> int:
    f = load_fan(ctx, fan_spec)
    given = parse_d(f, d_text)
    with Status("Inflating thresholds...", console=err_console):
        d = inflate_d(f, given, ctx.seed)
    _emit_delta(ctx, d, "Inflated thresholds", given=given.d)
    return EXIT_OK


def run_qtdi_to_tdi(ctx: ConefanContext, d_text: str) -> int:
    d = DeltaVec(tuple(parse_vector(d_text, "d")))
    delta = embed_qtdi_in_tdi(d)
    emit(ctx, {"d": d.d, "delta": delta},
         lambda: {"summary": ibis.memtable([{"d": ",".join(map(repr, d.d)), "delta": delta}])},
         lambda: console.print(f"\n  delta = max(d) = [cyan bold]{delta:.9g}[/]\n"))
    return EXIT_OK


def run_verify(ctx: ConefanContext, fan_spec: str, inner: str, outer: str,
               radius: float | None) -> int:
    f = load_fan(ctx, fan_spec)
    with Status(f"Verifying {inner} -> {outer}...", console=err_console):
        report = verify_embedding(f, parse_spec(inner), parse_spec(outer),
                                  n_samples=ctx.samples or DEFAULT_VERIFY_SAMPLES,
                                  radius=radius, seed=ctx.seed)
    emit(ctx, report, lambda: embedding_frames(report), lambda: display_embedding(report))
    return EXIT_OK if report.ok else EXIT_REFUTED
