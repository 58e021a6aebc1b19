"""Fan loading, validation and construction."""

from __future__ import annotations

import logging
from typing import Any, Callable

import ibis

from conefan.cli import EXIT_OK, EXIT_REFUTED, ConefanContext
from conefan.core.catalog import builtin
from conefan.core.errors import InputError
from conefan.core.fans import (
    Fan, cones_from_json, fan_from_json, hyperplane_fan, is_complete, validate_fan,
)
from conefan.core.models import CompletenessReport, FanValidation
from conefan.core.serialize import read_json
from conefan.display.json_out import print_json
from conefan.display.tables import display_fan, display_validation
from conefan.frames import display_polars, export_tables, fan_frames, validation_frames

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"


def load_fan(ctx: ConefanContext, spec: str) -> Fan:
    """`builtin:<name>` or a fan JSON file."""
    if spec.startswith(BUILTIN_PREFIX):
        return builtin(spec[len(BUILTIN_PREFIX):])
    return fan_from_json(read_json(spec), samples=ctx.samples, seed=ctx.seed)


def emit(ctx: ConefanContext, data: Any, frames: Callable[[], dict[str, ibis.Table]],
         display: Callable[[], None]) -> None:
    """Route a result to JSON, rich tables, or csv/parquet export."""
    if ctx.json_output:
        print_json(data, ctx.output)
    elif ctx.fmt == "table":
        display()
    elif ctx.fmt == "polars":
        display_polars(frames())
    else:
        export_tables(frames(), ctx.fmt, ctx.output)


def fetch_validation(ctx: ConefanContext, file: str) -> tuple[FanValidation, CompletenessReport | None]:
    obj = read_json(file)
    if isinstance(obj, dict) and "hyperplanes" in obj:
        f = hyperplane_fan(obj["hyperplanes"], obj.get("ambient_dim"))
        return validate_fan(f.cones), is_complete(f)
    report = validate_fan(cones_from_json(obj))
    if not report.valid:
        return report, None
    return report, is_complete(report.fan, ctx.samples, ctx.seed)


def run_validate(ctx: ConefanContext, file: str) -> int:
    report, completeness = fetch_validation(ctx, file)
    ok = report.valid and completeness is not None and completeness.complete
    if not ok:
        logger.info("fan in %s failed validation", file)

    def frames():
        tables = validation_frames(report)
        if completeness is not None:
            tables["completeness"] = ibis.memtable([{
                "complete": completeness.complete, "method": completeness.method,
                "samples": completeness.samples,
            }])
        return tables

    emit(ctx, {"valid": report.valid, "violations": report.violations,
               "completeness": completeness, "fan": report.fan},
         frames, lambda: display_validation(report, completeness))
    return EXIT_OK if ok else EXIT_REFUTED


def run_from_hyperplanes(ctx: ConefanContext, file: str) -> int:
    obj = read_json(file)
    if isinstance(obj, list):
        obj = {"hyperplanes": obj}
    if not isinstance(obj, dict) or "hyperplanes" not in obj:
        raise InputError(f'{file}: expected {{"hyperplanes": [[...], ...]}}')
    f = hyperplane_fan(obj["hyperplanes"], obj.get("ambient_dim"))
    emit(ctx, f, lambda: fan_frames(f), lambda: display_fan(f))
    return EXIT_OK


def run_builtin(ctx: ConefanContext, name: str) -> int:
    f = builtin(name)
    emit(ctx, f, lambda: fan_frames(f), lambda: display_fan(f))
    return EXIT_OK
