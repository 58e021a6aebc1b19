"""Single-cone operations: polar, projection, faces."""

from __future__ import annotations

from conefan.cli import EXIT_OK, ConefanContext
from conefan.commands.fan import emit
from conefan.core.cones import Cone, cone_from_json, project_point
from conefan.core.serialize import parse_vector, read_json
from conefan.display.tables import display_cone, display_cones, display_projection
from conefan.frames import cone_frames, projection_frames


def load_cone(file: str) -> Cone:
    return cone_from_json(read_json(file))


def run_polar(ctx: ConefanContext, file: str) -> int:
    p = load_cone(file).polar
    emit(ctx, p, lambda: cone_frames([p]), lambda: display_cone(p, title="Polar cone"))
    return EXIT_OK


def run_project(ctx: ConefanContext, file: str, point: str) -> int:
    c = load_cone(file)
    x = parse_vector(point, "point", c.ambient_dim)
    result = project_point(c, x)
    emit(ctx, result, lambda: projection_frames(x, result), lambda: display_projection(x, result))
    return EXIT_OK


def run_faces(ctx: ConefanContext, file: str, k: int) -> int:
    found = load_cone(file).faces(k)
    emit(ctx, found, lambda: cone_frames(found),
         lambda: display_cones(found, f"{k}-dimensional faces"))
    return EXIT_OK
