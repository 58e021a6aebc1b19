"""Reaction networks: structural checks, simulation, inclusion membership."""

from __future__ import annotations

import logging
import sys

from conefan.cli import EXIT_OK, EXIT_REFUTED, ConefanContext
from conefan.commands.fan import emit, load_fan
from conefan.commands.inclusion import parse_d
from conefan.core.embeddings import qtdi, tdi
from conefan.core.errors import NumericalError
from conefan.core.inclusions import certify
from conefan.core.networks import (
    EGraph, egraph_from_json, network_check, parse_rates, persistence_diagnostics,
    read_trajectory_csv, simulate, trajectory_frame, trajectory_membership, write_trajectory_csv,
)
from conefan.core.serialize import parse_vector, read_json
from conefan.display.json_out import print_json
from conefan.display.tables import display_membership, display_network, display_trajectory
from conefan.frames import (
    display_polars, export_tables, membership_frames, network_frames, trajectory_frames,
)

logger = logging.getLogger(__name__)


def load_egraph(file: str) -> EGraph:
    return egraph_from_json(read_json(file))


def run_check(ctx: ConefanContext, file: str) -> int:
    check = network_check(load_egraph(file), ctx.seed)
    emit(ctx, check, lambda: network_frames(check), lambda: display_network(check))
    return EXIT_OK


def run_simulate(ctx: ConefanContext, file: str, x0: str, horizon: float, rates: str) -> int:
    g = load_egraph(file)
    x = parse_vector(x0, "x0", g.dim)
    k = parse_rates(rates, g, ctx.seed)
    try:
        traj = simulate(g, k, x, horizon, samples=ctx.samples)
    except NumericalError as e:
        if e.partial is not None and ctx.output:
            write_trajectory_csv(e.partial, ctx.output)
            logger.warning("wrote the partial trajectory to %s", ctx.output)
        raise

    # trajectories default to CSV
    if ctx.fmt in (None, "csv"):
        if ctx.output:
            write_trajectory_csv(traj, ctx.output)
        else:
            sys.stdout.write(trajectory_frame(traj).write_csv())
    elif ctx.fmt == "json":
        print_json({"reason": traj.reason, "horizon": traj.horizon,
                    "diagnostics": persistence_diagnostics(traj, g),
                    "trajectory": trajectory_frame(traj).to_dicts()}, ctx.output)
    elif ctx.fmt == "table":
        display_trajectory(traj, persistence_diagnostics(traj, g))
    elif ctx.fmt == "polars":
        display_polars(trajectory_frames(traj))
    else:
        export_tables(trajectory_frames(traj), ctx.fmt, ctx.output)
    return EXIT_OK


def run_membership(ctx: ConefanContext, traj_file: str, fan_spec: str,
                   tdi_delta: float | None, qtdi_d: str | None) -> int:
    f = load_fan(ctx, fan_spec)
    traj = read_trajectory_csv(traj_file)
    if tdi_delta is not None:
        spec = tdi(tdi_delta)
    else:
        d = certify(f, parse_d(f, qtdi_d), ctx.seed)
        if not d.certified:
            logger.warning("d=%s is %s; ambiguous samples are counted, not resolved",
                           list(d.d), d.certificate.status)
        spec = qtdi(d)
    report = trajectory_membership(traj, f, spec)
    emit(ctx, report, lambda: membership_frames(report), lambda: display_membership(report))
    return EXIT_OK if report.satisfied == report.samples else EXIT_REFUTED
