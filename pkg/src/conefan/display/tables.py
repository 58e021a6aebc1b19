"""Rich table formatters per command."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from conefan.core.cones import Cone, ProjectionResult
from conefan.core.fans import Fan
from conefan.core.models import (
    AlphaCertificate, Certificate, CompletenessReport, DeltaVec, EmbeddingReport,
    FanValidation, InclusionRHS, MembershipReport, NetworkCheck, PersistenceDiagnostics,
    Trajectory,
)
from conefan.display.charts import sparkline

console = Console()


def format_vec(v: Sequence[float] | np.ndarray | None, digits: int = 4) -> str:
    if v is None:
        return "-"
    return "(" + ", ".join(f"{x:.{digits}g}" for x in np.asarray(v, dtype=float)) + ")"


def _status(ok: bool, yes: str = "yes", no: str = "no") -> str:
    return f"[green bold]{yes}[/]" if ok else f"[red bold]{no}[/]"


def display_cone(c: Cone, title: str = "Cone") -> None:
    console.print()
    console.print(Panel(f"[bold]{title}[/]", subtitle=f"R^{c.ambient_dim}  dim {c.dim}"))
    table = Table(border_style="dim")
    table.add_column("Generators", style="cyan")
    table.add_column("Facet normals (a . x <= 0)", style="yellow")
    for k in range(max(len(c.generators), len(c.halfspaces))):
        g = format_vec(c.generators[k]) if k < len(c.generators) else ""
        a = format_vec(c.halfspaces[k]) if k < len(c.halfspaces) else ""
        table.add_row(g, a)
    console.print(table)
    console.print()


def display_cones(cones: Sequence[Cone], title: str) -> None:
    console.print()
    table = Table(title=title, border_style="dim")
    table.add_column("#", justify="right")
    table.add_column("Dim", justify="right")
    table.add_column("Generators", style="cyan")
    for i, c in enumerate(cones):
        table.add_row(str(i), str(c.dim), "  ".join(format_vec(g, 3) for g in c.generators) or "{0}")
    console.print(table)
    console.print()


def display_fan(f: Fan, completeness: CompletenessReport | None = None) -> None:
    console.print()
    dims = [c.dim for c in f.cones]
    counts = "  ".join(f"dim {k}: {dims.count(k)}" for k in sorted(set(dims)))
    console.print(Panel(
        f"[bold]Fan in R^{f.ambient_dim}[/] — {len(f.cones)} cones",
        subtitle=f"{counts}  |  complete: {f.complete} ({f.completeness})",
    ))
    display_cones(f.cones, "Cones")
    if completeness is not None and not completeness.complete:
        console.print(f"[red]Uncovered direction:[/] {format_vec(completeness.witness)}")


def display_validation(report: FanValidation, completeness: CompletenessReport | None) -> None:
    console.print()
    console.print(Panel(
        f"[bold]Fan validation[/] — {report.n_cones} cones in R^{report.ambient_dim}",
        subtitle=f"valid: {report.valid}"
                 + (f"  complete: {completeness.complete} ({completeness.method})" if completeness else ""),
    ))
    if report.violations:
        vt = Table(title="Violations", border_style="dim")
        vt.add_column("Kind", style="red")
        vt.add_column("Cones")
        vt.add_column("Detail")
        for v in report.violations:
            vt.add_row(v.kind, ", ".join(map(str, v.cones)), v.detail)
        console.print(vt)
    else:
        console.print(f"  {_status(True, 'face closure and pairwise intersections hold')}")
    if completeness is not None and not completeness.complete:
        console.print(f"  [red]Uncovered direction:[/] {format_vec(completeness.witness)}")
    console.print()


def display_rhs(rhs: InclusionRHS, point: Sequence[float]) -> None:
    console.print()
    step = "TDI" if rhs.kind == "tdi" else f"step {rhs.step}"
    console.print(Panel(
        f"[bold]F(X)[/] at X = {format_vec(point)}",
        subtitle=f"{rhs.kind.upper()}  source cone #{rhs.source_cone_index}  {step}",
    ))
    display_cone(rhs.cone, title="Polar of the source cone")


def display_certificate(cert: Certificate, d: DeltaVec) -> None:
    console.print()
    ok = cert.certified
    console.print(Panel(
        f"[bold]Well-definedness[/] of d = {format_vec(d.d)}",
        subtitle=f"{cert.status}  ({cert.method})  pairs checked: {cert.pairs_checked}",
        border_style="green" if ok else "red",
    ))
    table = Table(show_header=False, border_style="dim")
    table.add_column("Metric", style="bold")
    table.add_column("Value")
    table.add_row("Status", _status(ok, cert.status, cert.status))
    if cert.worst_ratio is not None:
        table.add_row("Worst sup / d_h", f"{cert.worst_ratio:.6g}")
    if cert.alpha is not None:
        table.add_row("Alpha", f"{cert.alpha:.6g}")
    if cert.cones:
        table.add_row("Cone pair", ", ".join(map(str, cert.cones)))
    if cert.witness:
        table.add_row("Witness X", format_vec(cert.witness))
    console.print(table)
    console.print()


def display_alpha(cert: AlphaCertificate) -> None:
    console.print()
    table = Table(title="Alpha certificate", show_header=False, border_style="dim")
    table.add_column("Metric", style="bold")
    table.add_column("Value")
    table.add_row("Subset", ", ".join(map(str, cert.subset)))
    table.add_row("Intersection", f"#{cert.intersection_index}")
    table.add_row("Alpha", f"{cert.alpha:.9g}")
    table.add_row("Method", cert.method)
    if cert.samples:
        table.add_row("Directions", f"{cert.samples:,}  (+{cert.restarts} refinements)")
    if cert.witness:
        table.add_row("Witness X", format_vec(cert.witness))
    console.print(table)
    console.print()


def display_delta(d: DeltaVec, title: str) -> None:
    console.print()
    table = Table(title=title, border_style="dim")
    table.add_column("k", justify="right")
    table.add_column("d_k", justify="right", style="cyan")
    for k, v in enumerate(d.d):
        table.add_row(str(k), f"{v:.9g}")
    console.print(table)
    cert = d.certificate
    alpha = f"  alpha {cert.alpha:.6g}" if cert.alpha is not None else ""
    console.print(f"  {_status(cert.certified, cert.status, cert.status)}  ({cert.method}){alpha}")
    console.print()


def display_embedding(report: EmbeddingReport) -> None:
    console.print()
    console.print(Panel(
        f"[bold]{report.inner}[/] ⊆ [bold]{report.outer}[/]",
        subtitle=f"{report.samples:,} points  radius {report.radius:g}  seed {report.seed}",
        border_style="green" if report.ok else "red",
    ))
    table = Table(show_header=False, border_style="dim")
    table.add_column("Metric", style="bold")
    table.add_column("Value")
    table.add_row("Violations", _status(report.violations == 0, "0", str(report.violations)))
    table.add_row("Ambiguous", _status(report.ambiguous == 0, "0", str(report.ambiguous)))
    console.print(table)
    if report.witnesses:
        wt = Table(title="Witnesses", border_style="dim")
        wt.add_column("X")
        wt.add_column("Inner cone (step)", justify="right")
        wt.add_column("Outer cone (step)", justify="right")
        for w in report.witnesses:
            wt.add_row(format_vec(w.point), f"#{w.inner_index} ({w.inner_step})",
                       f"#{w.outer_index} ({w.outer_step})")
        console.print(wt)
    console.print()


def display_network(check: NetworkCheck) -> None:
    console.print()
    console.print(Panel(
        f"[bold]E-graph[/] in R^{check.dim}",
        subtitle=f"{check.n_vertices} complexes  {check.n_edges} reactions  dim S = {check.stoich_dim}",
    ))
    table = Table(show_header=False, border_style="dim")
    table.add_column("Property", style="bold")
    table.add_column("Verdict")
    table.add_row("Reversible", _status(check.reversible))
    table.add_row("Weakly reversible", _status(check.weakly_reversible))
    endo = check.endotactic
    table.add_row("Endotactic", f"{_status(endo.endotactic)}  ({endo.method}, "
                                f"{endo.directions_checked:,} directions)")
    if endo.witness:
        table.add_row("Violating direction", format_vec(endo.witness))
    console.print(table)
    console.print()


def display_trajectory(traj: Trajectory, diagnostics: PersistenceDiagnostics) -> None:
    console.print()
    console.print(Panel(
        f"[bold]Trajectory[/] — {len(traj)} samples",
        subtitle=f"stopped at t = {traj.horizon:.6g} ({traj.reason})",
    ))
    table = Table(border_style="dim")
    table.add_column("Species", style="cyan")
    table.add_column("x(0)", justify="right")
    table.add_column("x(end)", justify="right")
    table.add_column("Tail min", justify="right")
    table.add_column("Trend")
    for i in range(traj.dim):
        table.add_row(f"x{i + 1}", f"{traj.x[0, i]:.6g}", f"{traj.x[-1, i]:.6g}",
                      f"{diagnostics.tail_min[i]:.6g}", sparkline(traj.x[:, i], width=40))
    console.print(table)
    console.print(f"  Stoichiometric drift: {diagnostics.drift:.3g}")
    console.print()


def display_membership(report: MembershipReport) -> None:
    console.print()
    ok = report.satisfied == report.samples
    console.print(Panel(
        f"[bold]Trajectory membership[/] in {report.spec}",
        subtitle=f"{report.satisfied}/{report.samples} samples ({100 * report.fraction:.1f}%)",
        border_style="green" if ok else "red",
    ))
    if report.first_violation:
        v = report.first_violation
        console.print(f"  First violation at t = {v.t:.6g}: X = {format_vec(v.point)}, "
                      f"dx/dt = {format_vec(v.derivative)}, cone #{v.cone_index} (step {v.step})")
    if report.ambiguous:
        console.print(f"  [yellow]{report.ambiguous} ambiguous sample(s)[/]")
    console.print()


def display_projection(point: Sequence[float], result: ProjectionResult) -> None:
    console.print()
    table = Table(title="Projection", show_header=False, border_style="dim")
    table.add_column("Metric", style="bold")
    table.add_column("Value")
    table.add_row("X", format_vec(point))
    table.add_row("Nearest point", format_vec(result.nearest_point))
    table.add_row("Distance", f"{result.distance:.9g}")
    table.add_row("Active face dim", str(result.active_face_dim))
    console.print(table)
    console.print()
