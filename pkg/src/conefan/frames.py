"""Convert results to ibis memtables and render them.

Per-result functions return dict[str, ibis.Table], so any backend works:

    tables["cones"].to_polars()
    tables["witnesses"].to_pyarrow()
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Sequence

import ibis

from conefan.core.cones import Cone, ProjectionResult
from conefan.core.fans import Fan
from conefan.core.models import (
    AlphaCertificate,
    Certificate,
    DeltaVec,
    EmbeddingReport,
    FanValidation,
    InclusionRHS,
    MembershipReport,
    NetworkCheck,
    Trajectory,
)


def _mt(rows: list[dict]) -> ibis.Table | None:
    """Create a memtable from rows, or None if empty."""
    if not rows:
        return None
    return ibis.memtable(rows)


def _vec(v) -> str:
    return ",".join(f"{x:.12g}" for x in v)


def _cone_rows(cones: Sequence[Cone]) -> list[dict]:
    return [
        {"index": i, "dim": c.dim, "generators": ";".join(_vec(g) for g in c.generators),
         "halfspaces": ";".join(_vec(a) for a in c.halfspaces)}
        for i, c in enumerate(cones)
    ]


def cone_frames(cones: Sequence[Cone]) -> dict[str, ibis.Table]:
    t = _mt(_cone_rows(cones))
    return {"cones": t} if t is not None else {}


def projection_frames(point, result: ProjectionResult) -> dict[str, ibis.Table]:
    return {"projection": ibis.memtable([{
        "point": _vec(point), "nearest_point": _vec(result.nearest_point),
        "distance": result.distance, "active_face_dim": result.active_face_dim,
    }])}


def fan_frames(f: Fan) -> dict[str, ibis.Table]:
    tables: dict[str, ibis.Table] = {}
    tables["summary"] = ibis.memtable([{
        "ambient_dim": f.ambient_dim,
        "cones": len(f.cones),
        "maximal": len(f.maximal),
        "complete": f.complete,
        "completeness": f.completeness,
        "fingerprint": f.fingerprint,
    }])
    tables["cones"] = ibis.memtable(_cone_rows(f.cones))
    return tables


def validation_frames(report: FanValidation) -> dict[str, ibis.Table]:
    tables: dict[str, ibis.Table] = {}
    tables["summary"] = ibis.memtable([{
        "ambient_dim": report.ambient_dim,
        "cones": report.n_cones,
        "valid": report.valid,
        "violations": len(report.violations),
    }])
    t = _mt([{"kind": v.kind, "cones": ",".join(map(str, v.cones)), "detail": v.detail}
             for v in report.violations])
    if t is not None:
        tables["violations"] = t
    return tables


def delta_frames(d: DeltaVec) -> dict[str, ibis.Table]:
    cert: Certificate = d.certificate
    return {
        "d": ibis.memtable([{"k": k, "d_k": v} for k, v in enumerate(d.d)]),
        "summary": ibis.memtable([{
            "status": cert.status,
            "method": cert.method or "",
            "alpha": cert.alpha if cert.alpha is not None else float("nan"),
            "pairs_checked": cert.pairs_checked,
            "witness": _vec(cert.witness) if cert.witness else "",
        }]),
    }


def rhs_frames(rhs: InclusionRHS, point) -> dict[str, ibis.Table]:
    return {
        "summary": ibis.memtable([{
            "kind": rhs.kind, "point": _vec(point),
            "source_cone_index": rhs.source_cone_index, "step": rhs.step,
        }]),
        "polar": ibis.memtable(_cone_rows([rhs.cone])),
    }


def alpha_frames(cert: AlphaCertificate) -> dict[str, ibis.Table]:
    return {"summary": ibis.memtable([{
        "subset": ",".join(map(str, cert.subset)),
        "intersection_index": cert.intersection_index,
        "alpha": cert.alpha, "method": cert.method,
        "samples": cert.samples, "restarts": cert.restarts,
        "witness": _vec(cert.witness) if cert.witness else "",
    }])}


def embedding_frames(report: EmbeddingReport) -> dict[str, ibis.Table]:
    tables: dict[str, ibis.Table] = {}
    tables["summary"] = ibis.memtable([{
        "inner": report.inner, "outer": report.outer, "samples": report.samples,
        "radius": report.radius, "seed": report.seed,
        "violations": report.violations, "ambiguous": report.ambiguous,
    }])
    t = _mt([{"point": _vec(w.point), "inner_index": w.inner_index, "inner_step": w.inner_step,
              "outer_index": w.outer_index, "outer_step": w.outer_step}
             for w in report.witnesses])
    if t is not None:
        tables["witnesses"] = t
    return tables


def network_frames(check: NetworkCheck) -> dict[str, ibis.Table]:
    endo = check.endotactic
    return {"summary": ibis.memtable([{
        "dim": check.dim, "vertices": check.n_vertices, "edges": check.n_edges,
        "stoich_dim": check.stoich_dim, "reversible": check.reversible,
        "weakly_reversible": check.weakly_reversible, "endotactic": endo.endotactic,
        "endotactic_method": endo.method,
        "witness": _vec(endo.witness) if endo.witness else "",
    }])}


def trajectory_frames(traj: Trajectory) -> dict[str, ibis.Table]:
    n = traj.dim
    rows = []
    for j in range(len(traj)):
        row = {"t": float(traj.t[j])}
        row.update({f"x{i + 1}": float(traj.x[j, i]) for i in range(n)})
        row.update({f"dx{i + 1}": float(traj.dx[j, i]) for i in range(n)})
        rows.append(row)
    return {"trajectory": ibis.memtable(rows)}


def membership_frames(report: MembershipReport) -> dict[str, ibis.Table]:
    tables: dict[str, ibis.Table] = {"summary": ibis.memtable([{
        "spec": report.spec, "samples": report.samples, "satisfied": report.satisfied,
        "fraction": report.fraction, "ambiguous": report.ambiguous,
    }])}
    v = report.first_violation
    if v is not None:
        tables["first_violation"] = ibis.memtable([{
            "t": v.t, "point": _vec(v.point), "derivative": _vec(v.derivative),
            "cone_index": v.cone_index, "step": v.step,
        }])
    return tables


def display_polars(tables: dict[str, ibis.Table]) -> None:
    """Print all tables as polars DataFrames."""
    for name, table in tables.items():
        header = name.upper().replace("_", " ")
        print(f"\n=== {header} ===")
        df = table.to_polars()
        if name == "summary":
            print(df.unpivot())
        else:
            print(df)
    print()


def export_tables(tables: dict[str, ibis.Table], fmt: str, output: str | None = None) -> None:
    """csv to stdout (or `output`), parquet to one file per table."""
    if fmt == "csv":
        if output and len(tables) == 1:
            next(iter(tables.values())).to_polars().write_csv(output)
            return
        for name, table in tables.items():
            sys.stdout.write(f"# {name}\n")
            sys.stdout.write(table.to_polars().write_csv())
            sys.stdout.write("\n")
    elif fmt == "parquet":
        stem = Path(output).with_suffix("") if output else None
        for name, table in tables.items():
            path = f"{stem}-{name}.parquet" if stem else f"{name}.parquet"
            table.to_polars().write_parquet(path)
            sys.stderr.write(f"Wrote {path}\n")
