"""Public Python API returning ibis tables for programmatic use.

Usage:
    import conefan.api as cf

    # Fans: dict[str, ibis.Table] (summary, cones)
    cf.fan("builtin:coordinate-2d")["cones"].to_polars()

    # Embedding thresholds and their certificate
    tables = cf.embed("builtin:coordinate-2d", delta=1.0)
    tables["d"].to_polars()

    # Sampled containment check
    cf.verify("builtin:three-lines", "tdi:1", "qtdi:2,1").to_pyarrow()

    # Networks: cf.network(), cf.simulate(), cf.membership()
"""

from __future__ import annotations

import ibis

from conefan.cli import ConefanContext


def _ctx(*, seed: int | None = None, samples: int | None = None) -> ConefanContext:
    return ConefanContext(seed, None, samples, no_cache=False, verbose=False, fmt=None, output=None)


def fan(spec: str, **kwargs) -> dict[str, ibis.Table]:
    """A fan from `builtin:<name>` or a JSON file."""
    ctx = _ctx(**kwargs)
    from conefan.commands.fan import load_fan
    from conefan.frames import fan_frames
    return fan_frames(load_fan(ctx, spec))


def validate(path: str, **kwargs) -> dict[str, ibis.Table]:
    """Face closure, pairwise intersections and completeness of a fan file."""
    ctx = _ctx(**kwargs)
    from conefan.commands.fan import fetch_validation
    from conefan.frames import validation_frames
    report, completeness = fetch_validation(ctx, path)
    tables = validation_frames(report)
    if completeness is not None:
        tables["completeness"] = ibis.memtable([{
            "complete": completeness.complete, "method": completeness.method,
            "samples": completeness.samples,
        }])
    return tables


def certify(spec: str, d: list[float], **kwargs) -> dict[str, ibis.Table]:
    """Well-definedness certificate for thresholds d."""
    ctx = _ctx(**kwargs)
    from conefan.commands.fan import load_fan
    from conefan.core.inclusions import certify as certify_d
    from conefan.core.models import DeltaVec
    from conefan.frames import delta_frames
    return delta_frames(certify_d(load_fan(ctx, spec), DeltaVec(tuple(d)), ctx.seed))


def embed(spec: str, delta: float, **kwargs) -> dict[str, ibis.Table]:
    """Certified quasi-toric thresholds containing the toric inclusion at delta."""
    ctx = _ctx(**kwargs)
    from conefan.commands.fan import load_fan
    from conefan.core.embeddings import embed_tdi_in_qtdi
    from conefan.frames import delta_frames
    return delta_frames(embed_tdi_in_qtdi(load_fan(ctx, spec), delta, ctx.seed))


def verify(spec: str, inner: str, outer: str, radius: float | None = None,
           **kwargs) -> ibis.Table:
    """Sampled inner(X) ⊆ outer(X) check; the summary table."""
    ctx = _ctx(**kwargs)
    from conefan.commands.fan import load_fan
    from conefan.core.embeddings import parse_spec, verify_embedding
    from conefan.frames import embedding_frames
    report = verify_embedding(load_fan(ctx, spec), parse_spec(inner), parse_spec(outer),
                              n_samples=ctx.samples or 10_000, radius=radius, seed=ctx.seed)
    return embedding_frames(report)["summary"]


def network(path: str, **kwargs) -> dict[str, ibis.Table]:
    """Reversibility, weak reversibility and endotacticity of an E-graph file."""
    ctx = _ctx(**kwargs)
    from conefan.commands.net import load_egraph
    from conefan.core.networks import network_check
    from conefan.frames import network_frames
    return network_frames(network_check(load_egraph(path), ctx.seed))


def simulate(path: str, x0: list[float], T: float, rates: str = "1",
             **kwargs) -> ibis.Table:
    """Mass-action trajectory as a t, x1.., dx1.. table."""
    ctx = _ctx(**kwargs)
    from conefan.commands.net import load_egraph
    from conefan.core.networks import parse_rates, simulate as integrate
    from conefan.frames import trajectory_frames
    g = load_egraph(path)
    traj = integrate(g, parse_rates(rates, g, ctx.seed), x0, T, samples=ctx.samples)
    return trajectory_frames(traj)["trajectory"]


def membership(traj_path: str, spec: str, inclusion: str, **kwargs) -> dict[str, ibis.Table]:
    """Fraction of trajectory samples with dx/dt in F(log x); `inclusion` is
    `tdi:<delta>` or `qtdi:<d0,...>`."""
    ctx = _ctx(**kwargs)
    from conefan.commands.fan import load_fan
    from conefan.core.embeddings import parse_spec
    from conefan.core.networks import read_trajectory_csv, trajectory_membership
    from conefan.frames import membership_frames
    report = trajectory_membership(read_trajectory_csv(traj_path), load_fan(ctx, spec),
                                   parse_spec(inclusion))
    return membership_frames(report)
