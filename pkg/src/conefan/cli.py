"""CLI entry point: click group with global options and subcommand routing."""

from __future__ import annotations

import logging

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from conefan.core import config
from conefan.core.errors import ConefanError

console = Console()
err_console = Console(stderr=True)

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REFUTED = 2


class ConefanContext:
    """Shared context passed to all commands."""

    def __init__(self, seed: int | None, tolerance: float | None, samples: int | None,
                 no_cache: bool, verbose: bool, fmt: str | None, output: str | None):
        self.seed = seed
        self.tolerance = tolerance
        self.samples = samples
        self.no_cache = no_cache
        self.verbose = verbose
        self.fmt = fmt
        self.output = output

    @property
    def json_output(self) -> bool:
        return self.fmt in (None, "json")


class ConefanGroup(click.Group):
    """Maps library errors to exit code 1 with a message on stderr."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ConefanError as e:
            err_console.print(f"[red]Error:[/] {escape(str(e))}", soft_wrap=True)
            ctx.exit(EXIT_ERROR)
        except click.UsageError as e:
            e.show()
            ctx.exit(EXIT_ERROR)


def _global_options(f):
    """Common global options decorator."""
    f = click.option("--seed", type=int, default=None, help="Seed for every randomized procedure")(f)
    f = click.option("--tolerance", type=float, default=None, envvar="CONEFAN_TOLERANCE",
                     help="Geometric tolerance (default 1e-9)")(f)
    f = click.option("--samples", type=int, default=None, help="Sample count for sampling checks")(f)
    f = click.option("--no-cache", is_flag=True, help="Bypass the alpha certificate cache")(f)
    f = click.option("--fmt", type=click.Choice(["json", "table", "polars", "csv", "parquet"]), default=None,
                     help="Output format (default: json)")(f)
    f = click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
                     help="Write output to a file instead of stdout")(f)
    f = click.option("--verbose", "-v", is_flag=True, help="Verbose logging on stderr")(f)
    return f


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False, show_time=False)],
        force=True,
    )


def _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose) -> ConefanContext:
    if tolerance is not None and not tolerance > 0:
        raise click.BadParameter("tolerance must be positive", param_hint="--tolerance")
    if samples is not None and samples < 1:
        raise click.BadParameter("samples must be at least 1", param_hint="--samples")
    _setup_logging(verbose)
    ctx = ConefanContext(seed, tolerance, samples, no_cache, verbose, fmt, output)
    click_ctx = click.get_current_context()
    click_ctx.with_resource(config.override(
        tolerance=tolerance, seed=seed, use_cache=False if no_cache else None))
    return ctx


def _finish(code: int) -> None:
    if code:
        click.get_current_context().exit(code)


@click.group(cls=ConefanGroup, context_settings=CONTEXT_SETTINGS)
def main():
    """Polyhedral fans, toric and quasi-toric differential inclusions, and
    reaction-network dynamics.

    \b
    Usage:
      conefan fan validate <file>             Face closure, intersections, completeness
      conefan fan from-hyperplanes <file>     Fan of a central hyperplane arrangement
      conefan cone polar|project|faces        Single-cone operations
      conefan tdi eval                        Toric inclusion right-hand side
      conefan qtdi eval|certify               Quasi-toric right-hand side / well-definedness
      conefan embed tdi-to-qtdi|qtdi-to-tdi   Embedding constructions
      conefan embed verify                    Sampled containment check
      conefan net check|simulate|membership   Reaction networks
    """
    pass


# --- fan ------------------------------------------------------------------------

@main.group("fan", cls=ConefanGroup)
def fan_group():
    """Build and validate polyhedral fans."""


@fan_group.command("validate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@_global_options
def fan_validate_cmd(file, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Check face closure, pairwise intersections and completeness."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.fan import run_validate
    _finish(run_validate(ctx, file))


@fan_group.command("from-hyperplanes")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@_global_options
def fan_hyperplanes_cmd(file, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Fan of all cells of {a . x = 0} for the listed normals."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.fan import run_from_hyperplanes
    _finish(run_from_hyperplanes(ctx, file))


@fan_group.command("builtin")
@click.argument("name")
@_global_options
def fan_builtin_cmd(name, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Print a bundled fan (coordinate-2d, narrow-wedge, three-lines, ...)."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.fan import run_builtin
    _finish(run_builtin(ctx, name))


# --- cone -----------------------------------------------------------------------

@main.group("cone", cls=ConefanGroup)
def cone_group():
    """Single-cone operations."""


@cone_group.command("polar")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@_global_options
def cone_polar_cmd(file, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Polar cone {u : u . x <= 0 for all x in C}."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.cone import run_polar
    _finish(run_polar(ctx, file))


@cone_group.command("project")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--point", required=True, help="Comma-separated coordinates of X")
@_global_options
def cone_project_cmd(file, point, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Nearest point of the cone to X and the distance."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.cone import run_project
    _finish(run_project(ctx, file, point))


@cone_group.command("faces")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", "k", type=int, required=True, help="Face dimension")
@_global_options
def cone_faces_cmd(file, k, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """All k-dimensional faces."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.cone import run_faces
    _finish(run_faces(ctx, file, k))


# --- inclusions -------------------------------------------------------------------

_fan_option = click.option("--fan", "fan_spec", required=True,
                           help="Fan JSON file, or builtin:<name>")


@main.group("tdi", cls=ConefanGroup)
def tdi_group():
    """Toric differential inclusions."""


@tdi_group.command("eval")
@_fan_option
@click.option("--delta", type=float, required=True)
@click.option("--point", required=True, help="Comma-separated coordinates of X")
@_global_options
def tdi_eval_cmd(fan_spec, delta, point, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """F(X) = polar of the intersection of maximal cones within delta of X."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.inclusion import run_tdi_eval
    _finish(run_tdi_eval(ctx, fan_spec, delta, point))


@main.group("qtdi", cls=ConefanGroup)
def qtdi_group():
    """Quasi-toric differential inclusions."""


@qtdi_group.command("eval")
@_fan_option
@click.option("--d", "d_text", required=True, help="Thresholds d_0,...,d_{n-1}")
@click.option("--point", required=True, help="Comma-separated coordinates of X")
@click.option("--unchecked", is_flag=True, help="Skip the well-definedness certificate")
@_global_options
def qtdi_eval_cmd(fan_spec, d_text, point, unchecked, seed, tolerance, samples, no_cache,
                  fmt, output, verbose):
    """F(X) by ascending cone dimension with per-dimension thresholds."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.inclusion import run_qtdi_eval
    _finish(run_qtdi_eval(ctx, fan_spec, d_text, point, unchecked))


@qtdi_group.command("certify")
@_fan_option
@click.option("--d", "d_text", required=True, help="Thresholds d_0,...,d_{n-1}")
@_global_options
def qtdi_certify_cmd(fan_spec, d_text, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Certify or refute well-definedness (exit 2 with a witness on refutation)."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.inclusion import run_qtdi_certify
    _finish(run_qtdi_certify(ctx, fan_spec, d_text))


@main.command("alpha")
@_fan_option
@click.option("--subset", required=True, help="Comma-separated fan cone indices")
@_global_options
def alpha_cmd(fan_spec, subset, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Worst distance to the subset's intersection at unit tube radius."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.inclusion import run_alpha
    _finish(run_alpha(ctx, fan_spec, subset))


# --- embeddings -------------------------------------------------------------------

@main.group("embed", cls=ConefanGroup)
def embed_group():
    """Embeddings between toric and quasi-toric inclusions."""


@embed_group.command("tdi-to-qtdi")
@_fan_option
@click.option("--delta", type=float, required=True)
@_global_options
def embed_tdi_cmd(fan_spec, delta, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Certified d with F_delta(X) contained in F_d(X)."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.embed import run_tdi_to_qtdi
    _finish(run_tdi_to_qtdi(ctx, fan_spec, delta))


@embed_group.command("qtdi-to-tdi")
@click.option("--d", "d_text", required=True, help="Thresholds d_0,...,d_{n-1}")
@_global_options
def embed_qtdi_cmd(d_text, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """delta = max(d)."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.embed import run_qtdi_to_tdi
    _finish(run_qtdi_to_tdi(ctx, d_text))


@embed_group.command("inflate")
@_fan_option
@click.option("--d", "d_text", required=True, help="Thresholds d_0,...,d_{n-1}")
@_global_options
def embed_inflate_cmd(fan_spec, d_text, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Certified d~ >= d."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.embed import run_inflate
    _finish(run_inflate(ctx, fan_spec, d_text))


@embed_group.command("verify")
@_fan_option
@click.option("--inner", required=True, help="tdi:<delta> or qtdi:<d0,...>")
@click.option("--outer", required=True, help="tdi:<delta> or qtdi:<d0,...>")
@click.option("--radius", type=float, default=None, help="Sampling radius (default 10 x largest threshold)")
@_global_options
def embed_verify_cmd(fan_spec, inner, outer, radius, seed, tolerance, samples, no_cache,
                     fmt, output, verbose):
    """Check inner(X) ⊆ outer(X) on sampled points (exit 2 on violations)."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.embed import run_verify
    _finish(run_verify(ctx, fan_spec, inner, outer, radius))


# --- networks ---------------------------------------------------------------------

@main.group("net", cls=ConefanGroup)
def net_group():
    """Reaction networks as Euclidean embedded graphs."""


@net_group.command("check")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@_global_options
def net_check_cmd(file, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Reversibility, weak reversibility and endotacticity verdicts."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.net import run_check
    _finish(run_check(ctx, file))


@net_group.command("simulate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--x0", required=True, help="Comma-separated positive initial state")
@click.option("--T", "horizon", type=float, required=True, help="Time horizon")
@click.option("--k", "rates", default="1", show_default=True,
              help="Rates: constants '1,2', 'sin[:eps]' or 'piecewise[:eps[:interval]]'")
@_global_options
def net_simulate_cmd(file, x0, horizon, rates, seed, tolerance, samples, no_cache, fmt, output, verbose):
    """Integrate mass-action dynamics; writes the trajectory CSV."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    from conefan.commands.net import run_simulate
    _finish(run_simulate(ctx, file, x0, horizon, rates))


@net_group.command("membership")
@click.option("--traj", "traj_file", required=True, type=click.Path(exists=True, dir_okay=False))
@_fan_option
@click.option("--tdi-delta", type=float, default=None)
@click.option("--qtdi-d", "qtdi_d", default=None)
@_global_options
def net_membership_cmd(traj_file, fan_spec, tdi_delta, qtdi_d, seed, tolerance, samples, no_cache,
                       fmt, output, verbose):
    """Check dx/dt in F(log x) along a trajectory (exit 2 on violations)."""
    ctx = _make_context(seed, tolerance, samples, no_cache, fmt, output, verbose)
    if (tdi_delta is None) == (qtdi_d is None):
        raise click.UsageError("give exactly one of --tdi-delta or --qtdi-d")
    from conefan.commands.net import run_membership
    _finish(run_membership(ctx, traj_file, fan_spec, tdi_delta, qtdi_d))
