"""
CLI entry point for the purification toolkit.

Provides commands to:
- Dump transition tensors
- Locate fixed points, working ranges and yields of bipartite maps
- Print first-order fidelity bounds
- Run Monte Carlo purification of graph states

Every command writes a CSV or JSON artifact and prints a one-line summary.
Exit codes: 0 success, 2 configuration error, 3 computation error.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from purification.config import get_settings
from purification.orchestrator import ErrorKind, RunResult, run_command
from purification.schemas import Backend, Command, OutputFormat, Scheme

app = typer.Typer(
    name="purify",
    help="Entanglement purification with single and double selection",
    add_completion=False,
)
console = Console()

EXIT_CONFIG = 2
EXIT_COMPUTATION = 3
MAX_TABLE_ROWS = 20

# Shared options; None means "not given" so a --config file can fill it in.
SCHEME = typer.Option(None, "--scheme", "-s", help="single or double selection")
NOISE = typer.Option(
    None, "--noise", "-n",
    help="Gate noise: uniform:<p_g>, kay:<q1>,<q2>,<q3>, kay:<p_g>, custom:<json table>, "
         "or a bare kind completed by --pg",
)
PG = typer.Option(None, "--pg", help="Gate error probability (start:stop:step for scans)")
PM = typer.Option(None, "--pm", help="Measurement error probability (start:stop:step for scans)")
FCH = typer.Option(None, "--fch", help="Channel fidelity F_ch")
P_GRID = typer.Option(None, "--p", help="Scan p = p_g = p_m over start:stop:step (bare --noise kind)")
TARGETS = typer.Option(None, "--targets", help="Target fidelity grid start:stop:step")
ENGINE = typer.Option(None, "--engine", "-e", help="Tensor backend: tensor or exact")
CONFIG = typer.Option(None, "--config", "-c", help="JSON config file; flags override it")
OUT = typer.Option(None, "--out", "-o", help="Output file (default under PURIFY_OUTPUT_DIR)")
FORMAT = typer.Option(None, "--format", "-f", help="csv or json")
VERBOSE = typer.Option(False, "--verbose", "-v", help="Enable verbose logging")


def setup_logging(verbose: bool = False) -> None:
    """Configure logging based on verbosity."""
    level = logging.DEBUG if verbose else get_settings().log_level.upper()
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def display_result(result: RunResult) -> None:
    """Print the summary panel and the first rows of the result table."""
    if result.rows:
        table = Table(show_header=True)
        for column in result.columns:
            table.add_column(column)
        for row in result.rows[:MAX_TABLE_ROWS]:
            table.add_row(*(_format_cell(row.get(column)) for column in result.columns))
        console.print(table)
        hidden = len(result.rows) - MAX_TABLE_ROWS
        if hidden > 0:
            console.print(f"[dim]... {hidden} more row(s) in the artifact[/dim]")

    title = result.command.value if result.command else "purify"
    console.print(Panel(escape(result.summary), title=f"[green]{title}[/green]"))
    for path in result.artifacts:
        console.print(f"[dim]Wrote {path}[/dim]")


def _format_cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _execute(command: Command, config: Optional[Path], verbose: bool, **flags: Any) -> None:
    setup_logging(verbose)
    result = run_command({"command": command, **flags}, config)
    if not result.success:
        console.print(f"[red]Error ({result.error_kind.value if result.error_kind else 'unknown'}): "
                      f"{escape(result.error or '')}[/red]")
        code = EXIT_CONFIG if result.error_kind is ErrorKind.CONFIG else EXIT_COMPUTATION
        raise typer.Exit(code)
    display_result(result)


def _flag(value: bool) -> Optional[bool]:
    """Boolean switches only override a config file when set."""
    return True if value else None


def _vertices(spec: Optional[str]) -> Optional[list[int]]:
    if spec is None:
        return None
    try:
        return [int(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        console.print(f"[red]Error (config): --local expects comma-separated vertices, got {spec!r}[/red]")
        raise typer.Exit(EXIT_CONFIG)


@app.command()
def tensor(
    scheme: Optional[Scheme] = SCHEME,
    noise: Optional[str] = NOISE,
    pg: Optional[str] = PG,
    pm: Optional[str] = PM,
    engine: Optional[Backend] = ENGINE,
    config: Optional[Path] = CONFIG,
    out: Optional[Path] = OUT,
    format: Optional[OutputFormat] = FORMAT,
    verbose: bool = VERBOSE,
) -> None:
    """
    Dump the transition tensor S[i,j,k] or D[i,j,k,l].

    Example:
        purify tensor --scheme double --noise uniform:0.02 --pm 0.01 --format json
    """
    _execute(Command.TENSOR, config, verbose, scheme=scheme, noise=noise, pg=pg, pm=pm,
             engine=engine, out=out, format=format)


@app.command("fixed-points")
def fixed_points(
    scheme: Optional[Scheme] = SCHEME,
    noise: Optional[str] = NOISE,
    pg: Optional[str] = PG,
    pm: Optional[str] = PM,
    p: Optional[str] = P_GRID,
    engine: Optional[Backend] = ENGINE,
    config: Optional[Path] = CONFIG,
    out: Optional[Path] = OUT,
    format: Optional[OutputFormat] = FORMAT,
    verbose: bool = VERBOSE,
) -> None:
    """
    Locate F_max and F_min of a purification map, or scan them along p_g = p_m.

    Examples:
        purify fixed-points --scheme single --noise uniform:0 --pm 0
        purify fixed-points --scheme double --noise uniform --p 0:0.1:0.005
    """
    _execute(Command.FIXED_POINTS, config, verbose, scheme=scheme, noise=noise, pg=pg, pm=pm, p=p,
             engine=engine, out=out, format=format)


@app.command("purify-curve")
def purify_curve(
    scheme: Optional[Scheme] = SCHEME,
    noise: Optional[str] = NOISE,
    pg: Optional[str] = PG,
    pm: Optional[str] = PM,
    fin: Optional[str] = typer.Option(None, "--fin", help="F_in grid start:stop:step"),
    engine: Optional[Backend] = ENGINE,
    config: Optional[Path] = CONFIG,
    out: Optional[Path] = OUT,
    format: Optional[OutputFormat] = FORMAT,
    verbose: bool = VERBOSE,
) -> None:
    """One-round output fidelity F_out against channel-shaped inputs F_in."""
    _execute(Command.PURIFY_CURVE, config, verbose, scheme=scheme, noise=noise, pg=pg, pm=pm,
             f_grid=fin, engine=engine, out=out, format=format)


@app.command("working-range")
def working_range(
    scheme: Optional[Scheme] = SCHEME,
    noise: Optional[str] = typer.Option(None, "--noise", "-n", help="Noise kind: uniform or kay"),
    pg: Optional[str] = PG,
    pm: Optional[str] = PM,
    with_fmin: bool = typer.Option(False, "--with-fmin", help="Also locate F_min at every point"),
    engine: Optional[Backend] = ENGINE,
    config: Optional[Path] = CONFIG,
    out: Optional[Path] = OUT,
    format: Optional[OutputFormat] = FORMAT,
    verbose: bool = VERBOSE,
) -> None:
    """
    Scan a (p_g, p_m) grid for purified fixed points.

    Example:
        purify working-range --scheme single --noise uniform --pg 0:0.1:0.001 --pm 0:0.05:0.001
    """
    _execute(Command.WORKING_RANGE, config, verbose, scheme=scheme, noise=noise,
             pg=pg, pm=pm, with_fmin=_flag(with_fmin), engine=engine, out=out, format=format)


@app.command("yield")
def yield_(
    scheme: Optional[Scheme] = SCHEME,
    noise: Optional[str] = NOISE,
    pg: Optional[str] = PG,
    pm: Optional[str] = PM,
    fch: Optional[float] = FCH,
    target: Optional[float] = typer.Option(None, "--target", "-t", help="Target fidelity"),
    targets: Optional[str] = TARGETS,
    engine: Optional[Backend] = ENGINE,
    config: Optional[Path] = CONFIG,
    out: Optional[Path] = OUT,
    format: Optional[OutputFormat] = FORMAT,
    verbose: bool = VERBOSE,
) -> None:
    """
    Rounds and yield needed to reach a target fidelity (or each of --targets).

    Examples:
        purify yield --scheme single --noise uniform:0.02 --pm 0.02 --fch 0.8 --target 0.9
        purify yield --scheme double --noise uniform:0.01 --fch 0.8 --targets 0.85:0.99:0.01
    """
    _execute(Command.YIELD, config, verbose, scheme=scheme, noise=noise, pg=pg, pm=pm,
             fch=fch, target=target, targets=targets, engine=engine, out=out, format=format)


@app.command()
def bounds(
    noise: Optional[str] = NOISE,
    pg: Optional[str] = PG,
    config: Optional[Path] = CONFIG,
    out: Optional[Path] = OUT,
    format: Optional[OutputFormat] = FORMAT,
    verbose: bool = VERBOSE,
) -> None:
    """
    First-order upper bounds on the purified fidelity.

    Example:
        purify bounds --noise uniform:0.03
    """
    _execute(Command.BOUNDS, config, verbose, noise=noise, pg=pg, out=out, format=format)


@app.command("mc-graph")
def mc_graph(
    scheme: Optional[Scheme] = SCHEME,
    noise: Optional[str] = NOISE,
    pg: Optional[str] = PG,
    pm: Optional[str] = PM,
    fch: Optional[float] = FCH,
    p: Optional[str] = P_GRID,
    targets: Optional[str] = TARGETS,
    graph: Optional[Path] = typer.Option(None, "--graph", "-g", help="Graph JSON file"),
    rounds: Optional[int] = typer.Option(None, "--rounds", "-r", help="Purification rounds"),
    samples: Optional[int] = typer.Option(None, "--samples", help="Samples per round"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker threads"),
    local: Optional[str] = typer.Option(None, "--local", help="Comma-separated local vertices"),
    config: Optional[Path] = CONFIG,
    out: Optional[Path] = OUT,
    format: Optional[OutputFormat] = FORMAT,
    verbose: bool = VERBOSE,
) -> None:
    """
    Monte Carlo purification of a two-colorable graph state.

    With --p, scans F_max and F_min along p_g = p_m; with --targets, reports
    the rounds and yield needed for each target fidelity.

    Examples:
        purify mc-graph --scheme double --noise uniform:0.02 --pm 0.02 --fch 0.95 --seed 7
        purify mc-graph --scheme double --noise uniform --p 0.01:0.08:0.01 --fch 0.95
        purify mc-graph --noise uniform:0.01 --fch 0.9 --targets 0.92:0.98:0.01
    """
    _execute(Command.MC_GRAPH, config, verbose, scheme=scheme, noise=noise, pg=pg, pm=pm,
             p=p, targets=targets, fch=fch, graph=graph, rounds=rounds, samples=samples, seed=seed,
             workers=workers, local_vertices=_vertices(local), out=out, format=format)


@app.command()
def version() -> None:
    """Show version information."""
    from purification import __version__
    console.print(f"purify v{__version__}")


if __name__ == "__main__":
    app()
