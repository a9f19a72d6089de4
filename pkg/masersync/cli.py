import csv
import sys

import click
from rich import print_json
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn
from rich.table import Table

from masersync import defaults, errors
from masersync.analytics import (fano_factor, mean_occupation,
                                 steady_number_distribution, trapping_angles)
from masersync.checks import run_checks
from masersync.fock import choose_truncation
from masersync.perturbation import perturbative_sync_strength, solve_perturbative
from masersync.phase import export_phase_csv
from masersync.solver import initial_truncation
from masersync.sweep import (Measures, emit_outputs, evaluate_point,
                             load_config, run_sweep, save_config)
from masersync.types import CouplingKind, MaserParams, Truncation
from masersync.utils import fmt_float, setup_logging

console = Console()

EXIT_CONFIG = 1
EXIT_PARTIAL = 2


def _fail(e: Exception):
    console.print(f"[red]{e}[/]")
    sys.exit(EXIT_CONFIG)


_POINT_OPTIONS = [
    click.option("--config", "-c", "config_path", default=None,
                 help="JSON or TOML config file"),
    click.option("--N", "N", type=float, default=None, help="Atom injection rate"),
    click.option("--theta", type=float, default=None, help="Pump parameter phi sqrt(N)"),
    click.option("--phi", type=float, default=None, help="Rabi angle"),
    click.option("--eps", type=float, default=None, help="Coupling strength"),
    click.option("--coupling", multiple=True,
                 type=click.Choice([k.value for k in CouplingKind]),
                 help="Coupling kind, repeat for several"),
    click.option("--nmax", type=int, default=None, help="Fixed truncation"),
    click.option("--threshold", type=float, default=None,
                 help="Tail mass allowed beyond n_max"),
]


def point_options(func):
    """ options shared by every command that takes a parameter point """
    for option in reversed(_POINT_OPTIONS):
        func = option(func)
    return func


def _load(config_path, N, theta, phi, eps, coupling, nmax, threshold, **extra):
    try:
        return load_config(
            config_path,
            N=[N] if N is not None else None,
            theta=[theta] if theta is not None else None,
            phi=[phi] if phi is not None else None,
            eps=[eps] if eps is not None else None,
            couplings=list(coupling) or None,
            n_max=nmax,
            threshold=threshold,
            **extra)
    except errors.MaserSyncError as e:
        _fail(e)


@click.group()
@click.option("--verbose", "-v", count=True, help="-v for info, -vv for debug logs")
def cli(verbose):
    """
    masersync command line
    """
    setup_logging(verbose)


@cli.command(name="steady")
@point_options
@click.option("--dump-phase", default=None, help="Write P(phi) as CSV to this path")
@click.option("--json", "as_json", is_flag=True, default=False, help="Print the row as JSON")
def steady(config_path, N, theta, phi, eps, coupling, nmax, threshold,
           dump_phase, as_json):
    """ Full report of one parameter point """
    config = _load(config_path, N, theta, phi, eps, coupling, nmax, threshold)
    all_on = {name: True for name in Measures.__fields__}
    config = config.copy(update={"measures": Measures(**all_on),
                                 "dump_phase": dump_phase is not None})
    points = config.grid()
    if len(points) > 1:
        console.print(f"[yellow]{len(points)} points in config, "
                      "reporting the first one[/]")
    result = evaluate_point(points[0], config)
    row = result.row

    if as_json:
        print_json(row.json(exclude_none=True))
    else:
        table = Table(title=f"{row.coupling.value} N={row.N:g} "
                            f"Theta={row.theta:.6g} eps={row.eps:g}")
        table.add_column("quantity", justify="left")
        table.add_column("value", justify="right")
        for name, value in row.dict(exclude_none=True).items():
            if name in ("theta", "N", "eps", "coupling"):
                continue
            if isinstance(value, float):
                value = f"{value:.10g}"
            table.add_row(name, str(value))
        console.print(table)

    if dump_phase and result.phase is not None:
        try:
            export_phase_csv(result.phase, dump_phase)
        except OSError as e:
            _fail(errors.OutputError(dump_phase, e))
        console.print(f"Phase distribution written to [green]{dump_phase}[/]")
    if row.status != "ok":
        sys.exit(EXIT_PARTIAL)


@cli.command(name="sweep")
@point_options
@click.option("--workers", "-w", type=int, default=None, help="Worker processes")
@click.option("--out", "-o", default=None, help="Output directory")
@click.option("--name", default=None, help="Run name used for output files")
@click.option("--dump-phase", is_flag=True, default=False,
              help="Write P(phi) of every point")
@click.option("--plots", is_flag=True, default=False, help="Write SVG plots")
@click.option("--timing", is_flag=True, default=False, help="Fill wall_time_ms")
@click.option("--save-config", "save_path", default=None,
              help="Write the effective config as TOML to this path")
def sweep(config_path, N, theta, phi, eps, coupling, nmax, threshold,
          workers, out, name, dump_phase, plots, timing, save_path):
    """ Evaluate a grid of parameter points """
    # unset flags keep the config file values
    config = _load(config_path, N, theta, phi, eps, coupling, nmax, threshold,
                   workers=workers, out=out, name=name,
                   dump_phase=dump_phase or None, plots=plots or None,
                   timing=timing or None)
    if save_path:
        try:
            save_config(config, save_path)
        except errors.MaserSyncError as e:
            _fail(e)
        console.print(f"Config written to [green]{save_path}[/]")

    points = config.grid()
    progress = Progress(SpinnerColumn(),
                        "[progress.description]{task.description}",
                        BarColumn(),
                        "{task.completed}/{task.total}",
                        console=console)
    with progress:
        task = progress.add_task(f"Sweeping {config.name}", total=len(points))
        result = run_sweep(config, on_point=lambda _: progress.advance(task))

    try:
        paths = emit_outputs(result)
    except errors.MaserSyncError as e:
        _fail(e)

    table = Table(title=f"Run {result.run_id}")
    table.add_column("output", justify="left")
    table.add_column("path", justify="left")
    for key, fpath in paths.items():
        table.add_row(key, str(fpath))
    console.print(table)
    console.print(f"{len(result.rows)} rows, {result.failed} failed, "
                  f"{result.elapsed:.1f}s")
    if result.failed:
        sys.exit(EXIT_PARTIAL)


@cli.command(name="perturb")
@point_options
def perturb(config_path, N, theta, phi, eps, coupling, nmax, threshold):
    """ Peak coefficients C0 (coherent) and C1 (dissipative) """
    if not coupling and not config_path:
        coupling = tuple(k.value for k in CouplingKind)
    config = _load(config_path, N, theta, phi, eps, coupling, nmax, threshold)
    point = config.grid()[0]
    try:
        params = point.params()
        if config.n_max is not None:
            trunc = Truncation(n_max=config.n_max)
        else:
            trunc = initial_truncation(params, config.threshold, config.min_nmax)
    except (errors.MaserSyncError, ValueError) as e:
        _fail(e)

    table = Table(title=f"N={params.N:g} Theta={params.theta:.6g} n_max={trunc.n_max}")
    table.add_column("coupling", justify="left")
    table.add_column("C0", justify="right")
    table.add_column("C1", justify="right")
    table.add_column(f"S_perturb (eps={point.eps:g})", justify="right")
    failed = False
    for kind in config.couplings:
        try:
            state = solve_perturbative(kind, params, trunc, point.eps)
        except errors.MaserSyncError as e:
            console.print(f"[red]{kind.value}: {e}[/]")
            failed = True
            continue
        table.add_row(kind.value,
                      fmt_float(state.c0, 10) or "-",
                      fmt_float(state.c1, 10) or "-",
                      fmt_float(perturbative_sync_strength(state, point.eps), 10))
    console.print(table)
    if failed:
        sys.exit(EXIT_PARTIAL)


@cli.command(name="check")
@click.option("--N", "N", type=float, default=2.0, help="Atom injection rate")
@click.option("--theta", type=float, default=1.5, help="Pump parameter")
@click.option("--eps", type=float, default=0.1, help="Coupling strength")
@click.option("--nmax", type=int, default=5, help="Truncation, at most 6")
def check(N, theta, eps, nmax):
    """ Run the invariant suite against the full two-mode generator """
    try:
        results = run_checks(N=N, theta=theta, eps=eps, n_max=nmax)
    except (errors.MaserSyncError, ValueError) as e:
        _fail(e)
    table = Table(title=f"Invariants at N={N:g} Theta={theta:g} eps={eps:g} n_max={nmax}")
    table.add_column("check", justify="left")
    table.add_column("coupling", justify="left")
    table.add_column("value", justify="right")
    table.add_column("limit", justify="right")
    table.add_column("ok", justify="center")
    for r in results:
        mark = "[green]yes[/]" if r.passed else "[red]no[/]"
        table.add_row(r.name, r.coupling, f"{r.value:.3e}", f"{r.limit:.1e}", mark)
    console.print(table)
    if not all(r.passed for r in results):
        sys.exit(EXIT_PARTIAL)


@cli.command(name="distribution")
@click.option("--N", "N", type=float, default=5.0, help="Atom injection rate")
@click.option("--theta", type=float, default=None, help="Pump parameter")
@click.option("--phi", type=float, default=None, help="Rabi angle")
@click.option("--threshold", type=float, default=defaults.TRUNCATION_THRESHOLD)
@click.option("--out", "-o", default=None, help="Write n,P as CSV")
def distribution(N, theta, phi, threshold, out):
    """ Photon statistics of one uncoupled maser """
    try:
        if phi is not None:
            params = MaserParams(N=N, phi=phi)
        else:
            params = MaserParams.from_theta(N, 2.0 if theta is None else theta)
        trunc = choose_truncation(params, threshold)
    except (errors.MaserSyncError, ValueError) as e:
        _fail(e)
    dist = steady_number_distribution(params, trunc)
    mean = mean_occupation(dist)

    table = Table(title=f"N={params.N:g} Theta={params.theta:.6g}")
    table.add_column("quantity", justify="left")
    table.add_column("value", justify="right")
    table.add_row("n_max", str(trunc.n_max))
    table.add_row("<n>", f"{mean:.10g}")
    if params.N > 0:
        table.add_row("<n>/N", f"{mean / params.N:.10g}")
    if mean > 0:
        table.add_row("F", f"{fano_factor(dist):.10g}")
    table.add_row("peak n", str(dist.peak()))
    console.print(table)

    if out:
        try:
            with open(out, "w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(["n", "P"])
                for n, p in enumerate(dist.probs):
                    writer.writerow([n, fmt_float(p)])
        except OSError as e:
            _fail(errors.OutputError(out, e))
        console.print(f"Distribution written to [green]{out}[/]")


@cli.command(name="trapping")
@click.option("--N", "N", type=float, default=5.0, help="Atom injection rate")
@click.option("--m-max", type=int, default=4, help="Highest trapped Fock level")
@click.option("--k-max", type=int, default=2, help="Number of Rabi cycles")
def trapping(N, m_max, k_max):
    """ Trapping angles and the matching pump parameters """
    try:
        angles = trapping_angles(m_max, k_max)
    except errors.MaserSyncError as e:
        _fail(e)
    table = Table(title=f"Trapping states, N={N:g}")
    table.add_column("m", justify="right")
    table.add_column("k", justify="right")
    table.add_column("phi", justify="right")
    table.add_column("Theta", justify="right")
    for a in angles:
        table.add_row(str(a.m), str(a.k), f"{a.phi:.6f}", f"{a.theta(N):.6f}")
    console.print(table)
