"""mkdv-ut command line: file-based stages plus validation."""

import logging
import sys
from pathlib import Path

import click

from ..core import BadParams, ConfigError, MkdvError
from .config import load_config
from .pipeline import GateFailed, cmd_derive, cmd_emit, cmd_solve, cmd_spectral
from .presets import PresetUnavailable, compatible_preset

EXIT_OK, EXIT_CONFIG, EXIT_GATE, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("mkdv_ut")


def _exit_code(exc):
    if isinstance(exc, (ConfigError, PresetUnavailable, BadParams)):
        return EXIT_CONFIG
    if isinstance(exc, GateFailed):
        return EXIT_GATE
    return EXIT_NUMERICAL


def _run(command, config, body):
    try:
        cfg = load_config(config, command)
        body(cfg)
    except (MkdvError, FloatingPointError, ArithmeticError, ValueError, OSError) as exc:
        cause = getattr(exc, "cause", exc)
        code = _exit_code(cause)
        click.echo(f"error: {exc}", err=True)
        sys.exit(code)
    sys.exit(EXIT_OK)


config_option = click.option("--config", "config", required=True, type=click.Path(dir_okay=False),
                             help="Run configuration (JSON).")


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more logging.")
def main(verbose):
    """Half-line mKdV solver: spectral functions, Riemann-Hilbert reconstruction, validation."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command("spectral-x")
@config_option
def spectral_x(config):
    """Tabulate a, b from the initial profile."""
    def body(cfg):
        part = cmd_spectral(cfg, "x")
        click.echo(f"wrote {cfg.path('spectral_x')}; checks: {part.checks['report']}")
    _run("spectral-x", config, body)


@main.command("spectral-t")
@config_option
def spectral_t(config):
    """Tabulate A, B from the boundary profiles."""
    def body(cfg):
        part = cmd_spectral(cfg, "t")
        click.echo(f"wrote {cfg.path('spectral_t')}; checks: {part.checks['report']}")
    _run("spectral-t", config, body)


@main.command()
@config_option
def derive(config):
    """Merge both halves, build c, d, h, r and the regularizer, run the gates."""
    def body(cfg):
        sd, _ = cmd_derive(cfg)
        for name, g in sd.diagnostics["gates"].items():
            click.echo(f"gate {name}: {'pass' if g['passed'] else 'FAIL'}")
        click.echo(f"wrote {cfg.path('derived')}")
    _run("derive", config, body)


@main.command()
@config_option
@click.option("--force", is_flag=True, help="Solve even if a gate failed.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes.")
def solve(config, force, workers):
    """Reconstruct u, u_x, u_xx on the configured (x, t) grid."""
    def body(cfg):
        rows = cmd_solve(cfg, force=force, workers=workers)
        click.echo(f"wrote {len(rows)} points to {cfg.path('solution')}")
    _run("solve", config, body)


@main.command()
@config_option
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
@click.option("--no-figures", is_flag=True, help="Only the CSV tables.")
def emit(config, out, no_figures):
    """Write plot-ready CSV tables (and figures drawn from them)."""
    def body(cfg):
        if out:
            cfg.paths["report"] = out
        exact = compatible_preset(cfg.preset["name"], **cfg.preset.get("params", {})) if cfg.preset else None
        for name, path in cmd_emit(cfg, exact, figures=not no_figures).items():
            click.echo(f"{name}: {path}")
    _run("emit", config, body)


@main.command()
@config_option
@click.option("--suite", type=click.Choice(["quick", "invariants", "asymptotics", "endtoend", "all"]),
              default="quick", show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Report directory.")
def validate(config, suite, out):
    """Run a validation suite; failures are report entries, not errors."""
    from .validate import run_suite, write_report

    def body(cfg):
        checks = run_suite(suite, cfg)
        summary, files = write_report(checks, out or cfg.path("report"), suite)
        click.echo(summary)
        click.echo(f"report: {files['json']}")
    _run("validate", config, body)


if __name__ == "__main__":
    main()
