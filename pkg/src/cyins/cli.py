"""Command-line front end.

Subcommands: ``spe`` (equilibrium under a coverage level), ``policy``
(insurer optimum), ``bgne`` (full bilevel solution), ``simulate`` (Monte
Carlo vs analytic), ``sweep`` (CSV parameter sweep).

Exit codes: 0 success, 2 configuration or parse error, 3 not insurable,
4 numerical oracle failed to converge.  Identical invocations (flags, config
file, seed) produce byte-identical output.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import reports
from .model import ConvergenceError, NotInsurableError, ParameterError
from .scenario import Scenario, ScenarioError, build_scenario, load_config

EXIT_CONFIG = 2
EXIT_NOT_INSURABLE = 3
EXIT_NO_CONVERGENCE = 4


def _scenario_options(fn):
    options = [
        click.option("--cu", type=float, default=None, help="Protection cost (market.cu)."),
        click.option("--ca", type=float, default=None, help="Attack cost (market.ca)."),
        click.option("--cs", type=float, default=None, help="Insurer profit weight (market.cs)."),
        click.option("--gamma", type=float, default=None, help="Risk aversion (profile.gamma)."),
        click.option("--s", type=float, default=None, help="Coverage level (policy.s)."),
        click.option("--t", type=float, default=None, help="Premium (policy.t)."),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="Scenario file; flags override its values."),
        click.option("--seed", type=int, default=None, help="Simulation seed (sim.seed)."),
        click.option("--samples", type=int, default=None, help="Sample count (sim.samples)."),
        click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
                     help="Write output to this file instead of stdout."),
        click.option("--format", "fmt", type=click.Choice(["table", "json", "csv"]),
                     default=None, help="Output format (default: table; sweep: csv)."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build(config_path, **flags) -> Scenario:
    config = load_config(config_path) if config_path else None
    return build_scenario(flags, config)


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    try:
        return fn()
    except (ScenarioError, ParameterError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    except NotInsurableError as exc:
        _fail(EXIT_NOT_INSURABLE, str(exc))
    except ConvergenceError as exc:
        _fail(EXIT_NO_CONVERGENCE, str(exc))


@click.group()
def main():
    """Equilibria and contracts of the attack-aware cyber-insurance model."""


@main.command()
@_scenario_options
def spe(config_path, out_path, fmt, **flags):
    """Saddle point of the protection-vs-attack game at a coverage level."""

    def body():
        scenario = _build(config_path, **flags)
        payload = reports.run_spe(scenario)
        _emit(reports.render(payload, fmt or "table"), out_path)
        if not payload["insurable"]:
            sys.exit(EXIT_NOT_INSURABLE)

    _guarded(body)


@main.command()
@_scenario_options
def policy(config_path, out_path, fmt, **flags):
    """Insurer's optimal policy (coverage, premium) and binding constraints."""

    def body():
        scenario = _build(config_path, **flags)
        payload = reports.run_policy(scenario)
        _emit(reports.render(payload, fmt or "table"), out_path)

    _guarded(body)


@main.command()
@_scenario_options
def bgne(config_path, out_path, fmt, **flags):
    """Bilevel solution: optimal policy plus the equilibrium it induces."""

    def body():
        scenario = _build(config_path, **flags)
        payload = reports.run_bgne(scenario)
        _emit(reports.render(payload, fmt or "table"), out_path)

    _guarded(body)


@main.command()
@_scenario_options
def simulate(config_path, out_path, fmt, **flags):
    """Monte Carlo estimates vs analytic values (or a divergence probe)."""

    def body():
        scenario = _build(config_path, **flags)
        payload = reports.run_simulate(scenario)
        _emit(reports.render(payload, fmt or "table"), out_path)

    _guarded(body)


@main.command()
@_scenario_options
@click.option("--param", "parameter", type=click.Choice(reports.SWEEP_PARAMETERS),
              required=True, help="Parameter to sweep.")
@click.option("--start", type=float, required=True, help="First swept value.")
@click.option("--stop", type=float, required=True, help="Last swept value.")
@click.option("--steps", type=int, default=51, show_default=True,
              help="Number of sweep points.")
def sweep(config_path, out_path, fmt, parameter, start, stop, steps, **flags):
    """Sweep one parameter and emit equilibrium and policy columns."""

    def body():
        scenario = _build(config_path, **flags)
        payload = reports.run_sweep(scenario, parameter, start, stop, steps)
        _emit(reports.render(payload, fmt or "csv"), out_path)

    _guarded(body)


if __name__ == "__main__":
    main()
