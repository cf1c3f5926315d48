# This code is part of tollsim.
#
# (C) Copyright the tollsim developers 2024
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Command-line interface: ``tollsim generate | run | analyze | compare``."""

import contextlib
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import click
import dotenv
import pydantic as pdt
import typer

from tollsim import analysis, generators, runs
from tollsim.errors import (
    IncompleteRunError,
    IterationError,
    RoutingError,
    RunMismatchError,
    ScenarioFormatError,
)
from tollsim.scenario import LOG_LEVEL_ENV, ScenarioConfig, default_output_dir, load_config
from tollsim.tolling import TollConfig

LOG = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"

EXIT_INPUT_ERROR = 1
EXIT_RUNTIME_ERROR = 2

app = typer.Typer(no_args_is_help=True, add_completion=False)


@contextlib.contextmanager
def reported_errors() -> Iterator[None]:
    """Turn domain errors into an error message and an exit code."""
    try:
        yield
    except (IterationError, RoutingError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_RUNTIME_ERROR) from e
    except (
        ScenarioFormatError,
        IncompleteRunError,
        RunMismatchError,
        pdt.ValidationError,
        ValueError,
    ) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_INPUT_ERROR) from e


@app.callback()
def configure(
    log_level: Optional[str] = typer.Option(
        None, help=f"Logging level; defaults to ${LOG_LEVEL_ENV} or INFO."
    ),
    load_dotenv: bool = typer.Option(True, "--dotenv/--no-dotenv", help="Read a .env file."),
) -> None:
    """Agent-based traffic simulation with road pricing."""
    if load_dotenv:
        dotenv.load_dotenv()

    level = (log_level or os.environ.get(LOG_LEVEL_ENV) or "INFO").upper()
    if not isinstance(logging.getLevelName(level), int):
        raise typer.BadParameter(f"unknown level {level!r}", param_hint="--log-level")
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


@app.command()
def generate(
    kind: str = typer.Argument(..., help="grid-city, pigou or two-route-cordon"),
    out: Path = typer.Option(..., help="Scenario directory to write."),
    persons: Optional[int] = typer.Option(None, help="Number of persons."),
    seed: Optional[int] = typer.Option(None),
    iterations: Optional[int] = typer.Option(None),
    size: Optional[int] = typer.Option(None, help="Grid side, in nodes (grid-city)."),
    departure_window: Optional[int] = typer.Option(
        None, help="Departure spread, in seconds (pigou, two-route-cordon)."
    ),
    toll: Optional[bool] = typer.Option(None, "--toll/--no-toll"),
) -> None:
    """Write the network, population, transit and configuration files of a scenario."""
    candidates: Dict[str, Any] = {
        "persons": persons,
        "seed": seed,
        "iterations": iterations,
        "size": size,
        "departure_window": departure_window,
        "toll": toll,
    }
    params = {key: value for key, value in candidates.items() if value is not None}

    with reported_errors():
        config_path = generators.generate(kind, **params).write(out)
    typer.echo(config_path)


def apply_overrides(
    config: ScenarioConfig,
    *,
    seed: Optional[int] = None,
    iterations: Optional[int] = None,
    toll_preset: Optional[str] = None,
    toll_amount: Optional[float] = None,
    no_toll: bool = False,
) -> ScenarioConfig:
    """Apply command-line overrides, validated like configuration file values."""
    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides["seed"] = seed
    if iterations is not None:
        overrides["iterations"] = iterations

    toll = config.toll
    if no_toll:
        toll = None
    elif toll_preset is not None or toll_amount is not None:
        if toll is None:
            toll = TollConfig(preset=toll_preset or "nyc-cbd-base")
        else:
            toll = toll.copy()
        if toll_preset is not None:
            toll.update_options(preset=toll_preset, periods=None)
        if toll_amount is not None:
            toll.update_options(flat_amount=toll_amount)
    overrides["toll"] = toll

    return config.update_options(**overrides)


@app.command()
def run(
    config_path: Path = typer.Option(..., "--config", help="Scenario configuration file."),
    seed: Optional[int] = typer.Option(None),
    iterations: Optional[int] = typer.Option(None),
    out: Optional[Path] = typer.Option(None, help="Run directory to write."),
    toll_preset: Optional[str] = typer.Option(None, help="Charge a named toll preset."),
    toll_amount: Optional[float] = typer.Option(None, help="Charge this amount in all periods."),
    no_toll: bool = typer.Option(False, "--no-toll", help="Run without any toll."),
    progress: bool = typer.Option(True, "--progress/--no-progress"),
) -> None:
    """Run the simulation and write a run directory."""
    with reported_errors():
        config = apply_overrides(
            load_config(config_path),
            seed=seed,
            iterations=iterations,
            toll_preset=toll_preset,
            toll_amount=toll_amount,
            no_toll=no_toll,
        )
        directory = out or config.output_dir or default_output_dir(load_dotenv=False)
        if directory is None:
            typer.echo("Error: no run directory; pass --out or set TOLLSIM_OUTPUT_DIR.", err=True)
            raise typer.Exit(EXIT_INPUT_ERROR)
        runs.execute_run(config, directory, with_progress_bar=progress)
    typer.echo(directory)


@app.command()
def analyze(
    run_dir: Path = typer.Argument(..., help="Completed run directory."),
    out: Optional[Path] = typer.Option(None, help="Report directory."),
    hours: List[int] = typer.Option(list(analysis.MAP_HOURS), "--hour", help="Map hours."),
) -> None:
    """Write link volumes, ridership, mode shares, score statistics and maps of a run."""
    with reported_errors():
        report = analysis.analyze_run(run_dir, out, hours=hours)
    typer.echo(report)


@app.command()
def compare(
    baseline: Path = typer.Argument(..., help="Run without pricing."),
    policy: Path = typer.Argument(..., help="Run with pricing."),
    out: Path = typer.Option(..., help="Report directory."),
    force: bool = typer.Option(False, help="Compare runs with different seeds or networks."),
) -> None:
    """Compare a priced run against its baseline."""
    with reported_errors():
        report = analysis.compare_runs(baseline, policy, out, force=force)
    typer.echo((report / "summary.txt").read_text(encoding="utf-8"))


def main() -> None:
    """Console entry point.

    Exit codes: 0 on success, 1 on usage or input errors, 2 on simulation errors.
    """
    try:
        code = app(standalone_mode=False)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_INPUT_ERROR)
    except click.Abort:
        typer.echo("Aborted!", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    sys.exit(code or 0)


if __name__ == "__main__":
    main()
