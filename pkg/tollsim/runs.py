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

"""Run directories: writing the artifacts of a run and reading them back."""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Final, List, Optional

import pandas as pd
import pydantic as pdt

from tollsim.errors import IncompleteRunError, ScenarioFormatError
from tollsim.events import EventStream, read_events, write_events
from tollsim.network import Cordon, Network, StrPath, build_cordon, load_network
from tollsim.population import Person, load_population, save_population
from tollsim.replanning.loop import IterationResult, run_iterations
from tollsim.scenario import ScenarioConfig, load_scenario
from tollsim.utils import map_exceptions
from tollsim.versions import PLATFORM, TOLLSIM_VERSION

LOG = logging.getLogger(__name__)

CONFIG_FILE: Final = "config.json"
STATS_FILE: Final = "stats.csv"
SCORES_FILE: Final = "scores.csv"
EVENTS_FILE: Final = "events.csv"
POPULATION_FILE: Final = "population.json"
METADATA_FILE: Final = "metadata.json"

SCORES_TABLE_COLUMNS: Final = (
    "iteration",
    "person",
    "plan",
    "score",
    "executed_flag",
    "executed_score",
)

RUN_FILES: Final = (
    CONFIG_FILE,
    STATS_FILE,
    SCORES_FILE,
    EVENTS_FILE,
    POPULATION_FILE,
    METADATA_FILE,
)


class RunMetadata(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Provenance and outcome of a run."""

    tollsim_version: str
    platform: str
    seed: int
    iterations: int
    converged: bool
    convergence_metric: float
    network_sha256: str
    toll: Optional[str]
    """Kind of the active toll scheme, unset for an untolled run."""

    n_stuck: int


@map_exceptions(
    IncompleteRunError, source_exc=(OSError, pd.errors.ParserError, pd.errors.EmptyDataError)
)
def read_stats(path: StrPath) -> pd.DataFrame:
    """Per-iteration statistics table of a run."""
    return pd.read_csv(path)


@map_exceptions(
    IncompleteRunError, source_exc=(OSError, pd.errors.ParserError, pd.errors.EmptyDataError)
)
def read_scores(path: StrPath) -> pd.DataFrame:
    """Per-plan score table of a run."""
    return pd.read_csv(path, dtype={"person": str})


def final_executed_scores(scores: pd.DataFrame) -> Dict[str, float]:
    """Executed score of every person in the last iteration of a score table.

    Raises:
        IncompleteRunError: the table lacks executed scores.
    """
    if "executed_score" not in scores.columns:
        raise IncompleteRunError("score table has no executed_score column.")
    final = scores["iteration"] == scores["iteration"].max()
    last = scores[final & (scores["executed_flag"] == 1)]
    return dict(zip(last["person"], last["executed_score"].astype(float)))


def file_digest(path: StrPath) -> str:
    """SHA-256 hex digest of a file's contents."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_run(config: ScenarioConfig, result: IterationResult, directory: StrPath) -> Path:
    """Write every artifact of a finished run to `directory`.

    Returns:
        The run directory.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    (directory / CONFIG_FILE).write_text(config.snapshot(), encoding="utf-8")

    stats = pd.DataFrame([iteration.as_row() for iteration in result.stats])
    stats.to_csv(directory / STATS_FILE, index=False, float_format="%.6f")

    scores = pd.DataFrame(
        [
            (
                record.iteration,
                record.person,
                record.plan,
                record.score,
                int(record.executed),
                record.executed_score,
            )
            for record in result.scores
        ],
        columns=list(SCORES_TABLE_COLUMNS),
    )
    scores.to_csv(directory / SCORES_FILE, index=False, float_format="%.6f", na_rep="")

    write_events(result.last.events, directory / EVENTS_FILE)
    save_population(result.persons, directory / POPULATION_FILE)

    metadata = RunMetadata(
        tollsim_version=TOLLSIM_VERSION,
        platform=PLATFORM,
        seed=config.seed,
        iterations=len(result.stats),
        converged=result.converged,
        convergence_metric=result.convergence_metric,
        network_sha256=file_digest(config.network),
        toll=config.toll.kind if config.toll is not None else None,
        n_stuck=result.stats[-1].n_stuck,
    )
    (directory / METADATA_FILE).write_text(metadata.json(indent=2) + "\n", encoding="utf-8")

    LOG.info("Run written to %s", directory)
    return directory


def execute_run(
    config: ScenarioConfig, directory: StrPath, *, with_progress_bar: bool = False
) -> Path:
    """Load the scenario, run the loop and write the run directory."""
    scenario = load_scenario(config)
    result = run_iterations(scenario, with_progress_bar=with_progress_bar)
    return write_run(config, result, directory)


@dataclass(frozen=True)
class RunArtifacts:
    """A completed run, read back from its directory."""

    directory: Path
    config: ScenarioConfig
    metadata: RunMetadata
    net: Network
    persons: List[Person]
    events: EventStream
    stats: pd.DataFrame
    executed_scores: Dict[str, float]
    """Unsmoothed score of each person's plan executed in the last iteration."""

    @property
    def cordon(self) -> Optional[Cordon]:
        """Analysis region: the configured cordon, else the toll region."""
        region = self.config.cordon
        if not region and self.config.toll is not None and self.config.toll.kind == "cordon":
            region = self.config.toll.region
        return build_cordon(self.net, region) if region else None


def load_run(directory: StrPath) -> RunArtifacts:
    """Read a run directory.

    Raises:
        IncompleteRunError: an artifact is missing or unreadable.
    """
    directory = Path(directory)
    missing = [name for name in RUN_FILES if not (directory / name).is_file()]
    if missing:
        raise IncompleteRunError(f"{directory}: missing {', '.join(missing)}.")

    try:
        config = ScenarioConfig.parse_raw((directory / CONFIG_FILE).read_text(encoding="utf-8"))
        metadata = RunMetadata.parse_raw((directory / METADATA_FILE).read_text(encoding="utf-8"))
    except (pdt.ValidationError, json.JSONDecodeError) as e:
        raise IncompleteRunError(f"{directory}: unreadable run description: {e}") from e

    try:
        net = load_network(config.network)
        persons = load_population(directory / POPULATION_FILE, net).persons
        events = read_events(directory / EVENTS_FILE)
    except (ScenarioFormatError, FileNotFoundError) as e:
        raise IncompleteRunError(f"{directory}: {e}") from e

    stats = read_stats(directory / STATS_FILE)
    executed_scores = final_executed_scores(read_scores(directory / SCORES_FILE))
    return RunArtifacts(
        directory=directory,
        config=config,
        metadata=metadata,
        net=net,
        persons=persons,
        events=events,
        stats=stats,
        executed_scores=executed_scores,
    )
