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

"""Scenario configuration files and the loaded scenario they describe."""

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Final, List, Optional

import dotenv
import pydantic as pdt
from typing_extensions import Annotated, Self

from tollsim.errors import ScenarioFormatError
from tollsim.network import Cordon, Network, StrPath, build_cordon, load_network, validate
from tollsim.population import Population, load_population
from tollsim.replanning.strategies import StrategyConfig
from tollsim.scoring import ScoringParams
from tollsim.tolling import TollConfig, TollScheme
from tollsim.transit import TransitSchedule, load_transit

LOG = logging.getLogger(__name__)

OUTPUT_DIR_ENV: Final = "TOLLSIM_OUTPUT_DIR"
LOG_LEVEL_ENV: Final = "TOLLSIM_LOG_LEVEL"


class ScenarioConfig(pdt.BaseModel, extra=pdt.Extra.forbid, validate_assignment=True):
    """Everything needed to reproduce a run.

    Relative paths are resolved against the directory of the configuration file.
    """

    network: Path
    population: Path
    transit: Optional[Path] = None

    cordon: Optional[List[str]] = None
    """Node ids of the analysis region; also the default toll region."""

    toll: Optional[TollConfig] = None
    scoring: ScoringParams = pdt.Field(default_factory=ScoringParams)
    strategy: StrategyConfig = pdt.Field(default_factory=StrategyConfig)

    iterations: Annotated[int, pdt.Field(ge=1)] = 50
    scale: Annotated[float, pdt.Field(gt=0.0, le=1.0)] = 1.0
    """Flow-scaling factor for capacities and storage."""

    seed: int = 1
    output_dir: Optional[Path] = None

    def update_options(self, **kwargs: Any) -> Self:
        """Update fields by name, validating the result as a whole.

        Examples:
            >>> config = ScenarioConfig(network="net.json", population="pop.json")
            >>> config.update_options(seed=7, iterations=3).seed
            7
            >>> try:
            ...     config.update_options(iterations=0)
            ... except pdt.ValidationError as e:
            ...     print(e.errors()[0]["loc"])
            ('iterations',)
            >>> config.iterations
            3
        """
        update = self.dict()
        update.update(kwargs)

        for key, value in self.validate(update).dict().items():
            setattr(self, key, value)

        return self

    def resolve_paths(self, base: Path) -> Self:
        """Make the input paths absolute, relative to `base`."""
        for name in ("network", "population", "transit", "output_dir"):
            value = getattr(self, name)
            if value is not None and not value.is_absolute():
                setattr(self, name, (base / value).resolve())
        return self

    def snapshot(self) -> str:
        """JSON text of the fully resolved configuration."""
        return self.json(indent=2) + "\n"


def load_config(path: StrPath) -> ScenarioConfig:
    """Load a scenario configuration file.

    Raises:
        ScenarioFormatError: the file is missing or malformed.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ScenarioFormatError(f"{path}: no such configuration file.") from e
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"{path}: line {e.lineno}: {e.msg}") from e

    try:
        config = ScenarioConfig.parse_obj(data)
    except pdt.ValidationError as e:
        raise ScenarioFormatError.from_validation_error(e, source=str(path)) from e

    return config.resolve_paths(path.parent.resolve())


def default_output_dir(*, load_dotenv: bool = True) -> Optional[Path]:
    """Output directory from the environment, if set.

    Args:
        load_dotenv: whether to load a ``.env`` file first.
    """
    if load_dotenv:
        dotenv.load_dotenv()
    value = os.environ.get(OUTPUT_DIR_ENV)
    return Path(value) if value else None


@dataclass(frozen=True)
class Scenario:
    """A loaded and cross-checked scenario."""

    config: ScenarioConfig
    net: Network
    population: Population
    transit: Optional[TransitSchedule]
    toll: Optional[TollScheme]
    cordon: Optional[Cordon]
    """Analysis region, if any."""


def _require(path: Path, what: str) -> Path:
    if not path.is_file():
        raise ScenarioFormatError(f"{what} file not found: {path}")
    return path


def load_scenario(config: ScenarioConfig) -> Scenario:
    """Load the files a configuration references and resolve its toll scheme.

    Raises:
        ScenarioFormatError: a file is missing or invalid, or the inputs are
            inconsistent with each other.
    """
    net = load_network(_require(config.network, "Network"))
    population = load_population(_require(config.population, "Population"), net)
    transit = (
        load_transit(_require(config.transit, "Transit"), net)
        if config.transit is not None
        else None
    )

    activity_links = {
        activity.link
        for person in population
        for plan in person.plan_memory
        for activity in plan.activities
    }
    diagnostics = validate(net, activity_links=activity_links)
    if diagnostics:
        raise ScenarioFormatError("; ".join(str(diagnostic) for diagnostic in diagnostics))

    toll: Optional[TollScheme] = None
    if config.toll is not None:
        toll_config = config.toll
        if toll_config.kind == "cordon" and toll_config.region is None:
            toll_config = toll_config.copy(update={"region": config.cordon})
        toll = toll_config.resolve(net)

    cordon: Optional[Cordon] = None
    if config.cordon:
        cordon = build_cordon(net, config.cordon)
    elif toll is not None and toll.cordon is not None:
        cordon = toll.cordon

    LOG.info(
        "Scenario: %d links, %d persons, %d transit lines, toll %s",
        len(net.links),
        len(population),
        len(transit) if transit is not None else 0,
        toll.kind if toll is not None else "none",
    )
    return Scenario(
        config=config, net=net, population=population, transit=transit, toll=toll, cordon=cordon
    )
