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

"""Desk-scale scenario generators."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Final, List, Literal, Optional, Tuple

import numpy as np
import pydantic as pdt
from typing_extensions import Annotated, TypeAlias

from tollsim.network import Link, Network, Node, StrPath, save_network
from tollsim.population import Activity, Leg, Person, Plan, save_population
from tollsim.replanning.strategies import StrategyConfig
from tollsim.scenario import ScenarioConfig
from tollsim.tolling import TollConfig
from tollsim.transit import TransitLine, TransitSchedule, save_transit
from tollsim.utils import SECONDS_PER_HOUR

LOG = logging.getLogger(__name__)

ScenarioKind: TypeAlias = Literal["grid-city", "pigou", "two-route-cordon"]

URBAN_SPEED: Final = 13.89
"""50 km/h, in meters per second."""

BUS_SPEED: Final = 8.33

UNCONSTRAINED_CAPACITY: Final = 100_000.0


@dataclass(frozen=True)
class GeneratedScenario:
    """Scenario files, in memory."""

    net: Network
    persons: List[Person]
    transit: Optional[TransitSchedule]
    config: ScenarioConfig

    def write(self, directory: StrPath) -> Path:
        """Write the scenario files to `directory`.

        Returns:
            Path of the configuration file.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)

        save_network(self.net, directory / self.config.network)
        save_population(self.persons, directory / self.config.population)
        if self.transit is not None and self.config.transit is not None:
            save_transit(self.transit, directory / self.config.transit)

        config_path = directory / "config.json"
        config_path.write_text(self.config.snapshot(), encoding="utf-8")
        LOG.info("Scenario with %d persons written to %s", len(self.persons), directory)
        return config_path


def _link(from_node: str, to_node: str, length: float, capacity: float, **kwargs: Any) -> Link:
    return Link(
        id=f"{from_node}-{to_node}",
        from_node=from_node,
        to_node=to_node,
        length=length,
        capacity=capacity,
        free_speed=kwargs.pop("free_speed", URBAN_SPEED),
        **kwargs,
    )


def _commute(person_id: str, home: str, work: str, leave: int, work_end: Optional[int]) -> Person:
    elements: List[Any] = [
        Activity(kind="home", link=home, end_time=leave),
        Leg(mode="car"),
        Activity(kind="work", link=work, end_time=work_end),
    ]
    if work_end is not None:
        elements += [Leg(mode="car"), Activity(kind="home", link=home)]
    return Person(id=person_id, plan_memory=[Plan(elements=elements)])


def _departures(n: int, start: int, window: int) -> List[int]:
    """Evenly spread departure times over ``[start, start + window)``."""
    return [start + (i * window) // n for i in range(n)]


class GridCityParams(pdt.BaseModel, extra=pdt.Extra.forbid):
    """Square street grid with a central cordon and radial transit lines."""

    size: Annotated[int, pdt.Field(ge=3)] = 10
    """Nodes per side."""

    spacing: Annotated[float, pdt.Field(gt=0.0)] = 500.0
    capacity: Annotated[float, pdt.Field(gt=0.0)] = 1200.0
    persons: Annotated[int, pdt.Field(ge=1)] = 1000
    cordon_size: Annotated[int, pdt.Field(ge=1)] = 4
    """Side of the central node block inside the cordon."""

    central_work_share: Annotated[float, pdt.Field(ge=0.0, le=1.0)] = 0.6
    """Fraction of the persons working inside the cordon."""

    headway: Annotated[int, pdt.Field(gt=0)] = 600
    toll: bool = True
    """Whether the configuration enables the base cordon preset."""

    iterations: Annotated[int, pdt.Field(ge=1)] = 50
    seed: int = 1

    @pdt.validator("cordon_size")
    @classmethod
    def check_cordon_size(cls, value: int, values: Dict[str, Any]) -> int:
        if "size" in values and value >= values["size"]:
            raise ValueError("the cordon must leave at least one ring of outside nodes.")
        return value


def _grid_node(i: int, j: int) -> str:
    return f"n{i}_{j}"


def grid_city(params: GridCityParams) -> GeneratedScenario:
    """Street grid, commuters biased towards the center, bus lines along the middle axes."""
    rng = np.random.default_rng(params.seed)
    size, spacing = params.size, params.spacing

    nodes = [
        Node(id=_grid_node(i, j), x=j * spacing, y=i * spacing)
        for i in range(size)
        for j in range(size)
    ]
    links: List[Link] = []
    for i in range(size):
        for j in range(size):
            for di, dj in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                if 0 <= i + di < size and 0 <= j + dj < size:
                    neighbor = _grid_node(i + di, j + dj)
                    links.append(_link(_grid_node(i, j), neighbor, spacing, params.capacity))
    links.sort(key=lambda link: link.id)
    net = Network(nodes=nodes, links=links)

    low = (size - params.cordon_size) // 2
    inside = sorted(
        _grid_node(i, j)
        for i in range(low, low + params.cordon_size)
        for j in range(low, low + params.cordon_size)
    )
    inside_set = set(inside)
    central_links = [link.id for link in links if link.to_node in inside_set]
    outer_links = [link.id for link in links if link.to_node not in inside_set]

    middle = size // 2
    stop_time = max(1, round(spacing / BUS_SPEED))
    axes = {
        "east": [_grid_node(middle, j) for j in range(size)],
        "north": [_grid_node(i, middle) for i in range(size)],
    }
    lines = []
    for name, stops in axes.items():
        for suffix, ordered in (("", stops), ("-back", stops[::-1])):
            lines.append(
                TransitLine(
                    id=f"{name}{suffix}",
                    stops=tuple(ordered),
                    inter_stop_times=tuple([stop_time] * (size - 1)),
                    first_departure=5 * SECONDS_PER_HOUR,
                    last_departure=23 * SECONDS_PER_HOUR,
                    headway=params.headway,
                )
            )

    persons = []
    for index in range(params.persons):
        home = str(rng.choice(outer_links))
        pool = central_links if rng.random() < params.central_work_share else outer_links
        work = str(rng.choice(pool))
        leave = int(np.clip(rng.normal(8 * SECONDS_PER_HOUR, 1800), 6 * 3600, 10 * 3600))
        work_end = leave + int(rng.integers(7 * SECONDS_PER_HOUR, 10 * SECONDS_PER_HOUR))
        persons.append(_commute(f"p{index:05d}", home, work, leave, work_end))

    config = ScenarioConfig(
        network=Path("network.json"),
        population=Path("population.json"),
        transit=Path("transit.json"),
        cordon=inside,
        toll=TollConfig(preset="nyc-cbd-base") if params.toll else None,
        iterations=params.iterations,
        seed=params.seed,
    )
    return GeneratedScenario(
        net=net, persons=persons, transit=TransitSchedule(__root__=tuple(lines)), config=config
    )


class PigouParams(pdt.BaseModel, extra=pdt.Extra.forbid):
    """Two parallel routes: a slow uncongestible one and a fast bottleneck."""

    persons: Annotated[int, pdt.Field(ge=1)] = 1000
    start: int = 8 * SECONDS_PER_HOUR
    departure_window: Annotated[int, pdt.Field(ge=0)] = SECONDS_PER_HOUR
    slow_time: Annotated[int, pdt.Field(gt=0)] = 600
    """Free-flow time of the uncongestible route, in seconds."""

    fast_time: Annotated[int, pdt.Field(gt=0)] = 300
    fast_capacity: Annotated[float, pdt.Field(gt=0.0)] = 1800.0
    iterations: Annotated[int, pdt.Field(ge=1)] = 50
    seed: int = 1


PIGOU_SLOW_LINK: Final = "o-d-slow"
PIGOU_FAST_LINK: Final = "o-d-fast"


def pigou(params: PigouParams) -> GeneratedScenario:
    """Morning commute over two parallel routes between the same two nodes.

    Both routes end in the destination access link ``d-w``; a long return link
    ``w-h`` closes the network.
    """
    nodes = [
        Node(id="h", x=-1000.0, y=0.0),
        Node(id="o", x=0.0, y=0.0),
        Node(id="d", x=4000.0, y=0.0),
        Node(id="w", x=5000.0, y=0.0),
    ]
    speed = URBAN_SPEED
    links = [
        _link("h", "o", 100.0, UNCONSTRAINED_CAPACITY, lanes=10.0),
        Link(
            id=PIGOU_SLOW_LINK,
            from_node="o",
            to_node="d",
            length=params.slow_time * speed,
            capacity=UNCONSTRAINED_CAPACITY,
            free_speed=speed,
            lanes=10.0,
        ),
        Link(
            id=PIGOU_FAST_LINK,
            from_node="o",
            to_node="d",
            length=params.fast_time * speed,
            capacity=params.fast_capacity,
            free_speed=speed,
        ),
        _link("d", "w", 100.0, UNCONSTRAINED_CAPACITY, lanes=10.0),
        _link("w", "h", 6000.0, UNCONSTRAINED_CAPACITY, lanes=10.0),
    ]
    net = Network(nodes=nodes, links=links)

    persons = [
        _commute(f"p{index:05d}", "h-o", "d-w", leave, None)
        for index, leave in enumerate(
            _departures(params.persons, params.start, params.departure_window)
        )
    ]

    strategy = StrategyConfig(
        weights={"select": 0.7, "reroute": 0.3, "mode_choice": 0.0, "time_mutation": 0.0},
        modes=["car"],
    )
    config = ScenarioConfig(
        network=Path("network.json"),
        population=Path("population.json"),
        strategy=strategy,
        iterations=params.iterations,
        seed=params.seed,
    )
    return GeneratedScenario(net=net, persons=persons, transit=None, config=config)


class TwoRouteCordonParams(pdt.BaseModel, extra=pdt.Extra.forbid):
    """Commute into a cordon over a direct or a detour entry, with a parallel bus line."""

    persons: Annotated[int, pdt.Field(ge=1)] = 100
    leave: int = 7 * SECONDS_PER_HOUR - 300
    """Home departure of the first person."""

    departure_window: Annotated[int, pdt.Field(ge=0)] = 0
    work_end: int = 18 * SECONDS_PER_HOUR
    once_per_day: bool = True
    toll: bool = True
    iterations: Annotated[int, pdt.Field(ge=1)] = 20
    seed: int = 1


TWO_ROUTE_CORDON: Final = ("c", "w")


def two_route_cordon(params: TwoRouteCordonParams) -> GeneratedScenario:
    """Home outside, work inside the cordon; both road routes cross its boundary.

    Nodes ``h - j - c - w`` lie on a line with a detour node ``d`` between ``j`` and
    ``c``. Every road link exists in both directions.
    """
    coordinates: Dict[str, Tuple[float, float]] = {
        "h": (0.0, 0.0),
        "j": (1000.0, 0.0),
        "d": (2000.0, 1500.0),
        "c": (3000.0, 0.0),
        "w": (4000.0, 0.0),
    }
    nodes = [Node(id=node_id, x=x, y=y) for node_id, (x, y) in coordinates.items()]

    def length(a: str, b: str) -> float:
        (xa, ya), (xb, yb) = coordinates[a], coordinates[b]
        return float(np.hypot(xb - xa, yb - ya))

    links = []
    for a, b in (("h", "j"), ("j", "c"), ("j", "d"), ("d", "c"), ("c", "w")):
        links.append(_link(a, b, length(a, b), 1800.0))
        links.append(_link(b, a, length(a, b), 1800.0))
    links.sort(key=lambda link: link.id)
    net = Network(nodes=nodes, links=links)

    line_stops = ("h", "j", "c", "w")
    inter_stop_times = tuple(
        max(1, round(length(a, b) / BUS_SPEED)) for a, b in zip(line_stops, line_stops[1:])
    )
    transit = TransitSchedule(
        __root__=tuple(
            TransitLine(
                id=line_id,
                stops=stops,
                inter_stop_times=times,
                first_departure=5 * SECONDS_PER_HOUR,
                last_departure=23 * SECONDS_PER_HOUR,
                headway=600,
            )
            for line_id, stops, times in (
                ("inbound", line_stops, inter_stop_times),
                ("outbound", line_stops[::-1], inter_stop_times[::-1]),
            )
        )
    )

    persons = [
        _commute(f"p{index:05d}", "j-h", "c-w", leave, params.work_end)
        for index, leave in enumerate(
            _departures(params.persons, params.leave, params.departure_window)
        )
    ]

    config = ScenarioConfig(
        network=Path("network.json"),
        population=Path("population.json"),
        transit=Path("transit.json"),
        cordon=list(TWO_ROUTE_CORDON),
        toll=(
            TollConfig(preset="nyc-cbd-base", once_per_day=params.once_per_day)
            if params.toll
            else None
        ),
        iterations=params.iterations,
        seed=params.seed,
    )
    return GeneratedScenario(net=net, persons=persons, transit=transit, config=config)


GENERATORS: Final[Dict[str, Tuple[type, Callable[[Any], GeneratedScenario]]]] = {
    "grid-city": (GridCityParams, grid_city),
    "pigou": (PigouParams, pigou),
    "two-route-cordon": (TwoRouteCordonParams, two_route_cordon),
}


def generate(kind: str, **params: Any) -> GeneratedScenario:
    """Build a scenario of the named kind.

    Raises:
        ValueError: unknown kind.
        pydantic.ValidationError: invalid parameters.

    Examples:
        >>> scenario = generate("grid-city", size=4, cordon_size=2, persons=3)
        >>> len(scenario.net.nodes), len(scenario.persons), sorted(scenario.config.cordon)
        (16, 3, ['n1_1', 'n1_2', 'n2_1', 'n2_2'])
    """
    try:
        model, build = GENERATORS[kind]
    except KeyError:
        raise ValueError(
            f"Unknown scenario kind {kind!r}; expected one of {', '.join(GENERATORS)}."
        ) from None
    return build(model(**params))
