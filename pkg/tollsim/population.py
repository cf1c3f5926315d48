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

"""Agents, daily activity/leg plans, and bounded plan memories."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Iterator, List, Literal, Optional, Sequence, Union

import pydantic as pdt
from typing_extensions import TypeAlias

from tollsim.errors import ScenarioFormatError
from tollsim.network import Mode, Network, StrPath
from tollsim.utils import HORIZON, parse_time

LOG = logging.getLogger(__name__)

DEFAULT_MAX_PLANS = 5
"""Default size of an agent's plan memory."""


class Activity(pdt.BaseModel, extra=pdt.Extra.forbid):
    type: Literal["activity"] = "activity"
    kind: str
    """Activity type label (home, work, ...)."""

    link: str
    end_time: Optional[int] = None
    """Seconds since midnight; unset for the final activity."""

    typical_duration: Optional[int] = pdt.Field(default=None, gt=0)
    """Seconds; overrides the scoring parameters' per-kind value when set."""

    @pdt.validator("typical_duration", pre=True)
    @classmethod
    def parse_typical_duration(cls, value: Any) -> Optional[int]:
        return None if value is None else parse_time(value)

    @pdt.validator("end_time", pre=True)
    @classmethod
    def parse_end_time(cls, value: Any) -> Optional[int]:
        if value is None:
            return None
        seconds = parse_time(value)
        if not 0 <= seconds <= HORIZON:
            raise ValueError(f"end_time must lie within [0, {HORIZON}] seconds.")
        return seconds


class CarRoute(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Links traversed after leaving the origin link, destination link included."""

    type: Literal["car"] = "car"
    links: List[str]
    distance: float = 0.0
    """Sum of the traversed link lengths, in meters."""


class PtRoute(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Direct transit trip: walk to a stop, ride one line, walk to the destination."""

    type: Literal["pt"] = "pt"
    line: Optional[str] = None
    """Transit line id; unset for a walk-only trip."""

    access_stop: Optional[int] = None
    """Index of the boarding stop in the line's stop list."""

    egress_stop: Optional[int] = None
    access_distance: float = 0.0
    egress_distance: float = 0.0
    distance: float = 0.0
    """Crow-fly distance covered by the whole trip, in meters."""

    @property
    def walk_only(self) -> bool:
        return self.line is None


class TeleportRoute(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Direct-distance descriptor for walk and bike legs."""

    type: Literal["teleport"] = "teleport"
    distance: float


# Tried in order; the "type" tag is optional in files.
Route: TypeAlias = Union[CarRoute, TeleportRoute, PtRoute]


class Leg(pdt.BaseModel, extra=pdt.Extra.forbid):
    type: Literal["leg"] = "leg"
    mode: Mode
    departure_time: Optional[int] = None
    """Filled in at execution."""

    route: Optional[Route] = None

    @pdt.validator("departure_time", pre=True)
    @classmethod
    def parse_departure_time(cls, value: Any) -> Optional[int]:
        return None if value is None else parse_time(value)

    @pdt.root_validator(skip_on_failure=True)
    @classmethod
    def route_matches_mode(cls, values: Any) -> Any:
        mode, route = values.get("mode"), values.get("route")
        if route is None:
            return values

        expected = {"car": "car", "pt": "pt", "walk": "teleport", "bike": "teleport"}[mode]
        if route.type != expected:
            raise ValueError(f"{mode} leg cannot carry a {route.type} route.")
        return values


PlanElement: TypeAlias = Union[Activity, Leg]


class Plan(pdt.BaseModel, extra=pdt.Extra.forbid):
    """Alternating activity/leg chain starting and ending with an activity."""

    elements: List[PlanElement]
    score: Optional[float] = None
    """Unset until the plan has been executed and scored."""

    @pdt.validator("elements")
    @classmethod
    def check_alternation(cls, elements: List[Union[Activity, Leg]]) -> List[Union[Activity, Leg]]:
        if not elements:
            raise ValueError("A plan needs at least one activity.")

        for index, element in enumerate(elements):
            expected = Activity if index % 2 == 0 else Leg
            if not isinstance(element, expected):
                raise ValueError(
                    f"element {index} must be an {expected.__name__.lower()}, "
                    f"got a {element.type}."
                )

        if isinstance(elements[-1], Leg):
            raise ValueError("A plan must end with an activity.")

        previous_end = -1
        for activity in [e for e in elements[:-1] if isinstance(e, Activity)]:
            if activity.end_time is None:
                raise ValueError(f"Non-final activity {activity.kind!r} needs an end_time.")
            if activity.end_time < previous_end:
                raise ValueError("Activity end times must be non-decreasing.")
            previous_end = activity.end_time

        return elements

    @property
    def activities(self) -> List[Activity]:
        return [element for element in self.elements if isinstance(element, Activity)]

    @property
    def legs(self) -> List[Leg]:
        return [element for element in self.elements if isinstance(element, Leg)]

    def trips(self) -> Iterator[tuple]:
        """Iterate over ``(origin activity, leg, destination activity)`` triples."""
        for index in range(1, len(self.elements), 2):
            yield self.elements[index - 1], self.elements[index], self.elements[index + 1]

    @property
    def sort_score(self) -> float:
        """Score used for ordering; unscored plans rank below every scored plan."""
        return -math.inf if self.score is None else self.score

    def is_routed(self) -> bool:
        return all(leg.route is not None for leg in self.legs)


class Person(pdt.BaseModel, extra=pdt.Extra.forbid, allow_population_by_field_name=True):
    id: str
    toll_exempt: bool = False
    plan_memory: List[Plan] = pdt.Field(alias="plans", min_items=1)
    """Memorized plans, oldest first."""

    selected: int = 0

    @pdt.root_validator(skip_on_failure=True)
    @classmethod
    def check_selected(cls, values: Any) -> Any:
        if not 0 <= values["selected"] < len(values["plan_memory"]):
            raise ValueError(f"selected={values['selected']} is not a valid plan index.")
        return values

    @property
    def selected_plan(self) -> Plan:
        return self.plan_memory[self.selected]


class Population(pdt.BaseModel, extra=pdt.Extra.forbid):
    __root__: List[Person]

    def __iter__(self) -> Iterator[Person]:  # type: ignore[override]
        return iter(self.__root__)

    def __len__(self) -> int:
        return len(self.__root__)

    def __getitem__(self, index: int) -> Person:
        return self.__root__[index]

    @property
    def persons(self) -> List[Person]:
        return self.__root__

    def by_id(self) -> dict:
        return {person.id: person for person in self.__root__}


def add_plan(person: Person, plan: Plan, *, max_plans: int = DEFAULT_MAX_PLANS) -> Person:
    """Memorize a new plan and select it.

    If the memory is full, the worst-scored old plan is evicted first. Unscored plans
    rank worst; among equally bad plans an unselected one goes before the selected
    one, and then the oldest goes first.

    Args:
        person: agent to update (modified in place)
        plan: the new plan
        max_plans: plan memory size.

    Returns:
        The updated person.
    """
    if max_plans < 1:
        raise ValueError("max_plans must be >= 1.")

    while len(person.plan_memory) >= max_plans:
        evicted = min(
            range(len(person.plan_memory)),
            key=lambda index: (
                person.plan_memory[index].sort_score,
                index == person.selected,
                index,
            ),
        )
        del person.plan_memory[evicted]
        if person.selected > evicted:
            person.selected -= 1
        elif person.selected == evicted:
            person.selected = 0

    person.plan_memory.append(plan)
    person.selected = len(person.plan_memory) - 1
    return person


def route_gap(net: Network, origin: str, destination: str, links: Sequence[str]) -> Optional[str]:
    """Describe why `links` is not a car route from `origin` to `destination`.

    Returns:
        None if the route is valid, else a short description of the first defect.
    """
    if not links:
        return None if origin == destination else "empty route between distinct links"

    previous = origin
    for link_id in links:
        if not net.has_link(link_id):
            return f"unknown link {link_id!r}"
        if net.link(previous).to_node != net.link(link_id).from_node:
            return f"{link_id!r} does not continue {previous!r}"
        previous = link_id

    if previous != destination:
        return f"route ends on {previous!r}, not on {destination!r}"
    return None


def check_references(population: Population, net: Network) -> None:
    """Check that activity links exist in `net` and that car routes are connected.

    Raises:
        ScenarioFormatError: an unknown link is referenced or a car route is broken.
    """
    for person_index, person in enumerate(population):
        for plan_index, plan in enumerate(person.plan_memory):
            locus = f"[{person_index}].plans[{plan_index}].elements"
            for element_index, element in enumerate(plan.elements):
                if isinstance(element, Activity) and not net.has_link(element.link):
                    raise ScenarioFormatError(
                        f"{locus}[{element_index}].link: unknown link {element.link!r}"
                    )

            for leg_index, (origin, leg, destination) in enumerate(plan.trips()):
                if isinstance(leg.route, CarRoute):
                    gap = route_gap(net, origin.link, destination.link, leg.route.links)
                    if gap is not None:
                        raise ScenarioFormatError(f"{locus}[{2 * leg_index + 1}].route: {gap}")


def load_population(path: StrPath, net: Optional[Network] = None) -> Population:
    """Load a population file.

    Args:
        path: file to read
        net: if given, link references are checked against this network.

    Raises:
        ScenarioFormatError: the file is malformed, violates a plan invariant, or
            references unknown links.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"{path}: line {e.lineno}: {e.msg}") from e

    try:
        population = Population.parse_obj(data)
    except pdt.ValidationError as e:
        raise ScenarioFormatError.from_validation_error(e, source=str(path)) from e

    ids = [person.id for person in population]
    if len(set(ids)) != len(ids):
        raise ScenarioFormatError(f"{path}: duplicate person ids.")

    if net is not None:
        check_references(population, net)

    LOG.debug("Loaded population %s: %d persons", path, len(population))
    return population


def population_to_json(persons: Sequence[Person]) -> str:
    """File representation of a population."""
    population = Population(__root__=list(persons))
    return population.json(by_alias=True, indent=2) + "\n"


def save_population(persons: Sequence[Person], path: StrPath) -> None:
    """Write a population file readable by :func:`load_population`."""
    Path(path).write_text(population_to_json(persons), encoding="utf-8")
