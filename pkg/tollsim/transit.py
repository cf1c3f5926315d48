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

"""Headway-based transit schedules and direct-line earliest-arrival itineraries."""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Final, Iterator, List, Optional, Sequence, Tuple

import pydantic as pdt

from tollsim.errors import NoServiceError, ScenarioFormatError
from tollsim.network import Network, StrPath
from tollsim.population import PtRoute
from tollsim.utils import HORIZON, parse_time

LOG = logging.getLogger(__name__)

WALK_SPEED: Final = 1.34
"""Walking speed for access, egress and walk legs, in meters per second."""

MAX_WALK_RADIUS: Final = 1000.0
"""Largest crow-fly distance to a boarding or alighting stop, in meters."""


def walk_time(distance: float) -> int:
    """Walking time over a crow-fly distance, in whole seconds (rounded up).

    Examples:
        >>> walk_time(134.0)
        100

        >>> walk_time(0.0)
        0
    """
    return math.ceil(round(distance / WALK_SPEED, 9))


class TransitLine(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Line served by vehicles starting every `headway` seconds at the first stop."""

    id: str
    stops: Tuple[str, ...]
    """Node ids in service order."""

    inter_stop_times: Tuple[int, ...]
    """Seconds between consecutive stops."""

    first_departure: int
    last_departure: int
    """Latest vehicle start at the first stop, in seconds."""

    headway: int = pdt.Field(gt=0)

    @pdt.validator("first_departure", "last_departure", "headway", pre=True)
    @classmethod
    def parse_times(cls, value: Any) -> int:
        return parse_time(value)

    @pdt.validator("stops")
    @classmethod
    def check_stops(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        if len(value) < 2:
            raise ValueError("a line needs at least two stops.")
        return value

    @pdt.validator("inter_stop_times", each_item=True)
    @classmethod
    def check_positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("inter-stop times must be > 0.")
        return value

    @pdt.root_validator(skip_on_failure=True)
    @classmethod
    def check_schedule(cls, values: Any) -> Any:
        if len(values["inter_stop_times"]) != len(values["stops"]) - 1:
            raise ValueError("inter_stop_times needs one entry per consecutive stop pair.")
        if not 0 <= values["first_departure"] <= values["last_departure"] <= HORIZON:
            raise ValueError("departures must satisfy 0 <= first <= last <= horizon.")
        return values

    def offset(self, stop_index: int) -> int:
        """Travel time from the first stop to `stop_index`."""
        return sum(self.inter_stop_times[:stop_index])

    def next_departure(self, stop_index: int, t: int) -> Optional[int]:
        """Earliest departure at `stop_index` no earlier than `t`.

        Returns:
            The departure time, or None if no vehicle remains.

        Examples:
            >>> line = TransitLine(id="l", stops=["a", "b", "c"], inter_stop_times=[150, 150],
            ...                    first_departure="06:00", last_departure="07:00", headway=600)
            >>> line.next_departure(0, parse_time("06:05"))
            22200
            >>> line.next_departure(2, parse_time("06:00"))
            21900
            >>> line.next_departure(0, parse_time("07:00:01")) is None
            True
        """
        offset = self.offset(stop_index)
        runs_passed = max(0, math.ceil((t - offset - self.first_departure) / self.headway))
        start = self.first_departure + runs_passed * self.headway
        if start > self.last_departure:
            return None
        return start + offset


def next_departure(line: TransitLine, stop_index: int, t: int) -> Optional[int]:
    """Earliest departure of `line` at `stop_index` no earlier than `t`, or None."""
    if not 0 <= stop_index < len(line.stops):
        raise IndexError(f"Line {line.id!r} has no stop {stop_index}.")
    return line.next_departure(stop_index, t)


class TransitSchedule(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    __root__: Tuple[TransitLine, ...] = ()

    def __iter__(self) -> Iterator[TransitLine]:  # type: ignore[override]
        return iter(self.__root__)

    def __len__(self) -> int:
        return len(self.__root__)

    @property
    def lines(self) -> Tuple[TransitLine, ...]:
        return self.__root__

    def line(self, line_id: str) -> TransitLine:
        for line in self.__root__:
            if line.id == line_id:
                return line
        raise KeyError(line_id)


@dataclass(frozen=True)
class Itinerary:
    """Timed direct transit trip. A walk-only itinerary has no `line`."""

    departure: int
    arrival: int
    line: Optional[str] = None
    access_stop: Optional[int] = None
    egress_stop: Optional[int] = None
    board_time: Optional[int] = None
    alight_time: Optional[int] = None
    access_distance: float = 0.0
    egress_distance: float = 0.0
    distance: float = 0.0

    @property
    def walk_only(self) -> bool:
        return self.line is None

    @property
    def travel_time(self) -> int:
        return self.arrival - self.departure

    @property
    def wait(self) -> int:
        if self.walk_only:
            return 0
        assert self.board_time is not None  # noqa: S101
        return self.board_time - self.departure - walk_time(self.access_distance)

    @property
    def in_vehicle(self) -> int:
        if self.board_time is None or self.alight_time is None:
            return 0
        return self.alight_time - self.board_time

    def to_route(self) -> PtRoute:
        return PtRoute(
            line=self.line,
            access_stop=self.access_stop,
            egress_stop=self.egress_stop,
            access_distance=self.access_distance,
            egress_distance=self.egress_distance,
            distance=self.distance,
        )


def _stops_near(
    net: Network, line: TransitLine, point: Tuple[float, float]
) -> Dict[int, float]:
    result = {}
    for index, node_id in enumerate(line.stops):
        node = net.node(node_id)
        distance = math.hypot(node.x - point[0], node.y - point[1])
        if distance <= MAX_WALK_RADIUS:
            result[index] = distance
    return result


def pt_itinerary(
    net: Network,
    lines: Sequence[TransitLine],
    origin_link: str,
    destination_link: str,
    departure: int,
) -> Itinerary:
    """Earliest-arrival direct transit itinerary between two activity locations.

    Every line with a stop within walking radius of the origin followed (later in
    the line) by a stop within walking radius of the destination is considered. Ties
    go to the lexicographically smallest ``(line id, boarding stop, alighting stop)``.
    If walking the whole distance arrives strictly earlier than every connection, a
    walk-only itinerary is returned instead.

    Raises:
        NoServiceError: no line connects the two locations after `departure`.
    """
    origin = net.location(origin_link)
    destination = net.location(destination_link)
    direct = math.hypot(origin[0] - destination[0], origin[1] - destination[1])

    best: Optional[Tuple[Tuple[int, str, int, int], Itinerary]] = None
    for line in sorted(lines, key=lambda line: line.id):
        access = _stops_near(net, line, origin)
        if not access:
            continue
        egress = _stops_near(net, line, destination)

        for i, access_distance in sorted(access.items()):
            board = line.next_departure(i, departure + walk_time(access_distance))
            if board is None:
                continue
            for j, egress_distance in sorted(egress.items()):
                if j <= i:
                    continue
                alight = board + line.offset(j) - line.offset(i)
                arrival = alight + walk_time(egress_distance)
                key = (arrival, line.id, i, j)
                if best is None or key < best[0]:
                    best = (
                        key,
                        Itinerary(
                            departure=departure,
                            arrival=arrival,
                            line=line.id,
                            access_stop=i,
                            egress_stop=j,
                            board_time=board,
                            alight_time=alight,
                            access_distance=access_distance,
                            egress_distance=egress_distance,
                            distance=direct,
                        ),
                    )

    if best is None:
        raise NoServiceError(
            f"No direct transit service from {origin_link!r} to {destination_link!r} "
            f"after t={departure}."
        )

    walk_arrival = departure + walk_time(direct)
    if walk_arrival < best[1].arrival:
        return Itinerary(departure=departure, arrival=walk_arrival, distance=direct)

    return best[1]


def load_transit(path: StrPath, net: Optional[Network] = None) -> TransitSchedule:
    """Load a transit schedule file.

    Raises:
        ScenarioFormatError: the file is malformed or, if `net` is given, a stop is not
            a network node.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"{path}: line {e.lineno}: {e.msg}") from e

    try:
        schedule = TransitSchedule.parse_obj(data)
    except pdt.ValidationError as e:
        raise ScenarioFormatError.from_validation_error(e, source=str(path)) from e

    ids = [line.id for line in schedule]
    if len(set(ids)) != len(ids):
        raise ScenarioFormatError(f"{path}: duplicate line ids.")

    if net is not None:
        for index, line in enumerate(schedule):
            unknown = [stop for stop in line.stops if not net.has_node(stop)]
            if unknown:
                raise ScenarioFormatError(f"{path}: [{index}].stops: unknown nodes {unknown}")

    LOG.debug("Loaded transit schedule %s: %d lines", path, len(schedule))
    return schedule


def schedule_to_list(schedule: TransitSchedule) -> List[Dict[str, Any]]:
    """Plain records of the schedule's lines, in file layout."""
    return [line.dict() for line in schedule]


def save_transit(schedule: TransitSchedule, path: StrPath) -> None:
    """Write a transit schedule file readable by :func:`load_transit`."""
    Path(path).write_text(
        json.dumps(schedule_to_list(schedule), indent=2) + "\n", encoding="utf-8"
    )
