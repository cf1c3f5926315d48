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

"""Deterministic queue-based network loading.

Each link is a FIFO queue with a free-flow delay, an outflow capacity (fractional
credit accumulator) and a storage limit. Time advances in steps of one second over
the horizon; idle stretches are skipped. Per step, scheduled agent actions run first,
then links move vehicles in link id order, then waiting departures enter the network.
"""

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, Final, List, Optional, Sequence, Set, Tuple

from tollsim.errors import RoutingError
from tollsim.events import Event, EventStream
from tollsim.network import EFFECTIVE_VEHICLE_LENGTH, Link, Mode, Network
from tollsim.population import CarRoute, Person, Plan, PtRoute, TeleportRoute, route_gap
from tollsim.tolling import ChargeHistory, TollScheme, on_link_enter
from tollsim.transit import WALK_SPEED, TransitSchedule, walk_time
from tollsim.utils import HORIZON, SECONDS_PER_HOUR, format_time

LOG = logging.getLogger(__name__)

BIKE_SPEED: Final = 4.17
"""Cycling speed, in meters per second."""

TELEPORT_SPEEDS: Final[Dict[str, float]] = {"walk": WALK_SPEED, "bike": BIKE_SPEED}


def teleport_time(mode: Mode, distance: float) -> int:
    """Duration of a teleported walk or bike leg, in whole seconds (rounded up).

    Examples:
        >>> teleport_time("bike", 417.0)
        100
    """
    return math.ceil(round(distance / TELEPORT_SPEEDS[mode], 9))


def free_flow_steps(link: Link) -> int:
    """Free-flow traversal time of `link`, rounded up to whole steps."""
    return max(1, math.ceil(round(link.free_flow_time, 9)))


def storage_capacity(link: Link, scale: float = 1.0) -> int:
    """Number of vehicles `link` can hold.

    Examples:
        >>> link = Link(id="l", from_node="a", to_node="b", length=75.0, capacity=1800,
        ...             free_speed=10.0, lanes=2)
        >>> storage_capacity(link), storage_capacity(link, scale=0.1), storage_capacity(link, 0.01)
        (20, 2, 1)
    """
    cells = math.floor(round(link.length * link.lanes / EFFECTIVE_VEHICLE_LENGTH, 9))
    return max(1, math.floor(round(cells * scale, 9)))


@dataclass
class QueueLinkState:
    """Dynamic state of one link during a run."""

    link: Link
    flow_capacity: float
    """Outflow capacity, in vehicles per step."""

    storage_capacity: int
    queue: Deque[Tuple["_Vehicle", int]] = field(default_factory=deque)
    """Vehicles on the link with their earliest exit time, in entry order."""

    credit: float = 0.0
    """Outflow credit, in vehicles."""

    last_update: int = 0
    waiting: Deque["_Vehicle"] = field(default_factory=deque)
    """Departing vehicles waiting for storage space to enter the link."""

    wakeup_at: Optional[int] = None

    @classmethod
    def create(cls, link: Link, scale: float) -> "QueueLinkState":
        flow = link.capacity * scale / SECONDS_PER_HOUR
        state = cls(link=link, flow_capacity=flow, storage_capacity=storage_capacity(link, scale))
        state.credit = state.credit_cap
        return state

    @property
    def credit_cap(self) -> float:
        """Burst bound of the credit accumulator."""
        return max(1.0, self.flow_capacity)

    def accrue(self, t: int) -> None:
        if t > self.last_update:
            self.credit = min(
                self.credit_cap, self.credit + self.flow_capacity * (t - self.last_update)
            )
            self.last_update = t

    def has_space(self) -> bool:
        return len(self.queue) < self.storage_capacity


@dataclass
class _Agent:
    person: Person
    plan: Plan
    activity: int = 0
    """Index of the current (or last started) activity."""

    complete: bool = False
    stuck: bool = False


@dataclass
class _Vehicle:
    agent: _Agent
    links: List[str]
    position: int = 0
    """Index in `links` of the link the vehicle is on (or waiting to enter)."""


@dataclass(frozen=True)
class StuckRecord:
    """A person whose plan did not complete within the horizon."""

    person: str
    time: int
    link: Optional[str]
    reason: str


@dataclass(frozen=True)
class MobsimResult:
    events: EventStream
    stuck: Tuple[StuckRecord, ...]
    peak_occupancy: Dict[str, int]
    """Largest number of vehicles simultaneously on each used link."""

    @property
    def stuck_persons(self) -> Set[str]:
        return {record.person for record in self.stuck}


def check_routes(
    persons: Sequence[Person], net: Network, transit: Optional[TransitSchedule]
) -> None:
    """Check that every selected plan is executable.

    Raises:
        RoutingError: a leg is unrouted, a car route is broken, or a transit route
            names an unknown line.
    """
    line_ids = {line.id for line in transit} if transit is not None else set()
    for person in persons:
        for index, (origin, leg, destination) in enumerate(person.selected_plan.trips()):
            where = f"person {person.id!r}, leg {index}"
            if leg.route is None:
                raise RoutingError(f"{where}: leg is not routed.")
            if isinstance(leg.route, CarRoute):
                gap = route_gap(net, origin.link, destination.link, leg.route.links)
                if gap is not None:
                    raise RoutingError(f"{where}: {gap}.")
            elif isinstance(leg.route, PtRoute) and not leg.route.walk_only:
                if leg.route.line not in line_ids:
                    raise RoutingError(f"{where}: unknown transit line {leg.route.line!r}.")


class QueueSimulation:
    """One execution of all selected plans on the network."""

    def __init__(
        self,
        net: Network,
        persons: Sequence[Person],
        toll: Optional[TollScheme] = None,
        *,
        transit: Optional[TransitSchedule] = None,
        scale: float = 1.0,
    ) -> None:
        if not 0.0 < scale <= 1.0:
            raise ValueError("The flow-scaling factor must lie in (0, 1].")

        check_routes(persons, net, transit)

        self.net = net
        self.toll = toll
        self.transit = transit
        self.events = EventStream()
        self.history = ChargeHistory()
        self.states = {link.id: QueueLinkState.create(link, scale) for link in net.links}
        self.agents = [_Agent(person, person.selected_plan) for person in persons]
        self.peak_occupancy: Dict[str, int] = {}
        self.stuck: List[StuckRecord] = []

        self._actions: List[Tuple[int, int, str, _Agent, Any]] = []
        self._wakeups: List[Tuple[int, str]] = []
        self._ready: Set[str] = set()
        self._waiting: Set[str] = set()
        self._seq = 0
        self._on_network = 0

        for agent in self.agents:
            activities = agent.plan.activities
            if len(activities) == 1:
                agent.complete = True
            else:
                end_time = activities[0].end_time
                assert end_time is not None  # noqa: S101
                self._schedule(end_time, "act_end", agent)

    def _schedule(self, t: int, kind: str, agent: _Agent, payload: Any = None) -> None:
        heapq.heappush(self._actions, (t, self._seq, kind, agent, payload))
        self._seq += 1

    def _emit(self, t: int, kind: Any, agent: _Agent, **fields: Any) -> None:
        self.events.append(Event(time=t, kind=kind, person=agent.person.id, **fields))

    def _abandon(self, agent: _Agent, t: int, link: Optional[str], reason: str) -> None:
        agent.stuck = True
        self.stuck.append(StuckRecord(agent.person.id, t, link, reason))

    # Agent actions

    def _end_activity(self, agent: _Agent, t: int) -> None:
        plan = agent.plan
        origin = plan.activities[agent.activity]
        destination = plan.activities[agent.activity + 1]
        leg = plan.legs[agent.activity]

        self._emit(t, "act_end", agent, link=origin.link)
        self._emit(t, "depart", agent, link=origin.link, mode=leg.mode)

        route = leg.route
        if isinstance(route, CarRoute):
            if not route.links:
                self._arrive(agent, t)
                return
            vehicle = _Vehicle(agent, list(route.links))
            self.states[route.links[0]].waiting.append(vehicle)
            self._waiting.add(route.links[0])
            self._on_network += 1
        elif isinstance(route, TeleportRoute):
            arrival = t + teleport_time(leg.mode, route.distance)
            if arrival >= HORIZON:
                self._abandon(agent, t, destination.link, "teleport leg ends after the horizon")
            else:
                self._schedule(arrival, "arrive", agent)
        elif isinstance(route, PtRoute):
            self._start_transit_trip(agent, t, route, destination.link)

    def _start_transit_trip(self, agent: _Agent, t: int, route: PtRoute, target: str) -> None:
        if route.walk_only:
            arrival = t + walk_time(route.distance)
            if arrival >= HORIZON:
                self._abandon(agent, t, target, "transit walk ends after the horizon")
            else:
                self._schedule(arrival, "arrive", agent)
            return

        assert self.transit is not None and route.line is not None  # noqa: S101
        assert route.access_stop is not None and route.egress_stop is not None  # noqa: S101
        line = self.transit.line(route.line)
        board = line.next_departure(route.access_stop, t + walk_time(route.access_distance))
        if board is None:
            self._abandon(agent, t, None, f"no remaining service on line {line.id!r}")
            return

        alight = board + line.offset(route.egress_stop) - line.offset(route.access_stop)
        arrival = alight + walk_time(route.egress_distance)
        if arrival >= HORIZON:
            self._abandon(agent, t, None, f"line {line.id!r} arrives after the horizon")
            return

        self._schedule(board, "board", agent, line.id)
        self._schedule(alight, "alight", agent, line.id)
        self._schedule(arrival, "arrive", agent)

    def _arrive(self, agent: _Agent, t: int) -> None:
        leg = agent.plan.legs[agent.activity]
        agent.activity += 1
        activity = agent.plan.activities[agent.activity]
        self._emit(t, "arrive", agent, link=activity.link, mode=leg.mode)
        self._emit(t, "act_start", agent, link=activity.link)

        if agent.activity == len(agent.plan.activities) - 1:
            agent.complete = True
            return

        assert activity.end_time is not None  # noqa: S101
        self._schedule(max(activity.end_time, t), "act_end", agent)

    def _run_actions(self, t: int) -> None:
        while self._actions and self._actions[0][0] <= t:
            _, _, kind, agent, payload = heapq.heappop(self._actions)
            if kind == "act_end":
                self._end_activity(agent, t)
            elif kind == "arrive":
                self._arrive(agent, t)
            else:
                self._emit(t, kind, agent, link=payload, mode="pt")

    # Network dynamics

    def _enter_link(self, vehicle: _Vehicle, state: QueueLinkState, t: int) -> None:
        link_id = state.link.id
        agent = vehicle.agent
        self._emit(t, "link_enter", agent, link=link_id)

        if self.toll is not None:
            amount = on_link_enter(self.toll, agent.person, link_id, t, self.history, mode="car")
            if amount != 0.0:
                self._emit(t, "money", agent, link=link_id, amount=amount)

        exit_time = t + free_flow_steps(state.link)
        state.queue.append((vehicle, exit_time))
        self.peak_occupancy[link_id] = max(self.peak_occupancy.get(link_id, 0), len(state.queue))
        if len(state.queue) == 1:
            self._wake(state, exit_time)

    def _wake(self, state: QueueLinkState, t: int) -> None:
        if state.wakeup_at != t:
            state.wakeup_at = t
            heapq.heappush(self._wakeups, (t, state.link.id))

    def _move_link(self, state: QueueLinkState, t: int) -> None:
        state.accrue(t)
        link_id = state.link.id

        while state.queue:
            vehicle, exit_time = state.queue[0]
            if exit_time > t:
                self._ready.discard(link_id)
                self._wake(state, exit_time)
                return
            if state.credit < 1.0:
                return

            if vehicle.position == len(vehicle.links) - 1:
                state.queue.popleft()
                state.credit -= 1.0
                self._emit(t, "link_leave", vehicle.agent, link=link_id)
                self._on_network -= 1
                self._arrive(vehicle.agent, t)
                continue

            downstream = self.states[vehicle.links[vehicle.position + 1]]
            if not downstream.has_space():
                return

            state.queue.popleft()
            state.credit -= 1.0
            self._emit(t, "link_leave", vehicle.agent, link=link_id)
            vehicle.position += 1
            self._enter_link(vehicle, downstream, t)

        self._ready.discard(link_id)

    def _insert_waiting(self, t: int) -> None:
        for link_id in sorted(self._waiting):
            state = self.states[link_id]
            while state.waiting and state.has_space():
                self._enter_link(state.waiting.popleft(), state, t)
            if not state.waiting:
                self._waiting.discard(link_id)

    def advance_time_step(self, t: int) -> None:
        """Advance the simulation through step `t`."""
        self._run_actions(t)

        while self._wakeups and self._wakeups[0][0] <= t:
            wake_time, link_id = heapq.heappop(self._wakeups)
            state = self.states[link_id]
            if state.wakeup_at == wake_time:
                state.wakeup_at = None
            self._ready.add(link_id)

        for link_id in sorted(self._ready):
            self._move_link(self.states[link_id], t)

        # arrivals during the move phase may end activities at t
        self._run_actions(t)
        self._insert_waiting(t)

    def _next_step(self, t: int) -> Optional[int]:
        if self._ready or self._waiting:
            return t + 1
        candidates = [queue[0][0] for queue in (self._actions, self._wakeups) if queue]
        if not candidates:
            return None
        return max(t + 1, min(candidates))

    def run(self) -> MobsimResult:
        """Run from the first scheduled action to the horizon (or until idle)."""
        t: Optional[int] = self._actions[0][0] if self._actions else None
        last_hour = -1
        while t is not None and t < HORIZON:
            if t // SECONDS_PER_HOUR != last_hour:
                last_hour = t // SECONDS_PER_HOUR
                LOG.debug("%s: %d vehicles on the network", format_time(t), self._on_network)
            self.advance_time_step(t)
            t = self._next_step(t)

        self._flush_stuck()
        return MobsimResult(
            events=self.events,
            stuck=tuple(self.stuck),
            peak_occupancy=dict(self.peak_occupancy),
        )

    def _flush_stuck(self) -> None:
        en_route: Set[str] = set()
        for link_id in sorted(self.states):
            state = self.states[link_id]
            for vehicle, _ in state.queue:
                en_route.add(vehicle.agent.person.id)
                self._abandon(vehicle.agent, HORIZON, link_id, "on the network at the horizon")
            for vehicle in state.waiting:
                en_route.add(vehicle.agent.person.id)
                self._abandon(vehicle.agent, HORIZON, link_id, "waiting to enter at the horizon")

        for agent in self.agents:
            if not (agent.complete or agent.stuck):
                self._abandon(agent, HORIZON, None, "plan incomplete at the horizon")

        if en_route:
            LOG.warning("%d vehicles still on the network at the horizon", len(en_route))
        if self.stuck:
            LOG.warning("%d persons did not complete their plans", len(self.stuck))


def run(
    net: Network,
    persons: Sequence[Person],
    toll: Optional[TollScheme] = None,
    *,
    transit: Optional[TransitSchedule] = None,
    scale: float = 1.0,
    seed: Optional[int] = None,
) -> MobsimResult:
    """Execute every person's selected plan simultaneously on the network.

    Args:
        net: road network
        persons: agents; their selected plans must be fully routed
        toll: toll scheme charged on link entry, if any
        transit: schedule serving the transit legs
        scale: flow-scaling factor applied to capacities and storage, in (0, 1]
        seed: run seed. The queue model draws no random numbers and resolves ties in a
            fixed order, so the events are the same for every seed.

    Returns:
        The time-ordered event stream, the stuck diagnostics and link occupancy peaks.

    Raises:
        RoutingError: a selected plan has an unrouted leg or a broken route.
    """
    LOG.debug("mobsim run: %d persons, scale %s, seed %s", len(persons), scale, seed)
    return QueueSimulation(net, persons, toll, transit=transit, scale=scale).run()
