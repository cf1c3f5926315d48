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

"""Time-dependent least generalized cost car routing."""

import dataclasses
import heapq
import logging
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from tollsim.errors import NoServiceError, RoutingError
from tollsim.mobsim import teleport_time
from tollsim.network import Link, Mode, Network
from tollsim.population import CarRoute, Leg, Person, Plan, Route, TeleportRoute
from tollsim.replanning.travel_times import TravelTimeField
from tollsim.scoring import ScoringParams, leg_utility
from tollsim.tolling import TollScheme
from tollsim.transit import TransitSchedule, pt_itinerary
from tollsim.utils import SECONDS_PER_DAY, SECONDS_PER_HOUR

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class CarTrip:
    """A routed car trip with its expected attributes."""

    links: Tuple[str, ...]
    """Links traversed after the origin link, destination link included."""

    cost: float
    """Generalized cost, in equivalent seconds."""

    travel_time: float
    distance: float
    expected_toll: float

    def to_route(self) -> CarRoute:
        return CarRoute(links=list(self.links), distance=self.distance)


def toll_seconds_per_dollar(params: ScoringParams) -> float:
    """Time equivalent of one dollar under the scoring coefficients.

    Examples:
        >>> 9 * toll_seconds_per_dollar(ScoringParams())
        2700.0
    """
    beta_trav = params.travel_coefficient("car")
    if beta_trav >= 0.0:
        raise ValueError("beta_trav['car'] must be < 0 to convert tolls into time.")
    return params.beta_money / abs(beta_trav) * SECONDS_PER_HOUR


def link_toll(toll: Optional[TollScheme], link: Link, t: float) -> float:
    """Charge expected on entering `link` at `t`, assuming no earlier charge that day."""
    if toll is None or "car" not in toll.charged_modes or link.id not in toll.charged_links:
        return 0.0
    return toll.rate_at(int(t))


# (cost, path, node, time, toll, distance, visited); terminal labels use node None
_Label = Tuple[float, Tuple[str, ...], Optional[str], float, float, float, FrozenSet[str]]


def _settled_search(
    net: Network,
    ttf: TravelTimeField,
    scheme: Optional[TollScheme],
    start: str,
    target: str,
    departure: float,
    per_dollar: float,
) -> Optional[CarTrip]:
    """Label-setting search, one label per node.

    Exact when the generalized cost is FIFO, i.e. without a toll that can change
    during the trip. Otherwise the returned trip is feasible and its cost an upper bound.
    """
    heap: List[Tuple[float, Tuple[str, ...], Optional[str], float, float, float]] = [
        (0.0, (), start, departure, 0.0, 0.0)
    ]
    settled: Set[str] = set()

    while heap:
        cost, path, node, t, paid, distance = heapq.heappop(heap)
        if node is None:
            return CarTrip(
                links=path,
                cost=cost,
                travel_time=t - departure,
                distance=distance,
                expected_toll=paid,
            )
        if node in settled:
            continue
        settled.add(node)

        for link in net.out_links(node, "car"):
            charge = link_toll(scheme, link, t)
            step = ttf.travel_time(link.id, t)
            label = (
                cost + step + charge * per_dollar,
                path + (link.id,),
                None if link.id == target else link.to_node,
                t + step,
                paid + charge,
                distance + link.length,
            )
            if label[2] is None or label[2] not in settled:
                heapq.heappush(heap, label)

    return None


def rate_drop(scheme: TollScheme, start: float, end: float) -> float:
    """Largest fall of the rate between two times ``start <= a <= b <= end``.

    Examples:
        >>> from tollsim.tolling import preset_scheme
        >>> scheme = preset_scheme("nyc-cbd-base", kind="link", tolled_links={"x"})
        >>> rate_drop(scheme, 5 * 3600, 9 * 3600), rate_drop(scheme, 19 * 3600, 23 * 3600)
        (0.0, 4.0)
    """
    changes = [
        day * SECONDS_PER_DAY + period.start
        for day in range(int(start) // SECONDS_PER_DAY, int(end) // SECONDS_PER_DAY + 1)
        for period in scheme.periods
        if start < day * SECONDS_PER_DAY + period.start <= end
    ]
    peak = scheme.rate_at(int(start))
    drop = 0.0
    for t in sorted(changes):
        rate = scheme.rate_at(t)
        drop, peak = max(drop, peak - rate), max(peak, rate)
    return drop


def route_car(
    net: Network,
    ttf: TravelTimeField,
    toll: Optional[TollScheme],
    origin: str,
    destination: str,
    departure: float,
    params: ScoringParams,
    *,
    exempt: bool = False,
) -> CarTrip:
    """Least generalized cost simple route between two activity links.

    The generalized cost of a link entered at time ``t`` is its expected travel time
    from `ttf` plus its expected toll converted to seconds. Without a toll a
    label-setting search from the origin link's to-node is exact. With a toll, rates
    change over the day, so a label-correcting search keeps every label at a node that
    no other label dominates: a label dominates another when it arrives no later and has
    paid less by more than the most the remaining trip could save from a falling rate.
    The label-setting route bounds the search. Ties are broken by the lexicographic order
    of link ids. Expected link travel times are assumed FIFO.

    Args:
        net: road network
        ttf: expected link travel times
        toll: active toll scheme, if any
        origin: link of the origin activity
        destination: link of the destination activity
        departure: departure time, in seconds
        params: scoring coefficients used to price tolls
        exempt: whether the driver is toll exempt.

    Raises:
        RoutingError: the destination cannot be reached.
    """
    if origin == destination:
        return CarTrip(links=(), cost=0.0, travel_time=0.0, distance=0.0, expected_toll=0.0)

    scheme = None if exempt else toll
    per_dollar = toll_seconds_per_dollar(params) if scheme is not None else 0.0
    target = net.link(destination)
    start = net.link(origin).to_node

    bounding = _settled_search(net, ttf, scheme, start, target.id, float(departure), per_dollar)
    if bounding is None:
        raise RoutingError(f"No car route from {origin!r} to {destination!r}.")
    if scheme is None or per_dollar == 0.0:
        return bounding

    bound = bounding.cost * (1.0 + 1e-9) + 1e-9
    latest = departure + bound
    n_charged = len(scheme.charged_links)

    heap: List[_Label] = [(0.0, (), start, float(departure), 0.0, 0.0, frozenset({start}))]
    kept: Dict[str, List[Tuple[float, float, FrozenSet[str], float]]] = {}

    while heap:
        cost, path, node, t, paid, distance, visited = heapq.heappop(heap)
        if node is None:
            return CarTrip(
                links=path,
                cost=cost,
                travel_time=t - departure,
                distance=distance,
                expected_toll=paid,
            )

        labels = kept.setdefault(node, [])
        if any(
            other_t <= t and other_paid + slack <= paid and (slack == 0.0 or seen <= visited)
            for other_t, other_paid, seen, slack in labels
        ):
            continue
        labels.append((t, paid, visited, n_charged * rate_drop(scheme, t, latest)))

        for link in net.out_links(node, "car"):
            arrives = link.id == target.id
            if not arrives and link.to_node in visited:
                continue
            charge = link_toll(scheme, link, t)
            step = ttf.travel_time(link.id, t)
            link_cost = cost + step + charge * per_dollar
            if link_cost > bound:
                continue
            heapq.heappush(
                heap,
                (
                    link_cost,
                    path + (link.id,),
                    None if arrives else link.to_node,
                    t + step,
                    paid + charge,
                    distance + link.length,
                    visited | {link.to_node},
                ),
            )

    return bounding  # pragma: no cover


@dataclass(frozen=True)
class ReplanningContext:
    """Read-only inputs shared by all persons during one replanning stage."""

    net: Network
    ttf: TravelTimeField
    params: ScoringParams
    toll: Optional[TollScheme] = None
    transit: Optional[TransitSchedule] = None


@dataclass(frozen=True)
class LegEstimate:
    mode: Mode
    departure: int
    travel_time: float
    distance: float
    toll: float
    route: Route

    def utility(self, params: ScoringParams) -> float:
        leg = Leg(mode=self.mode, route=self.route)
        return leg_utility(leg, self.travel_time, self.distance, self.toll, params)


@dataclass(frozen=True)
class RoutedPlan:
    plan: Plan
    legs: Tuple[LegEstimate, ...]

    def travel_utility(self, params: ScoringParams) -> float:
        """Estimated sum of the leg utilities."""
        return sum(leg.utility(params) for leg in self.legs)


def _estimate_leg(
    context: ReplanningContext,
    person: Person,
    mode: Mode,
    origin: str,
    destination: str,
    departure: int,
    keep: Optional[Route],
) -> LegEstimate:
    net = context.net
    if mode == "car":
        if isinstance(keep, CarRoute):
            trip = evaluate_car_route(
                net, context.ttf, context.toll, keep.links, departure, exempt=person.toll_exempt
            )
        else:
            trip = route_car(
                net,
                context.ttf,
                context.toll,
                origin,
                destination,
                departure,
                context.params,
                exempt=person.toll_exempt,
            )
        return LegEstimate(
            mode, departure, trip.travel_time, trip.distance, trip.expected_toll, trip.to_route()
        )

    if mode == "pt":
        if context.transit is None:
            raise NoServiceError("No transit schedule.")
        itinerary = pt_itinerary(net, context.transit.lines, origin, destination, departure)
        return LegEstimate(
            mode, departure, itinerary.travel_time, itinerary.distance, 0.0, itinerary.to_route()
        )

    distance = net.distance(origin, destination)
    return LegEstimate(
        mode,
        departure,
        teleport_time(mode, distance),
        distance,
        0.0,
        TeleportRoute(distance=distance),
    )


def route_plan(
    plan: Plan,
    person: Person,
    context: ReplanningContext,
    *,
    mode: Optional[Mode] = None,
    only_unrouted: bool = False,
) -> RoutedPlan:
    """Route every leg of a copy of `plan` along its planned timing.

    Legs depart at the end time of the preceding activity, or on arrival if that is
    later. The copy is unscored.

    Args:
        plan: plan to route (not modified)
        person: the plan's owner
        context: network, travel times, toll and schedule
        mode: if set, every leg is switched to this mode
        only_unrouted: keep the routes of already routed legs (mode unchanged).

    Raises:
        RoutingError: a leg cannot be routed with its mode.
    """
    routed = plan.copy(deep=True)
    routed.score = None
    estimates: List[LegEstimate] = []
    charged_days: Set[int] = set()
    toll = context.toll

    t = 0
    for index, (origin, leg, destination) in enumerate(routed.trips()):
        assert origin.end_time is not None  # noqa: S101
        departure = max(origin.end_time, t) if index else origin.end_time
        leg_mode = mode or leg.mode
        keep = leg.route if only_unrouted and leg_mode == leg.mode else None

        estimate = _estimate_leg(
            context, person, leg_mode, origin.link, destination.link, departure, keep
        )
        if estimate.toll > 0.0 and toll is not None and toll.once_per_day:
            day = toll.charge_day(departure)
            if day in charged_days:
                estimate = dataclasses.replace(estimate, toll=0.0)
            charged_days.add(day)

        leg.mode = leg_mode
        leg.route = keep if keep is not None else estimate.route
        leg.departure_time = departure
        estimates.append(estimate)
        t = departure + math.ceil(estimate.travel_time)

    return RoutedPlan(plan=routed, legs=tuple(estimates))


def evaluate_car_route(
    net: Network,
    ttf: TravelTimeField,
    toll: Optional[TollScheme],
    links: Sequence[str],
    departure: float,
    *,
    exempt: bool = False,
) -> CarTrip:
    """Expected attributes of a given car route, without tolls converted to time."""
    scheme = None if exempt else toll
    t = float(departure)
    paid = 0.0
    distance = 0.0
    for link_id in links:
        link = net.link(link_id)
        paid += link_toll(scheme, link, t)
        t += ttf.travel_time(link_id, t)
        distance += link.length
    return CarTrip(
        links=tuple(links),
        cost=t - departure,
        travel_time=t - departure,
        distance=distance,
        expected_toll=paid,
    )
