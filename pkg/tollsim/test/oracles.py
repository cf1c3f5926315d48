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

"""Independent reference computations for the simulation components.

The oracles enumerate or recompute directly and share no code with the
implementations they check.
"""

import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx

from tollsim.generators import PigouParams
from tollsim.network import Network

SECONDS_PER_HOUR = 3600.0
DAY = 24 * 3600


def _simple_car_paths(net: Network, origin: str, destination: str) -> List[Tuple[str, ...]]:
    """Every simple link path from the end of `origin` through `destination`."""
    start = net.link(origin).to_node
    target = net.link(destination)
    if start == target.from_node:
        return [(target.id,)]
    return [
        tuple(key for _, _, key in edge_path) + (target.id,)
        for edge_path in nx.all_simple_edge_paths(net.to_graph("car"), start, target.from_node)
    ]


def cheapest_car_cost(
    net: Network,
    origin: str,
    destination: str,
    link_rates: Dict[str, float],
    seconds_per_dollar: float,
) -> Tuple[float, Tuple[str, ...]]:
    """Minimum generalized cost over every simple path, at free-flow times.

    Args:
        net: road network
        origin: link of the origin activity
        destination: link of the destination activity
        link_rates: time-independent charge per tolled link, in dollars
        seconds_per_dollar: time value of one dollar.

    Returns:
        The minimum cost, in seconds, and one path attaining it.

    Raises:
        ValueError: no path exists.
    """
    if origin == destination:
        return 0.0, ()

    def cost(link_id: str) -> float:
        link = net.link(link_id)
        return link.length / link.free_speed + link_rates.get(link_id, 0.0) * seconds_per_dollar

    candidates = _simple_car_paths(net, origin, destination)
    if not candidates:
        raise ValueError(f"No path from {origin!r} to {destination!r}.")

    best = min(candidates, key=lambda path: sum(cost(link_id) for link_id in path))
    return sum(cost(link_id) for link_id in best), best


def walk_car_path(
    path: Sequence[str],
    travel_time: Callable[[str, float], float],
    rate: Callable[[str, float], float],
    seconds_per_dollar: float,
    departure: float,
) -> Tuple[float, float, float]:
    """Drive `path` link by link from `departure`.

    Returns:
        Generalized cost in seconds, travel time in seconds and toll in dollars.
    """
    t, paid = departure, 0.0
    for link_id in path:
        paid += rate(link_id, t)
        t += travel_time(link_id, t)
    return t - departure + paid * seconds_per_dollar, t - departure, paid


def cheapest_timed_car_cost(
    net: Network,
    origin: str,
    destination: str,
    travel_time: Callable[[str, float], float],
    rate: Callable[[str, float], float],
    seconds_per_dollar: float,
    departure: float,
) -> Tuple[float, Tuple[str, ...]]:
    """Minimum generalized cost over every simple path, each driven in time.

    Args:
        net: road network
        origin: link of the origin activity
        destination: link of the destination activity
        travel_time: traversal time of a link entered at a given time
        rate: charge in dollars for entering a link at a given time
        seconds_per_dollar: time value of one dollar
        departure: departure time, in seconds.

    Raises:
        ValueError: no path exists.
    """
    if origin == destination:
        return 0.0, ()

    candidates = _simple_car_paths(net, origin, destination)
    if not candidates:
        raise ValueError(f"No path from {origin!r} to {destination!r}.")

    costs = {
        path: walk_car_path(path, travel_time, rate, seconds_per_dollar, departure)[0]
        for path in candidates
    }
    best = min(candidates, key=lambda path: (costs[path], path))
    return costs[best], best


def pigou_fast_share(params: PigouParams) -> float:
    """Equalizing route split of the Pigou scenario under a point-queue bottleneck.

    Persons reach the fork in departure order, at their departure time (the home
    link is not traversed). Each takes the fast route iff its exit time there,
    free-flow time plus the FIFO queue delay of the bottleneck, is no later than
    over the slow route.

    Returns:
        The fraction of persons on the fast route.
    """
    headway = SECONDS_PER_HOUR / params.fast_capacity
    last_exit: Optional[float] = None
    fast = 0

    for index in range(params.persons):
        departure = params.start + (index * params.departure_window) // params.persons
        exit_fast = departure + params.fast_time
        if last_exit is not None:
            exit_fast = max(exit_fast, last_exit + headway)

        if exit_fast - departure <= params.slow_time:
            fast += 1
            last_exit = exit_fast

    return fast / params.persons


def pigou_fast_share_closed_form(params: PigouParams) -> float:
    """Fluid approximation of :func:`pigou_fast_share` for a uniform departure wave.

    The queue grows until its delay equals the free-flow time difference, then the
    bottleneck serves at capacity for the rest of the wave.
    """
    capacity = params.fast_capacity / SECONDS_PER_HOUR
    if params.departure_window == 0:
        served = 1.0 + (params.slow_time - params.fast_time) * capacity
        return min(1.0, served / params.persons)

    arrival_rate = params.persons / params.departure_window
    if arrival_rate <= capacity:
        return 1.0

    saturation = (params.slow_time - params.fast_time) * capacity / (arrival_rate - capacity)
    saturation = min(saturation, params.departure_window)
    fast = arrival_rate * saturation + capacity * (params.departure_window - saturation)
    return min(1.0, fast / params.persons)


def activity_score(
    duration: float, typical_duration: float, beta_perf: float, zero_hours: float = 10.0
) -> float:
    """``beta_perf * t_typ[h] * ln(duration / t0)``, ``t0 = t_typ * exp(-10 h / t_typ)``."""
    t_typ_hours = typical_duration / SECONDS_PER_HOUR
    t_zero = typical_duration * math.exp(-zero_hours / t_typ_hours)
    return beta_perf * t_typ_hours * math.log(max(duration, 1.0) / t_zero)


def home_work_home_score(
    leave_home: int,
    arrive_work: int,
    leave_work: int,
    arrive_home: int,
    *,
    home_typical: float = 12 * 3600,
    work_typical: float = 8 * 3600,
    beta_perf: float = 6.0,
    beta_trav: float = -6.0,
    mode_constant: float = -1.0,
    beta_money: float = 0.5,
    tolls: Tuple[float, float] = (0.0, 0.0),
) -> float:
    """Score of a two-leg car day with an overnight home activity."""
    home = activity_score(leave_home + DAY - arrive_home, home_typical, beta_perf)
    work = activity_score(leave_work - arrive_work, work_typical, beta_perf)
    legs = 0.0
    for travel_time, toll in zip((arrive_work - leave_home, arrive_home - leave_work), tolls):
        legs += mode_constant + beta_trav * travel_time / SECONDS_PER_HOUR - beta_money * toll
    return home + work + legs
