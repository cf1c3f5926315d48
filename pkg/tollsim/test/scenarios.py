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

"""Small scripted networks and populations for tests and examples."""

from typing import List, Optional, Sequence

import numpy as np

from tollsim.network import Link, Network, Node, build_cordon
from tollsim.population import Activity, CarRoute, Leg, Person, Plan
from tollsim.tolling import Direction, TollPeriod, TollScheme

CORDON_LINE_NODES = ("h", "j", "c", "w")
"""Nodes of :func:`cordon_line`; ``c`` and ``w`` lie inside the cordon."""

CORDON_LINE_INSIDE = ("c", "w")


def line_network(
    node_ids: Sequence[str],
    *,
    length: float = 1000.0,
    free_speed: float = 10.0,
    capacity: float = 1800.0,
    lanes: float = 1.0,
    bidirectional: bool = False,
) -> Network:
    """Nodes on a straight line, consecutive nodes joined by links ``"<from>-<to>"``.

    Examples:
        >>> net = line_network(["a", "b", "c"], bidirectional=True)
        >>> [link.id for link in net.links]
        ['a-b', 'b-a', 'b-c', 'c-b']
    """
    nodes = [Node(id=node_id, x=index * length, y=0.0) for index, node_id in enumerate(node_ids)]
    pairs = list(zip(node_ids, node_ids[1:]))
    if bidirectional:
        pairs += [(b, a) for a, b in pairs]

    links = [
        Link(
            id=f"{a}-{b}",
            from_node=a,
            to_node=b,
            length=length,
            capacity=capacity,
            free_speed=free_speed,
            lanes=lanes,
        )
        for a, b in pairs
    ]
    return Network(nodes=nodes, links=sorted(links, key=lambda link: link.id))


def person_with_scores(scores: Sequence[Optional[float]], *, person_id: str = "p") -> Person:
    """Person staying home all day, with one memorized plan per score."""
    plans = [
        Plan(elements=[Activity(kind="home", link="a-b")], score=score) for score in scores
    ]
    return Person(id=person_id, plan_memory=plans)


def car_trip(
    person_id: str,
    home: str,
    work: str,
    route: Sequence[str],
    leave: int,
    *,
    back: Optional[Sequence[str]] = None,
    work_end: Optional[int] = None,
    distance: float = 0.0,
) -> Person:
    """Routed car commute, with a return trip if `back` is given."""
    elements: List[object] = [
        Activity(kind="home", link=home, end_time=leave),
        Leg(mode="car", route=CarRoute(links=list(route), distance=distance)),
        Activity(kind="work", link=work, end_time=work_end),
    ]
    if back is not None:
        if work_end is None:
            raise ValueError("A return trip needs a work end time.")
        elements += [
            Leg(mode="car", route=CarRoute(links=list(back), distance=distance)),
            Activity(kind="home", link=home),
        ]
    return Person(id=person_id, plan_memory=[Plan(elements=elements)])


def cordon_line(*, free_speed: float = 10.0) -> Network:
    """Bidirectional line ``h - j - c - w`` with 1 km links."""
    return line_network(CORDON_LINE_NODES, free_speed=free_speed, bidirectional=True)


INBOUND = ("h-j", "j-c", "c-w")
OUTBOUND = ("w-c", "c-j", "j-h")


def crossing_commuter(person_id: str, enter_at: int, exit_at: Optional[int] = None) -> Person:
    """Commuter on :func:`cordon_line` entering the cordon at `enter_at`.

    Home is located at ``h`` and work at ``w``. Entry happens on ``j-c``, one link
    after leaving home; with `exit_at`, the return trip leaves the cordon on ``c-j``
    at that time. Times assume 100 s links (the default free speed).
    """
    link_time = 100
    return car_trip(
        person_id,
        "j-h",
        "c-w",
        INBOUND,
        enter_at - link_time,
        back=OUTBOUND if exit_at is not None else None,
        work_end=exit_at - link_time if exit_at is not None else None,
    )


def cordon_toll(
    net: Network,
    periods: Sequence[TollPeriod],
    *,
    once_per_day: bool = True,
    direction: Direction = "both",
) -> TollScheme:
    """Cordon scheme around ``c`` and ``w`` of :func:`cordon_line`."""
    return TollScheme(
        kind="cordon",
        cordon=build_cordon(net, CORDON_LINE_INSIDE),
        periods=tuple(periods),
        once_per_day=once_per_day,
        direction=direction,
    )


def flat_periods(amount: float) -> List[TollPeriod]:
    """A single all-day period."""
    return [TollPeriod(start=0, end=24 * 3600, amount=amount)]


def random_network(rng: np.random.Generator, n_nodes: int, extra_links: int) -> Network:
    """Strongly connected random network.

    A bidirectional ring guarantees connectivity; `extra_links` random chords are
    added on top. Lengths and speeds vary per link.
    """
    node_ids = [f"v{index}" for index in range(n_nodes)]
    nodes = [
        Node(id=node_id, x=float(rng.uniform(0, 5000)), y=float(rng.uniform(0, 5000)))
        for node_id in node_ids
    ]

    pairs = set()
    for index in range(n_nodes):
        a, b = node_ids[index], node_ids[(index + 1) % n_nodes]
        pairs |= {(a, b), (b, a)}
    for _ in range(extra_links):
        a, b = rng.choice(node_ids, size=2, replace=False)
        pairs.add((str(a), str(b)))

    links = [
        Link(
            id=f"{a}-{b}",
            from_node=a,
            to_node=b,
            length=float(rng.uniform(100.0, 2000.0)),
            capacity=1800.0,
            free_speed=float(rng.choice([8.33, 13.89, 22.22])),
        )
        for a, b in sorted(pairs)
    ]
    return Network(nodes=nodes, links=links)
