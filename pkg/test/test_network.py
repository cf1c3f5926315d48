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

import json
from pathlib import Path

import networkx as nx
import pytest

from tollsim.errors import ScenarioFormatError
from tollsim.network import (
    Link,
    Network,
    Node,
    build_cordon,
    load_network,
    save_network,
    validate,
)
from tollsim.test.scenarios import cordon_line, line_network


def test_build_cordon_crossing_links() -> None:
    """Check that entry and exit links are the boundary crossings, sorted by id."""
    net = cordon_line()
    cordon = build_cordon(net, ["c", "w"])

    assert cordon.entry_links == ("j-c",)
    assert cordon.exit_links == ("c-j",)
    assert cordon.is_inside(net.link("c-w"))
    assert not cordon.is_inside(net.link("j-c"))


@pytest.mark.parametrize(
    ("inside", "match"),
    [
        ([], "at least one node"),
        (["c", "nowhere"], "unknown nodes"),
        (["h", "j", "c", "w"], "covers every node"),
    ],
)
def test_build_cordon_invalid(inside: list, match: str) -> None:
    """Check the rejected cordon regions."""
    with pytest.raises(ScenarioFormatError, match=match):
        build_cordon(cordon_line(), inside)


def test_validate_reports_every_violation() -> None:
    """Check that validation collects one diagnostic per violated invariant."""
    net = Network(
        nodes=[Node(id="a", x=0, y=0), Node(id="b", x=1, y=0)],
        links=[
            Link(id="l1", from_node="a", to_node="b", length=-1, capacity=600, free_speed=10),
            Link(id="l2", from_node="a", to_node="a", length=5, capacity=0, free_speed=10),
            Link(id="l3", from_node="a", to_node="x", length=5, capacity=600, free_speed=10),
        ],
    )

    diagnostics = [str(diagnostic) for diagnostic in validate(net)]

    assert "l1.length: must be > 0, got -1.0" in diagnostics
    assert "l2.to: self-loop: from and to are equal" in diagnostics
    assert "l2.capacity: must be > 0, got 0.0" in diagnostics
    assert "l3.to: unknown node 'x'" in diagnostics


def test_validate_duplicates() -> None:
    """Check that duplicate node and link ids are reported."""
    link = Link(id="l", from_node="a", to_node="b", length=5, capacity=600, free_speed=10)
    net = Network(
        nodes=[Node(id="a", x=0, y=0), Node(id="b", x=1, y=0), Node(id="a", x=2, y=0)],
        links=[link, link],
    )

    diagnostics = [str(diagnostic) for diagnostic in validate(net)]

    assert "a.id: duplicate node id (2 times)" in diagnostics
    assert "l.id: duplicate link id (2 times)" in diagnostics


def test_validate_connectivity() -> None:
    """Check that activity locations must be mutually reachable by car."""
    one_way = line_network(["a", "b", "c"])
    (diagnostic,) = validate(one_way, activity_links={"a-b"})
    assert diagnostic.field == "connectivity"

    two_way = line_network(["a", "b", "c"], bidirectional=True)
    assert validate(two_way, activity_links={"a-b", "c-b"}) == []
    assert validate(one_way, activity_links={"a-b", "b-c"}, check_connectivity=False) == []


def test_out_links_sorted_and_filtered() -> None:
    """Check that out-links are sorted by id and filtered by mode."""
    net = Network(
        nodes=[Node(id=n, x=0, y=0) for n in "abc"],
        links=[
            Link(id="z", from_node="a", to_node="b", length=5, capacity=600, free_speed=10),
            Link(
                id="y",
                from_node="a",
                to_node="c",
                length=5,
                capacity=600,
                free_speed=10,
                modes=frozenset({"bike"}),
            ),
        ],
    )

    assert [link.id for link in net.out_links("a", None)] == ["y", "z"]
    assert [link.id for link in net.out_links("a")] == ["z"]
    assert [link.id for link in net.out_links("a", "bike")] == ["y"]


def test_location_and_distance(line_net: Network) -> None:
    """Check that activities sit at the to-node of their link."""
    assert line_net.location("a-b") == (1000.0, 0.0)
    assert line_net.distance("a-b", "c-d") == pytest.approx(2000.0)


def test_to_graph_keys(line_net: Network) -> None:
    """Check that the car graph is keyed by link id."""
    graph = line_net.to_graph()
    assert isinstance(graph, nx.MultiDiGraph)
    assert sorted(graph.edges(keys=True)) == [
        ("a", "b", "a-b"),
        ("b", "c", "b-c"),
        ("c", "d", "c-d"),
    ]


def test_network_file_roundtrip(tmp_path: Path) -> None:
    """Check that a saved network loads back unchanged, with aliased link fields."""
    net = cordon_line()
    path = tmp_path / "network.json"
    save_network(net, path)

    raw = json.loads(path.read_text())
    assert {"from", "to", "freespeed"} <= set(raw["links"][0])
    assert load_network(path) == net


def test_load_network_locus(tmp_path: Path) -> None:
    """Check that a malformed record is reported with its locus."""
    path = tmp_path / "network.json"
    path.write_text(
        json.dumps(
            {
                "nodes": [{"id": "a", "x": 0, "y": 0}, {"id": "b", "x": 1, "y": 0}],
                "links": [
                    {"id": "l", "from": "a", "to": "b", "length": 5, "capacity": 10},
                ],
            }
        )
    )

    with pytest.raises(ScenarioFormatError, match=r"links\[0\]\.freespeed: field required"):
        load_network(path)


def test_load_network_invalid_values(tmp_path: Path) -> None:
    """Check that invariant violations found at load time raise."""
    net = Network(
        nodes=[Node(id="a", x=0, y=0), Node(id="b", x=1, y=0)],
        links=[Link(id="l", from_node="a", to_node="b", length=5, capacity=10, free_speed=0)],
    )
    path = tmp_path / "network.json"
    save_network(net, path)

    with pytest.raises(ScenarioFormatError, match="l.freespeed: must be > 0"):
        load_network(path)


def test_load_network_bad_json(tmp_path: Path) -> None:
    """Check that JSON syntax errors carry the line number."""
    path = tmp_path / "network.json"
    path.write_text('{"nodes": [\n}')

    with pytest.raises(ScenarioFormatError, match="line 2"):
        load_network(path)
