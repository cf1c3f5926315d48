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

"""Directed road network, cordon derivation, and network file I/O."""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import (
    AbstractSet,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Literal,
    Optional,
    Tuple,
    Union,
)

import networkx as nx
import pydantic as pdt
from typing_extensions import TypeAlias

from tollsim.errors import ScenarioFormatError

LOG = logging.getLogger(__name__)

StrPath: TypeAlias = Union[str, Path]
Mode: TypeAlias = Literal["car", "pt", "walk", "bike"]

MODES: Tuple[Mode, ...] = ("car", "pt", "walk", "bike")

EFFECTIVE_VEHICLE_LENGTH = 7.5
"""Road length occupied by one queued vehicle, in meters."""


class Node(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Network node in planar coordinates (meters)."""

    id: str
    x: float
    y: float


class Link(
    pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True, allow_population_by_field_name=True
):
    """Directed road link.

    Attribute ranges are checked by :func:`validate`, not at construction, so that an
    invalid network can still be loaded into memory and diagnosed.
    """

    id: str
    from_node: str = pdt.Field(alias="from")
    to_node: str = pdt.Field(alias="to")
    length: float
    """Length in meters."""

    capacity: float
    """Outflow capacity in vehicles per hour."""

    free_speed: float = pdt.Field(alias="freespeed")
    """Free-flow speed in meters per second."""

    lanes: float = 1.0
    modes: FrozenSet[Mode] = frozenset({"car"})

    @property
    def free_flow_time(self) -> float:
        """Traversal time at free speed, in seconds."""
        return self.length / self.free_speed


@dataclass(frozen=True)
class Diagnostic:
    """A violated network invariant."""

    subject: str
    """Identifier of the offending node or link (or ``network``)."""

    field: Optional[str]
    message: str

    def __str__(self) -> str:
        where = f"{self.subject}.{self.field}" if self.field else self.subject
        return f"{where}: {self.message}"


class Network(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Immutable road network with id lookups."""

    nodes: List[Node]
    links: List[Link]

    _nodes_by_id: Dict[str, Node] = pdt.PrivateAttr(default_factory=dict)
    _links_by_id: Dict[str, Link] = pdt.PrivateAttr(default_factory=dict)
    _out_links: Dict[str, List[Link]] = pdt.PrivateAttr(default_factory=dict)

    def __init__(self, **data: object) -> None:
        super().__init__(**data)
        self._nodes_by_id = {node.id: node for node in self.nodes}
        self._links_by_id = {link.id: link for link in self.links}

        out_links: Dict[str, List[Link]] = {node.id: [] for node in self.nodes}
        for link in sorted(self.links, key=lambda link: link.id):
            out_links.setdefault(link.from_node, []).append(link)
        self._out_links = out_links

    def node(self, node_id: str) -> Node:
        return self._nodes_by_id[node_id]

    def link(self, link_id: str) -> Link:
        return self._links_by_id[link_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes_by_id

    def has_link(self, link_id: str) -> bool:
        return link_id in self._links_by_id

    def out_links(self, node_id: str, mode: Optional[Mode] = "car") -> List[Link]:
        """Links leaving `node_id`, sorted by id, optionally restricted to a mode."""
        links = self._out_links.get(node_id, [])
        if mode is None:
            return links
        return [link for link in links if mode in link.modes]

    def location(self, link_id: str) -> Tuple[float, float]:
        """Planar coordinates of an activity located on `link_id` (the link's to-node)."""
        node = self.node(self.link(link_id).to_node)
        return node.x, node.y

    def distance(self, link_a: str, link_b: str) -> float:
        """Crow-fly distance between activities located on two links, in meters."""
        xa, ya = self.location(link_a)
        xb, yb = self.location(link_b)
        return math.hypot(xa - xb, ya - yb)

    def to_graph(self, mode: Mode = "car") -> nx.MultiDiGraph:
        """Directed multigraph of the links open to `mode`, keyed by link id."""
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(node.id for node in self.nodes)
        for link in self.links:
            if mode in link.modes:
                graph.add_edge(link.from_node, link.to_node, key=link.id)
        return graph


class Cordon(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Charging region given by its inside nodes, with the derived crossing links."""

    inside_nodes: FrozenSet[str]
    entry_links: Tuple[str, ...]
    """Links from outside to inside, sorted by id."""

    exit_links: Tuple[str, ...]
    """Links from inside to outside, sorted by id."""

    def is_inside(self, link: Link) -> bool:
        """Whether both endpoints of `link` lie inside the region."""
        return link.from_node in self.inside_nodes and link.to_node in self.inside_nodes


def build_cordon(net: Network, inside: Iterable[str]) -> Cordon:
    """Derive the boundary-crossing links of a node region.

    Args:
        net: road network
        inside: identifiers of the nodes inside the charging region.

    Returns:
        The cordon, with entry and exit links in lexicographic order.

    Raises:
        ScenarioFormatError: the region is empty, covers the whole network, or names
            unknown nodes.
    """
    inside_nodes = frozenset(inside)

    if not inside_nodes:
        raise ScenarioFormatError("Cordon region must contain at least one node.")

    unknown = sorted(node_id for node_id in inside_nodes if not net.has_node(node_id))
    if unknown:
        raise ScenarioFormatError(f"Cordon region references unknown nodes: {unknown}.")

    if len(inside_nodes) == len(net.nodes):
        raise ScenarioFormatError("Cordon region covers every node: no boundary exists.")

    entry_links = sorted(
        link.id
        for link in net.links
        if link.from_node not in inside_nodes and link.to_node in inside_nodes
    )
    exit_links = sorted(
        link.id
        for link in net.links
        if link.from_node in inside_nodes and link.to_node not in inside_nodes
    )

    return Cordon(
        inside_nodes=inside_nodes, entry_links=tuple(entry_links), exit_links=tuple(exit_links)
    )


def validate(
    net: Network,
    *,
    activity_links: Optional[AbstractSet[str]] = None,
    check_connectivity: bool = True,
) -> List[Diagnostic]:
    """Check the network invariants.

    Args:
        net: network to check
        activity_links: links that carry activities; their to-nodes must be mutually
            reachable on the car subgraph
        check_connectivity: whether to run the connectivity check.

    Returns:
        Violated invariants, empty if the network is valid.
    """
    diagnostics: List[Diagnostic] = []

    seen_nodes: Dict[str, int] = {}
    for node in net.nodes:
        seen_nodes[node.id] = seen_nodes.get(node.id, 0) + 1
        if not (math.isfinite(node.x) and math.isfinite(node.y)):
            diagnostics.append(Diagnostic(node.id, "x/y", "coordinates must be finite"))

    for node_id, count in sorted(seen_nodes.items()):
        if count > 1:
            diagnostics.append(Diagnostic(node_id, "id", f"duplicate node id ({count} times)"))

    seen_links: Dict[str, int] = {}
    for link in net.links:
        seen_links[link.id] = seen_links.get(link.id, 0) + 1

        for endpoint, value in (("from", link.from_node), ("to", link.to_node)):
            if value not in seen_nodes:
                diagnostics.append(Diagnostic(link.id, endpoint, f"unknown node {value!r}"))

        if link.from_node == link.to_node:
            diagnostics.append(Diagnostic(link.id, "to", "self-loop: from and to are equal"))

        for field_name, value in (
            ("length", link.length),
            ("capacity", link.capacity),
            ("freespeed", link.free_speed),
        ):
            if not (math.isfinite(value) and value > 0):
                diagnostics.append(Diagnostic(link.id, field_name, f"must be > 0, got {value}"))

        if not link.lanes >= 1:
            diagnostics.append(Diagnostic(link.id, "lanes", f"must be >= 1, got {link.lanes}"))

    for link_id, count in sorted(seen_links.items()):
        if count > 1:
            diagnostics.append(Diagnostic(link_id, "id", f"duplicate link id ({count} times)"))

    if check_connectivity and activity_links and not diagnostics:
        diagnostics.extend(_connectivity_diagnostics(net, activity_links))

    return diagnostics


def _connectivity_diagnostics(net: Network, activity_links: AbstractSet[str]) -> List[Diagnostic]:
    """Require the activity locations to lie in one strongly connected car component."""
    unknown = sorted(link_id for link_id in activity_links if not net.has_link(link_id))
    if unknown:
        return [Diagnostic("network", "activities", f"unknown activity links {unknown}")]

    graph = net.to_graph("car")
    component_of: Dict[str, int] = {}
    for index, component in enumerate(nx.strongly_connected_components(graph)):
        for node_id in component:
            component_of[node_id] = index

    # activities sit at the link's to-node, reached by traversing the link itself
    components = {
        component_of[net.link(link_id).to_node]
        for link_id in activity_links
        if "car" in net.link(link_id).modes
    }
    components |= {
        component_of[net.link(link_id).from_node]
        for link_id in activity_links
        if "car" in net.link(link_id).modes
    }

    if len(components) > 1:
        return [
            Diagnostic(
                "network",
                "connectivity",
                f"activity locations span {len(components)} strongly connected car components",
            )
        ]
    return []


def load_network(path: StrPath) -> Network:
    """Load and validate a network file.

    Raises:
        ScenarioFormatError: the file cannot be parsed or violates a network invariant.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ScenarioFormatError(f"{path}: line {e.lineno}: {e.msg}") from e

    try:
        net = Network.parse_obj(data)
    except pdt.ValidationError as e:
        raise ScenarioFormatError.from_validation_error(e, source=str(path)) from e

    diagnostics = validate(net, check_connectivity=False)
    if diagnostics:
        raise ScenarioFormatError(f"{path}: " + "; ".join(str(d) for d in diagnostics))

    LOG.debug("Loaded network %s: %d nodes, %d links", path, len(net.nodes), len(net.links))
    return net


def network_to_dict(net: Network) -> Dict[str, object]:
    """File representation of a network, with sorted mode sets for stable output."""
    return {
        "nodes": [node.dict() for node in net.nodes],
        "links": [
            {**link.dict(by_alias=True), "modes": sorted(link.modes)} for link in net.links
        ],
    }


def save_network(net: Network, path: StrPath) -> None:
    """Write a network file readable by :func:`load_network`."""
    Path(path).write_text(json.dumps(network_to_dict(net), indent=2) + "\n", encoding="utf-8")
