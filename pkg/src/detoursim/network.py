"""Directed road-network model, synthetic grid builder, and plain-text format.

A network is a set of nodes with planar coordinates plus directed edges.
Two-way streets are represented as two edges so that per-direction speed
statistics stay separate. The only mutable piece of state is the per-edge
``closed`` flag, which the simulation engine toggles between time steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class NetworkFormatError(ValueError):
    """Malformed network text: bad syntax, dangling ids, invalid values."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass
class Node:
    """Junction located at (x, y) in meters."""

    id: int
    x: float
    y: float


@dataclass
class Edge:
    """One directed roadway.

    ``closed`` is runtime state driven by closure events; it is never
    persisted by :func:`save_network`.
    """

    id: int
    from_node: int
    to_node: int
    length: float
    speed_limit: float
    lanes: int = 1
    closed: bool = False


class Network:
    """Node/edge container with an outgoing-edge index per node.

    The structure is immutable after construction except for the per-edge
    ``closed`` flags. Runs that need independent closure state should work
    on a :meth:`copy`.
    """

    def __init__(self, nodes: list[Node], edges: list[Edge]):
        self.nodes = list(nodes)
        self.edges = list(edges)
        self.node_map: dict[int, Node] = {}
        self.edge_map: dict[int, Edge] = {}
        for node in self.nodes:
            if node.id in self.node_map:
                raise ValueError(f"duplicate node id {node.id}")
            self.node_map[node.id] = node
        for edge in self.edges:
            if edge.id in self.edge_map:
                raise ValueError(f"duplicate edge id {edge.id}")
            if edge.from_node not in self.node_map:
                raise ValueError(f"edge {edge.id} references unknown node id {edge.from_node}")
            if edge.to_node not in self.node_map:
                raise ValueError(f"edge {edge.id} references unknown node id {edge.to_node}")
            if edge.from_node == edge.to_node:
                raise ValueError(f"edge {edge.id} is a self-loop at node {edge.from_node}")
            if edge.length <= 0:
                raise ValueError(f"edge {edge.id} has non-positive length {edge.length}")
            if edge.speed_limit <= 0:
                raise ValueError(f"edge {edge.id} has non-positive speed limit {edge.speed_limit}")
            if edge.lanes < 1:
                raise ValueError(f"edge {edge.id} has lane count {edge.lanes} < 1")
            self.edge_map[edge.id] = edge
        self.out_adjacency: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for edge in sorted(self.edges, key=lambda e: e.id):
            self.out_adjacency[edge.from_node].append(edge.id)

    def node(self, node_id: int) -> Node:
        return self.node_map[node_id]

    def edge(self, edge_id: int) -> Edge:
        return self.edge_map[edge_id]

    def copy(self) -> Network:
        """Fresh network with its own edge objects and all edges open."""
        nodes = [Node(n.id, n.x, n.y) for n in self.nodes]
        edges = [Edge(e.id, e.from_node, e.to_node, e.length, e.speed_limit, e.lanes) for e in self.edges]
        return Network(nodes, edges)

    def undirected_links(self) -> list[list[int]]:
        """Edges grouped by unordered endpoint pair, each group sorted by id.

        Groups are ordered by their smallest member edge id, which makes
        link-level tie-breaking deterministic.
        """
        groups: dict[frozenset[int], list[int]] = {}
        for edge in self.edges:
            groups.setdefault(frozenset((edge.from_node, edge.to_node)), []).append(edge.id)
        links = [sorted(ids) for ids in groups.values()]
        links.sort(key=lambda ids: ids[0])
        return links

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __repr__(self) -> str:
        return f"<Network nodes={len(self.nodes)} edges={len(self.edges)}>"


def build_grid(
    rows: int,
    cols: int,
    edge_length: float = 100.0,
    speed_limit: float = 13.89,
    lanes: int = 1,
) -> Network:
    """Regular rows x cols lattice with one edge per direction per link.

    Node ids are row-major (``id = row * cols + col``) at coordinates
    ``(col * edge_length, row * edge_length)``. Edges are numbered in
    row-major node order, east link before south link, with the two
    directions of a link on consecutive ids (2k, 2k+1).
    """
    if rows < 2 or cols < 2:
        raise ValueError(f"grid must be at least 2x2, got {rows}x{cols}")
    if edge_length <= 0:
        raise ValueError(f"edge_length must be positive, got {edge_length}")
    if speed_limit <= 0:
        raise ValueError(f"speed_limit must be positive, got {speed_limit}")
    if lanes < 1:
        raise ValueError(f"lanes must be >= 1, got {lanes}")

    nodes = [
        Node(r * cols + c, c * edge_length, r * edge_length)
        for r in range(rows)
        for c in range(cols)
    ]
    edges: list[Edge] = []

    def add_link(a: int, b: int) -> None:
        for frm, to in ((a, b), (b, a)):
            edges.append(Edge(len(edges), frm, to, edge_length, speed_limit, lanes))

    for r in range(rows):
        for c in range(cols):
            node_id = r * cols + c
            if c + 1 < cols:
                add_link(node_id, node_id + 1)
            if r + 1 < rows:
                add_link(node_id, node_id + cols)
    return Network(nodes, edges)


def central_edges(network: Network, k: int) -> list[int]:
    """Edge ids of the k undirected links nearest the network centroid.

    ``k`` counts links; both directions of each selected link are returned.
    Distance is measured from the link midpoint to the centroid of all node
    coordinates, with ties broken by ascending edge id.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not network.nodes or not network.edges:
        raise ValueError("network has no nodes or no edges")
    links = network.undirected_links()
    if k > len(links):
        raise ValueError(f"k={k} exceeds the {len(links)} undirected links in the network")

    cx = sum(n.x for n in network.nodes) / len(network.nodes)
    cy = sum(n.y for n in network.nodes) / len(network.nodes)

    def link_distance(ids: list[int]) -> float:
        edge = network.edge(ids[0])
        a = network.node(edge.from_node)
        b = network.node(edge.to_node)
        mx, my = (a.x + b.x) / 2.0, (a.y + b.y) / 2.0
        return math.hypot(mx - cx, my - cy)

    links.sort(key=lambda ids: (link_distance(ids), ids[0]))
    selected: list[int] = []
    for ids in links[:k]:
        selected.extend(ids)
    return sorted(selected)


def save_network(network: Network) -> str:
    """Serialize to the line-oriented text format (lossless round trip)."""
    lines = ["# detoursim network"]
    for n in network.nodes:
        lines.append(f"node {n.id} {n.x!r} {n.y!r}")
    for e in network.edges:
        lines.append(f"edge {e.id} {e.from_node} {e.to_node} {e.length!r} {e.speed_limit!r} {e.lanes}")
    return "\n".join(lines) + "\n"


def load_network(text: str) -> Network:
    """Parse the text format.

    Lines are ``node <id> <x> <y>`` or
    ``edge <id> <from> <to> <length> <speed_limit> <lanes>``; ``#`` starts a
    comment. Raises :class:`NetworkFormatError` carrying the offending line
    number on any syntax or reference problem.
    """
    nodes: list[Node] = []
    node_lines: dict[int, int] = {}
    raw_edges: list[tuple[int, list[str]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "node":
            if len(parts) != 4:
                raise NetworkFormatError(f"expected 'node <id> <x> <y>', got {len(parts) - 1} fields", lineno)
            try:
                node = Node(int(parts[1]), float(parts[2]), float(parts[3]))
            except ValueError:
                raise NetworkFormatError(f"bad numeric field in {line!r}", lineno) from None
            if node.id in node_lines:
                raise NetworkFormatError(f"duplicate node id {node.id}", lineno)
            node_lines[node.id] = lineno
            nodes.append(node)
        elif kind == "edge":
            if len(parts) != 7:
                raise NetworkFormatError(
                    f"expected 'edge <id> <from> <to> <length> <speed_limit> <lanes>', got {len(parts) - 1} fields",
                    lineno,
                )
            raw_edges.append((lineno, parts))
        else:
            raise NetworkFormatError(f"unknown record type {kind!r}", lineno)

    node_ids = set(node_lines)
    edges: list[Edge] = []
    edge_ids: set[int] = set()
    for lineno, parts in raw_edges:
        try:
            edge = Edge(int(parts[1]), int(parts[2]), int(parts[3]), float(parts[4]), float(parts[5]), int(parts[6]))
        except ValueError:
            raise NetworkFormatError(f"bad numeric field in {' '.join(parts)!r}", lineno) from None
        if edge.id in edge_ids:
            raise NetworkFormatError(f"duplicate edge id {edge.id}", lineno)
        for endpoint in (edge.from_node, edge.to_node):
            if endpoint not in node_ids:
                raise NetworkFormatError(f"edge {edge.id} references unknown node id {endpoint}", lineno)
        if edge.from_node == edge.to_node:
            raise NetworkFormatError(f"edge {edge.id} is a self-loop at node {edge.from_node}", lineno)
        if edge.length <= 0:
            raise NetworkFormatError(f"edge {edge.id} has non-positive length {edge.length}", lineno)
        if edge.speed_limit <= 0:
            raise NetworkFormatError(f"edge {edge.id} has non-positive speed limit {edge.speed_limit}", lineno)
        if edge.lanes < 1:
            raise NetworkFormatError(f"edge {edge.id} has lane count {edge.lanes} < 1", lineno)
        edge_ids.add(edge.id)
        edges.append(edge)

    return Network(nodes, edges)
