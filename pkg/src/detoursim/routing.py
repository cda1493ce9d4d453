"""Shortest-distance routing and class-dependent rerouting around closures.

Routes are sequences of edge ids; origin and destination are edges, so a
route always begins with the origin edge and ends with the destination edge
and its cost is the summed length of its members.

Rerouting responds to closures differently per vehicle class: automated
vehicles learn of a closure instantly (perfect communication) and replan the
moment any remaining route edge closes, while human drivers only discover
the closure at the last open junction before it, as if reading a detour
sign posted there.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .demand import VehicleClass

if TYPE_CHECKING:
    from .network import Network

# A vehicle counts as standing at its edge-end junction within this slack.
_AT_JUNCTION_SLACK = 1e-9


class NoRouteError(Exception):
    """Destination unreachable under the current closure state."""


@dataclass(frozen=True)
class ReroutePolicy:
    """How each class responds to closures.

    ``hdv_immediate`` switches human drivers to the same instant response
    as automated vehicles (global-announcement behaviour).
    """

    hdv_immediate: bool = False


@dataclass
class Route:
    """Connected edge sequence with total length in meters."""

    edges: list[int]
    cost: float


def shortest_path(network: Network, from_edge: int, to_edge: int) -> Route | None:
    """Minimum-length open-edge route from ``from_edge`` to ``to_edge``.

    Dijkstra over the edge graph with priority keys (cost, edge id), which
    fixes a deterministic winner among equal-cost paths. Returns ``None``
    when the destination is unreachable under current closures; unknown
    edge ids raise ``ValueError``.
    """
    for edge_id in (from_edge, to_edge):
        if edge_id not in network.edge_map:
            raise ValueError(f"unknown edge id {edge_id}")
    if network.edge(from_edge).closed or network.edge(to_edge).closed:
        return None

    dist: dict[int, float] = {from_edge: network.edge(from_edge).length}
    parent: dict[int, int] = {}
    settled: set[int] = set()
    heap: list[tuple[float, int]] = [(dist[from_edge], from_edge)]
    while heap:
        cost, edge_id = heapq.heappop(heap)
        if edge_id in settled:
            continue
        settled.add(edge_id)
        if edge_id == to_edge:
            edges = [edge_id]
            while edges[-1] != from_edge:
                edges.append(parent[edges[-1]])
            edges.reverse()
            return Route(edges, cost)
        for next_id in network.out_adjacency[network.edge(edge_id).to_node]:
            next_edge = network.edge(next_id)
            if next_edge.closed or next_id in settled:
                continue
            next_cost = cost + next_edge.length
            if next_cost < dist.get(next_id, float("inf")):
                dist[next_id] = next_cost
                parent[next_id] = edge_id
                heapq.heappush(heap, (next_cost, next_id))
    return None


def plan_reroute(vehicle, network: Network, policy: ReroutePolicy) -> Route | None:
    """Replacement route for a vehicle whose remaining route hits a closure.

    Returns ``None`` when no change is needed. When a change is due per the
    vehicle's class policy, returns the full replacement route: the already
    traversed prefix plus a fresh shortest path from the current edge to the
    destination. Raises :class:`NoRouteError` when the destination cannot be
    reached; the engine then parks the vehicle until something reopens.

    ``vehicle`` needs ``route`` (edge id list), ``route_index``, ``pos``,
    ``vehicle_class`` and ``destination`` attributes.
    """
    idx = vehicle.route_index
    remaining = vehicle.route[idx + 1 :]
    first_closed = None
    for offset, edge_id in enumerate(remaining):
        if network.edge(edge_id).closed:
            first_closed = idx + 1 + offset
            break
    if first_closed is None:
        return None

    immediate = vehicle.vehicle_class is VehicleClass.CAV or policy.hdv_immediate
    if not immediate:
        # Sign visibility: the driver only learns of the closure standing at
        # the junction right before the first closed edge.
        current_edge = network.edge(vehicle.route[idx])
        at_junction = vehicle.pos >= current_edge.length - _AT_JUNCTION_SLACK
        if first_closed != idx + 1 or not at_junction:
            return None

    suffix = _suffix_from(network, vehicle.route[idx], vehicle.destination)
    if suffix is None:
        raise NoRouteError(
            f"vehicle {vehicle.id}: no open route from edge {vehicle.route[idx]} to {vehicle.destination}"
        )
    edges = vehicle.route[:idx] + suffix
    cost = sum(network.edge(e).length for e in edges)
    return Route(edges, cost)


def _suffix_from(network: Network, current: int, destination: int) -> list[int] | None:
    """Route suffix starting at ``current``, which may itself be closing.

    A vehicle caught on a closing edge still finishes it, so the search must
    not treat its own edge as blocked; only the edges after it must be open.
    """
    if not network.edge(current).closed:
        route = shortest_path(network, current, destination)
        return None if route is None else route.edges
    best: Route | None = None
    for next_id in network.out_adjacency[network.edge(current).to_node]:
        if network.edge(next_id).closed:
            continue
        route = shortest_path(network, next_id, destination)
        if route is not None and (best is None or route.cost < best.cost):
            best = route
    return None if best is None else [current] + best.edges
