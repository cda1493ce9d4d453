"""Shared test helpers: tiny networks, scenario shorthands, and the
independent oracles (exhaustive search, hand-rolled platoon integration,
run-length counting) that the implementation is checked against."""

from __future__ import annotations

import math
import random

import pytest

from detoursim.demand import TripSpec, VehicleClass
from detoursim.dynamics import KraussParams, LeaderView, krauss_step
from detoursim.network import Edge, Network, Node


def line_network(n_edges: int, length: float = 100.0, limit: float = 13.89) -> Network:
    """One-way chain: node 0 -> 1 -> ... -> n, edge i runs i -> i+1."""
    nodes = [Node(i, i * length, 0.0) for i in range(n_edges + 1)]
    edges = [Edge(i, i, i + 1, length, limit, 1) for i in range(n_edges)]
    return Network(nodes, edges)


def merge_network(length: float = 100.0, limit: float = 13.89) -> Network:
    """Two approaches A and B merging at C onto a shared exit edge C -> D.

    Edge 0: A->C, edge 1: B->C (the conflicting approaches), edge 2: C->D.
    """
    nodes = [Node(0, 0.0, 100.0), Node(1, 0.0, -100.0), Node(2, 100.0, 0.0), Node(3, 200.0, 0.0)]
    edges = [
        Edge(0, 0, 2, length, limit, 1),
        Edge(1, 1, 2, length, limit, 1),
        Edge(2, 2, 3, length, limit, 1),
    ]
    return Network(nodes, edges)


def trip(vehicle_id: int, depart: float, origin: int, destination: int, cav: bool = False) -> TripSpec:
    vclass = VehicleClass.CAV if cav else VehicleClass.HDV
    return TripSpec(vehicle_id, depart, origin, destination, vclass)


@pytest.fixture
def grid_3x4():
    from detoursim.network import build_grid

    return build_grid(3, 4, 100.0, 13.89, 1)


def brute_force_cost(net: Network, from_edge: int, to_edge: int) -> float:
    """Oracle: exhaustive DFS over edge sequences without edge repeats."""
    best = math.inf

    def walk(edge_id: int, cost: float, used: set[int]) -> None:
        nonlocal best
        if cost >= best:
            return
        if edge_id == to_edge:
            best = cost
            return
        for next_id in net.out_adjacency[net.edge(edge_id).to_node]:
            if next_id in used or net.edge(next_id).closed:
                continue
            used.add(next_id)
            walk(next_id, cost + net.edge(next_id).length, used)
            used.remove(next_id)

    if not net.edge(from_edge).closed and not net.edge(to_edge).closed:
        walk(from_edge, net.edge(from_edge).length, {from_edge})
    return best


def random_strongly_connected(rng: random.Random) -> Network:
    """Random digraph on <= 10 nodes: a Hamiltonian cycle plus extra edges."""
    n = rng.randint(3, 10)
    nodes = [Node(i, rng.uniform(0, 100), rng.uniform(0, 100)) for i in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    edges = []
    for i in range(n):
        edges.append(Edge(len(edges), order[i], order[(i + 1) % n], rng.uniform(10, 100), 13.89, 1))
    for _ in range(rng.randint(0, 2 * n)):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b:
            edges.append(Edge(len(edges), a, b, rng.uniform(10, 100), 13.89, 1))
    return Network(nodes, edges)


def simulate_platoon(n_vehicles: int, steps: int, seed: int, dt: float = 1.0) -> float:
    """Drive a platoon with the Krauss law (sigma=0) and return the worst gap.

    The lead vehicle follows a random speed-limit profile whose drops are
    bounded by the shared deceleration, i.e. a physically drivable leader.
    """
    p = KraussParams(sigma=0.0)
    rng = random.Random(seed)
    positions = [0.0]
    for _ in range(n_vehicles - 1):
        positions.append(positions[-1] - p.length - rng.uniform(0.0, 50.0))
    speeds = [0.0] * n_vehicles
    limit = 13.89
    worst = math.inf
    for _ in range(steps):
        if rng.random() < 0.05:
            limit = rng.uniform(3.0, 15.0)
        lead_target = min(speeds[0] + p.accel * dt, limit, p.v_max)
        new_speeds = [max(speeds[0] - p.decel * dt, lead_target)]
        for i in range(1, n_vehicles):
            gap = positions[i - 1] - p.length - positions[i]
            view = LeaderView(speeds[i - 1], gap)
            new_speeds.append(krauss_step(speeds[i], view, 50.0, dt, 0.0, p))
        speeds = new_speeds
        positions = [x + v * dt for x, v in zip(positions, speeds)]
        worst = min(worst, min(positions[i - 1] - p.length - positions[i] for i in range(1, n_vehicles)))
    return worst


def run_length_oracle(series, threshold) -> int:
    """Brute force: count maximal below-threshold runs in a TTC series."""
    events = 0
    previous = False
    for value in series:
        critical = value is not None and value <= threshold
        if critical and not previous:
            events += 1
        previous = critical
    return events
