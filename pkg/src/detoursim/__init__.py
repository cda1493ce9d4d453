"""detoursim: microscopic traffic simulation of timed road closures.

A small deterministic simulator for studying how an automated-vehicle share
changes network performance when roads close mid-run: grid networks, Krauss
and IDM car following, shortest-distance rerouting with class-dependent
closure response, and per-run efficiency/emission/safety metrics.
"""

from .demand import DemandConfig, TripSpec, VehicleClass, generate_trips
from .dynamics import IdmParams, KraussParams, LeaderView
from .engine import EngineConfig, Scenario, SimulationIntegrityError, SimulationOutput, run
from .events import ClosureEvent
from .metrics import MetricsConfig, SummaryRow, percent_change, summarize
from .network import Edge, Network, Node, build_grid, central_edges, load_network, save_network
from .routing import ReroutePolicy, Route, shortest_path
from .scenario import ScenarioConfig, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "ClosureEvent",
    "DemandConfig",
    "Edge",
    "EngineConfig",
    "IdmParams",
    "KraussParams",
    "LeaderView",
    "MetricsConfig",
    "Network",
    "Node",
    "ReroutePolicy",
    "Route",
    "Scenario",
    "ScenarioConfig",
    "SimulationIntegrityError",
    "SimulationOutput",
    "SummaryRow",
    "TripSpec",
    "VehicleClass",
    "build_grid",
    "central_edges",
    "generate_trips",
    "load_config",
    "load_network",
    "parse_config",
    "percent_change",
    "run",
    "save_network",
    "shortest_path",
    "summarize",
]
