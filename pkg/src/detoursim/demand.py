"""Random trip generation with a controlled automated-vehicle share.

Origins, destinations and departure times are drawn from one seeded stream;
the class assignment (which vehicles are automated) comes from a second
stream derived from the same seed. Sweeping the penetration rate therefore
changes only the class column while every trip's O/D and departure time stay
bit-identical, and the automated subsets are nested across penetration
levels (the first round(p*n) ids of one fixed shuffle).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .network import Network

_MASK64 = (1 << 64) - 1
# Fixed odd multiplier decorrelates the class-assignment stream from the
# O/D stream without touching the user-visible seed.
_CLASS_STREAM_SALT = 0x9E3779B97F4A7C15


class VehicleClass(Enum):
    HDV = "HDV"
    CAV = "CAV"


@dataclass(frozen=True)
class TripSpec:
    """One traveler: depart at ``depart_time`` from edge ``origin`` to edge ``destination``."""

    vehicle_id: int
    depart_time: float
    origin: int
    destination: int
    vehicle_class: VehicleClass


@dataclass(frozen=True)
class DemandConfig:
    total_vehicles: int
    horizon: float = 3600.0
    penetration: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.total_vehicles < 0:
            raise ValueError(f"total_vehicles must be >= 0, got {self.total_vehicles}")
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if not 0.0 <= self.penetration <= 1.0:
            raise ValueError(f"penetration must lie in [0, 1], got {self.penetration}")


def cav_count(total_vehicles: int, penetration: float) -> int:
    """Exact automated-vehicle count: round(penetration * total)."""
    return round(penetration * total_vehicles)


def generate_trips(network: Network, config: DemandConfig) -> list[TripSpec]:
    """Deterministic trip list, sorted by (depart_time, vehicle_id).

    Departures are uniform over [0, horizon); origins and destinations are
    uniform over open edges with origin != destination. Exactly
    round(penetration * n) vehicles are automated, chosen by one seeded
    shuffle rather than per-vehicle coin flips.
    """
    open_edges = sorted(e.id for e in network.edges if not e.closed)
    if len(open_edges) < 2:
        raise ValueError(f"need at least 2 open edges to generate trips, got {len(open_edges)}")

    n = config.total_vehicles
    rng = random.Random(config.seed)
    raw: list[tuple[int, float, int, int]] = []
    for vid in range(n):
        depart = rng.uniform(0.0, config.horizon)
        if depart >= config.horizon:  # uniform() can return the upper bound
            depart = 0.0
        origin = open_edges[rng.randrange(len(open_edges))]
        destination = origin
        while destination == origin:
            destination = open_edges[rng.randrange(len(open_edges))]
        raw.append((vid, depart, origin, destination))

    class_rng = random.Random((config.seed * _CLASS_STREAM_SALT + 1) & _MASK64)
    order = list(range(n))
    class_rng.shuffle(order)
    automated = set(order[: cav_count(n, config.penetration)])

    trips = [
        TripSpec(vid, depart, origin, destination, VehicleClass.CAV if vid in automated else VehicleClass.HDV)
        for vid, depart, origin, destination in raw
    ]
    trips.sort(key=lambda t: (t.depart_time, t.vehicle_id))
    return trips


def save_trips(trips: list[TripSpec]) -> str:
    """Line-oriented trip list: ``trip <id> <depart> <origin> <dest> <HDV|CAV>``."""
    lines = ["# detoursim trips"]
    for t in trips:
        lines.append(f"trip {t.vehicle_id} {t.depart_time!r} {t.origin} {t.destination} {t.vehicle_class.value}")
    return "\n".join(lines) + "\n"


def load_trips(text: str) -> list[TripSpec]:
    trips: list[TripSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "trip" or len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 'trip <id> <depart> <origin> <dest> <HDV|CAV>'")
        try:
            vclass = VehicleClass(parts[5])
        except ValueError:
            raise ValueError(f"line {lineno}: unknown vehicle class {parts[5]!r}") from None
        try:
            trips.append(TripSpec(int(parts[1]), float(parts[2]), int(parts[3]), int(parts[4]), vclass))
        except ValueError:
            raise ValueError(f"line {lineno}: bad numeric field in {line!r}") from None
    return trips
