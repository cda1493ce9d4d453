"""Timed edge closures: the disruption injected to create non-recurrent jams."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .network import Network


@dataclass(frozen=True)
class ClosureEvent:
    """Close ``edge_ids`` over the half-open window [start, end) seconds."""

    edge_ids: tuple[int, ...]
    start: float
    end: float

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"start must be >= 0, got {self.start}")
        if self.end <= self.start:
            raise ValueError(f"need start < end, got [{self.start}, {self.end})")
        if not self.edge_ids:
            raise ValueError("closure event with no edges")

    def active(self, t: float) -> bool:
        return self.start <= t < self.end


def validate_events(events: list[ClosureEvent], network: Network) -> None:
    """Reject events naming edges the network does not have (load-time check)."""
    for event in events:
        for edge_id in event.edge_ids:
            if edge_id not in network.edge_map:
                raise ValueError(f"closure event references unknown edge id {edge_id}")


def apply_events(network: Network, events: list[ClosureEvent], t: float) -> list[tuple[int, bool]]:
    """Set every edge's closed flag for timestamp ``t``; report changes.

    Closure state is a pure function of (events, t): an edge is closed iff
    some event covering ``t`` names it. Returns (edge_id, now_closed) for
    each edge whose flag flipped this step, sorted by edge id. Vehicles
    already on a closing edge are not evicted; the engine lets them finish
    the edge.
    """
    target: set[int] = set()
    for event in events:
        if event.active(t):
            target.update(event.edge_ids)
    transitions: list[tuple[int, bool]] = []
    for edge in network.edges:
        now_closed = edge.id in target
        if edge.closed != now_closed:
            edge.closed = now_closed
            transitions.append((edge.id, now_closed))
    transitions.sort()
    return transitions
