"""Efficiency, emission and surrogate-safety measurement.

Safety is counted in episodes, not steps: a time-to-collision episode starts
when a follower-leader pair first dips to or below the class threshold and
is counted once, however many steps it lasts. Per-step counting would scale
with the step size and make runs with different dt incomparable.

Fuel burn is a clamped polynomial in speed and acceleration with an idle
floor; CO2 is strictly proportional to fuel, so the two always move by the
same percentage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .demand import VehicleClass

CO2_KG_PER_LITER = 2.326


@dataclass(frozen=True)
class FuelCoeffs:
    """Polynomial fuel-rate coefficients in liters/s (idle, v, v^2, v^3, v*a, v*a^2)."""

    c0: float = 1.6e-4
    c1: float = 1.3e-5
    c2: float = 0.0
    c3: float = 2.5e-7
    c4: float = 6.0e-5
    c5: float = 0.0


@dataclass(frozen=True)
class MetricsConfig:
    """Thresholds and coefficients; defaults match the experiment setup."""

    ttc_threshold_hdv: float = 1.5
    ttc_threshold_cav: float = 0.75
    pet_threshold: float = 1.0
    co2_per_liter: float = CO2_KG_PER_LITER
    fuel: FuelCoeffs = field(default_factory=FuelCoeffs)

    def ttc_threshold(self, vclass: VehicleClass) -> float:
        return self.ttc_threshold_cav if vclass is VehicleClass.CAV else self.ttc_threshold_hdv


def ttc(gap: float, delta_v: float) -> float | None:
    """Time to collision: gap over closing speed, or None when not closing."""
    if delta_v <= 0:
        return None
    return gap / delta_v


@dataclass
class SafetyCounters:
    """Episode counts, total and split by the follower/entrant class."""

    ttc_events: int = 0
    pet_events: int = 0
    ttc_by_class: dict[VehicleClass, int] = field(default_factory=lambda: {c: 0 for c in VehicleClass})
    pet_by_class: dict[VehicleClass, int] = field(default_factory=lambda: {c: 0 for c in VehicleClass})


class TtcCounter:
    """Edge-triggered time-to-collision episode counter.

    An episode begins when a follower's TTC against its current leader is
    present and at or below the follower-class threshold while the previous
    step was not critical for that same pair. Changing leaders starts a
    fresh pair.
    """

    def __init__(self, config: MetricsConfig, counters: SafetyCounters):
        self.config = config
        self.counters = counters
        self._state: dict[int, tuple[int, bool]] = {}

    def update(
        self,
        follower_id: int,
        follower_class: VehicleClass,
        leader_id: int | None,
        ttc_value: float | None,
    ) -> bool:
        """Feed one step's observation; returns True when an episode begins."""
        if leader_id is None:
            self._state.pop(follower_id, None)
            return False
        critical = ttc_value is not None and ttc_value <= self.config.ttc_threshold(follower_class)
        previous = self._state.get(follower_id)
        was_critical = previous is not None and previous[0] == leader_id and previous[1]
        self._state[follower_id] = (leader_id, critical)
        if critical and not was_critical:
            self.counters.ttc_events += 1
            self.counters.ttc_by_class[follower_class] += 1
            return True
        return False


def count_pet_events(
    junction_log,
    config: MetricsConfig,
    counters: SafetyCounters | None = None,
):
    """Post-encroachment events from the engine's junction-entry log.

    For consecutive entrants into the same edge coming from different
    approaches, PET is the second entry time minus the first's crossing
    time (junction transit is instantaneous here). An event is counted when
    0 < PET <= threshold and attributed to the second entrant's class.
    Returns (events, counters) where each event is
    (time, vehicle_id, other_id, vehicle_class, pet).
    """
    if counters is None:
        counters = SafetyCounters()
    last_entry: dict[int, tuple[float, int, int]] = {}
    events = []
    for entry in junction_log:
        previous = last_entry.get(entry.to_edge)
        if previous is not None:
            prev_time, prev_vehicle, prev_from = previous
            pet = entry.time - prev_time
            if prev_from != entry.from_edge and 0.0 < pet <= config.pet_threshold:
                counters.pet_events += 1
                counters.pet_by_class[entry.vehicle_class] += 1
                events.append((entry.time, entry.vehicle_id, prev_vehicle, entry.vehicle_class, pet))
        last_entry[entry.to_edge] = (entry.time, entry.vehicle_id, entry.from_edge)
    return events, counters


def fuel_rate(v: float, a: float, coeffs: FuelCoeffs = FuelCoeffs()) -> float:
    """Instantaneous fuel burn in liters/s, floored at the idle rate c0.

    Braking can drive the polynomial negative; a real engine still idles,
    so the floor is c0 rather than zero.
    """
    rate = (
        coeffs.c0
        + coeffs.c1 * v
        + coeffs.c2 * v * v
        + coeffs.c3 * v * v * v
        + coeffs.c4 * v * a
        + coeffs.c5 * v * a * a
    )
    return max(coeffs.c0, rate)


def co2_from_fuel(fuel: float, kg_per_liter: float = CO2_KG_PER_LITER) -> float:
    """CO2 mass in kg, strictly proportional to fuel volume."""
    if fuel < 0:
        raise ValueError(f"fuel must be >= 0, got {fuel}")
    return kg_per_liter * fuel


class EdgeSpeedAccumulator:
    """Per-edge running mean of sampled vehicle speeds.

    Edges that never saw a sample report ``None`` (no data), never 0.0:
    an unused road is not a jammed road.
    """

    def __init__(self) -> None:
        self._sums: dict[int, float] = {}
        self._counts: dict[int, int] = {}

    def add(self, edge_id: int, speed: float) -> None:
        self._sums[edge_id] = self._sums.get(edge_id, 0.0) + speed
        self._counts[edge_id] = self._counts.get(edge_id, 0) + 1

    def count(self, edge_id: int) -> int:
        return self._counts.get(edge_id, 0)

    def mean(self, edge_id: int) -> float | None:
        count = self._counts.get(edge_id, 0)
        if count == 0:
            return None
        return self._sums[edge_id] / count


@dataclass
class SummaryRow:
    """One run's headline numbers (travel time, fuel, CO2, safety counts)."""

    mean_travel_time: float | None
    fuel: float
    co2: float
    ttc_events: int
    pet_events: int = 0
    finished: int = 0
    unfinished: int = 0


@dataclass
class PercentChangeRow:
    """Percentage change per summary column; ``None`` marks a zero baseline."""

    mean_travel_time: float | None
    fuel: float | None
    co2: float | None
    ttc_events: float | None


def summarize(output) -> SummaryRow:
    """Aggregate a simulation output into one summary row.

    Mean travel time covers finished trips only; unfinished trips are
    reported as a count rather than silently dropped (their inclusion would
    otherwise let a closure 'improve' the mean by stranding vehicles).
    """
    finished = [t for t in output.trips if t.finished]
    mean_tt = None
    if finished:
        mean_tt = sum(t.arrival_time - t.depart_time for t in finished) / len(finished)
    return SummaryRow(
        mean_travel_time=mean_tt,
        fuel=output.fuel_liters,
        co2=output.co2_kg,
        ttc_events=output.counters.ttc_events,
        pet_events=output.counters.pet_events,
        finished=len(finished),
        unfinished=len(output.trips) - len(finished),
    )


def _pct(case_value: float | None, base_value: float | None) -> float | None:
    if case_value is None or base_value is None or base_value == 0:
        return None
    return (case_value - base_value) / base_value * 100.0


def percent_change(case: SummaryRow, baseline: SummaryRow) -> PercentChangeRow:
    """Column-wise percentage change vs a baseline run, full precision.

    Rounding to two decimals is a display concern left to the writers.
    """
    return PercentChangeRow(
        mean_travel_time=_pct(case.mean_travel_time, baseline.mean_travel_time),
        fuel=_pct(case.fuel, baseline.fuel),
        co2=_pct(case.co2, baseline.co2),
        ttc_events=_pct(float(case.ttc_events), float(baseline.ttc_events)),
    )
