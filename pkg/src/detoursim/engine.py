"""Deterministic discrete-time traffic simulation loop.

Each step of size ``dt`` runs five phases in a fixed order:

1. closure events are applied and rerouting is triggered per class policy;
2. due departures are inserted at the start of their origin edge when it is
   open and the entry lane has room;
3. every vehicle picks its next speed from its class's car-following law
   against the previous step's state (synchronous update, so results do not
   depend on iteration order);
4. positions advance; lane heads that reach the edge end transfer across
   the junction, arrive, or wait at the line; followers are contact-limited
   by their updated leader so gaps never go negative;
5. metric samples (per-edge speed, fuel, conservation counts) are recorded.

Junctions have no internal geometry: a transfer is instantaneous, at most
one vehicle per step may enter any given edge (contenders are served in
order of arrival at the junction, then vehicle id), and a queue on the far
edge is visible to approaching vehicles as a virtual leader, which is what
propagates spillback upstream of a closure.

The Krauss noise stream is counter-based per (seed, vehicle, step), so a
vehicle's draws do not depend on fleet composition or update order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .demand import TripSpec, VehicleClass
from .dynamics import IdmParams, KraussParams, LeaderView, idm_step, krauss_step
from .events import ClosureEvent, apply_events, validate_events
from .metrics import (
    EdgeSpeedAccumulator,
    MetricsConfig,
    SafetyCounters,
    TtcCounter,
    count_pet_events,
    fuel_rate,
    ttc,
)
from .network import Edge, Network
from .routing import NoRouteError, ReroutePolicy, Route, plan_reroute, shortest_path

_M64 = (1 << 64) - 1
_EPS = 1e-12


class SimulationIntegrityError(RuntimeError):
    """A physical invariant broke (negative gap, conservation mismatch)."""


@dataclass(frozen=True)
class EngineConfig:
    dt: float = 1.0
    end_time: float = 5400.0
    seed: int = 0
    insertion_min_gap: float = 7.5
    strict: bool = False

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.end_time <= 0:
            raise ValueError(f"end_time must be positive, got {self.end_time}")
        if self.insertion_min_gap < 0:
            raise ValueError("insertion_min_gap must be >= 0")


@dataclass
class Scenario:
    """Everything one run needs; the engine never mutates the inputs."""

    network: Network
    trips: list[TripSpec]
    events: list[ClosureEvent] = field(default_factory=list)
    krauss: KraussParams = field(default_factory=KraussParams)
    idm: IdmParams = field(default_factory=IdmParams)
    engine: EngineConfig = field(default_factory=EngineConfig)
    policy: ReroutePolicy = field(default_factory=ReroutePolicy)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)


@dataclass
class TripRecord:
    vehicle_id: int
    vehicle_class: VehicleClass
    origin: int
    destination: int
    depart_time: float
    insert_time: float | None
    arrival_time: float | None
    distance: float
    finished: bool


@dataclass(frozen=True)
class JunctionEntry:
    """One vehicle crossing a junction onto ``to_edge`` at ``time``."""

    time: float
    node: int
    to_edge: int
    from_edge: int
    vehicle_id: int
    vehicle_class: VehicleClass


@dataclass(frozen=True)
class SafetyEvent:
    time: float
    kind: str  # "ttc" | "pet"
    vehicle_id: int
    other_id: int
    vehicle_class: VehicleClass
    value: float


@dataclass(frozen=True)
class RerouteRecord:
    time: float
    vehicle_id: int
    vehicle_class: VehicleClass
    kind: str  # "reroute" | "blocked" | "resume"


@dataclass(frozen=True)
class ConservationSample:
    time: float
    generated: int
    arrived: int
    en_route: int
    pending: int
    waiting: int


@dataclass
class SimulationOutput:
    trips: list[TripRecord]
    edge_speeds: EdgeSpeedAccumulator
    safety_events: list[SafetyEvent]
    counters: SafetyCounters
    fuel_liters: float
    co2_kg: float
    junction_log: list[JunctionEntry]
    reroute_log: list[RerouteRecord]
    conservation: list[ConservationSample]
    integrity_events: list[str]
    contact_clamps: int
    steps: int
    end_time: float
    network: Network


class Vehicle:
    """Mutable per-vehicle state while on the network."""

    __slots__ = (
        "id",
        "vehicle_class",
        "length",
        "v_max",
        "route",
        "route_index",
        "lane",
        "pos",
        "speed",
        "prev_speed",
        "next_speed",
        "depart_time",
        "insert_time",
        "destination",
        "origin",
        "distance",
        "waiting",
        "wait_since",
        "moved_step",
    )

    def __init__(self, trip: TripSpec, route: list[int], length: float, v_max: float, insert_time: float):
        self.id = trip.vehicle_id
        self.vehicle_class = trip.vehicle_class
        self.length = length
        self.v_max = v_max
        self.route = route
        self.route_index = 0
        self.lane = 0
        self.pos = 0.0
        self.speed = 0.0
        self.prev_speed = 0.0
        self.next_speed = 0.0
        self.depart_time = trip.depart_time
        self.insert_time = insert_time
        self.origin = trip.origin
        self.destination = trip.destination
        self.distance = 0.0
        self.waiting = False
        self.wait_since: float | None = None
        self.moved_step = -1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def counter_noise(seed: int, vehicle_id: int, step: int) -> float:
    """Uniform [0, 1) draw keyed by (seed, vehicle, step), order-independent."""
    key = _splitmix64((vehicle_id << 20) ^ step)
    return _splitmix64((seed & _M64) ^ key) / 2.0**64


def _check_route(network: Network, edges: list[int], vehicle_id: int) -> None:
    """Route connectivity and openness at computation time."""
    for i in range(len(edges) - 1):
        a = network.edge(edges[i])
        b = network.edge(edges[i + 1])
        if a.to_node != b.from_node:
            raise SimulationIntegrityError(
                f"vehicle {vehicle_id}: route edges {a.id} -> {b.id} are not connected"
            )


class _World:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.net = scenario.network.copy()
        self.cfg = scenario.engine
        self.mcfg = scenario.metrics
        self.trips = sorted(scenario.trips, key=lambda tr: (tr.depart_time, tr.vehicle_id))
        self.lanes: dict[int, list[list[Vehicle]]] = {
            e.id: [[] for _ in range(e.lanes)] for e in sorted(self.net.edges, key=lambda e: e.id)
        }
        # Edges that may hold vehicles; keeps the per-step loops off the
        # empty bulk of large networks. Pruned once per step.
        self.occupied: set[int] = set()
        self.entry_rr: dict[int, int] = {}
        self.release_ptr = 0
        self.ready: dict[int, list[TripSpec]] = {}
        self.blocked_trips: list[TripSpec] = []
        self.active: dict[int, Vehicle] = {}
        self.records: dict[int, TripRecord] = {}
        self.arrived = 0
        self.route_cache: dict[tuple[int, int], Route | None] = {}
        self.edge_speeds = EdgeSpeedAccumulator()
        self.counters = SafetyCounters()
        self.ttc_counter = TtcCounter(self.mcfg, self.counters)
        self.fuel = 0.0
        self.junction_log: list[JunctionEntry] = []
        self.safety_events: list[SafetyEvent] = []
        self.reroute_log: list[RerouteRecord] = []
        self.conservation: list[ConservationSample] = []
        self.integrity_events: list[str] = []
        self.contact_clamps = 0

    # -- phase 1: events and rerouting ------------------------------------

    def _route_for(self, origin: int, destination: int) -> Route | None:
        key = (origin, destination)
        if key not in self.route_cache:
            self.route_cache[key] = shortest_path(self.net, origin, destination)
        return self.route_cache[key]

    def _try_reroute(self, vehicle: Vehicle, t: float) -> None:
        try:
            route = plan_reroute(vehicle, self.net, self.scenario.policy)
        except NoRouteError:
            if not vehicle.waiting:
                vehicle.waiting = True
                self.reroute_log.append(RerouteRecord(t, vehicle.id, vehicle.vehicle_class, "blocked"))
            return
        if route is not None:
            _check_route(self.net, route.edges, vehicle.id)
            vehicle.route = route.edges
            if vehicle.waiting:
                vehicle.waiting = False
            self.reroute_log.append(RerouteRecord(t, vehicle.id, vehicle.vehicle_class, "reroute"))

    def _phase_events(self, t: float) -> list[tuple[int, bool]]:
        transitions = apply_events(self.net, self.scenario.events, t)
        if transitions:
            self.route_cache.clear()
        closed_now = any(closed for _, closed in transitions)
        reopened = any(not closed for _, closed in transitions)

        if closed_now:
            # Automated vehicles replan the moment a closure lands on their
            # remaining route; human drivers replan here only if they are
            # already standing at the decision junction.
            for vid in sorted(self.active):
                vehicle = self.active[vid]
                if not vehicle.waiting:
                    self._try_reroute(vehicle, t)

        # Human drivers discover a closed next edge when they reach the
        # junction in front of it (they were denied transfer last step).
        for vid in sorted(self.active):
            vehicle = self.active[vid]
            if vehicle.waiting or vehicle.vehicle_class is VehicleClass.CAV:
                continue
            idx = vehicle.route_index
            if idx + 1 >= len(vehicle.route):
                continue
            next_edge = self.net.edge(vehicle.route[idx + 1])
            at_end = vehicle.pos >= self.net.edge(vehicle.route[idx]).length - 1e-9
            if next_edge.closed and at_end:
                self._try_reroute(vehicle, t)

        if reopened:
            for vid in sorted(self.active):
                vehicle = self.active[vid]
                if not vehicle.waiting:
                    continue
                remaining = vehicle.route[vehicle.route_index + 1 :]
                if vehicle.vehicle_class is VehicleClass.CAV or self.scenario.policy.hdv_immediate:
                    if any(self.net.edge(e).closed for e in remaining):
                        self._try_reroute(vehicle, t)
                    else:
                        vehicle.waiting = False
                        self.reroute_log.append(RerouteRecord(t, vid, vehicle.vehicle_class, "resume"))
                else:
                    if remaining and not self.net.edge(remaining[0]).closed:
                        vehicle.waiting = False
                        self.reroute_log.append(RerouteRecord(t, vid, vehicle.vehicle_class, "resume"))
                    else:
                        self._try_reroute(vehicle, t)
        return transitions

    # -- phase 2: insertion ------------------------------------------------

    def _insertion_lane(self, edge_id: int) -> int | None:
        lanes = self.lanes[edge_id]
        start = self.entry_rr.get(edge_id, 0)
        for i in range(len(lanes)):
            idx = (start + i) % len(lanes)
            lane = lanes[idx]
            if not lane or lane[-1].pos - lane[-1].length >= self.cfg.insertion_min_gap:
                self.entry_rr[edge_id] = (idx + 1) % len(lanes)
                return idx
        return None

    def _phase_insertion(self, t: float, transitions: list[tuple[int, bool]]) -> None:
        trips = self.trips
        while self.release_ptr < len(trips) and trips[self.release_ptr].depart_time <= t:
            trip = trips[self.release_ptr]
            self.ready.setdefault(trip.origin, []).append(trip)
            self.release_ptr += 1

        if transitions and self.blocked_trips:
            # Closure state changed; blocked trips get another chance in
            # depart order ahead of anything younger.
            for trip in self.blocked_trips:
                self.ready.setdefault(trip.origin, []).append(trip)
            self.blocked_trips = []
            for queue in self.ready.values():
                queue.sort(key=lambda tr: (tr.depart_time, tr.vehicle_id))

        for edge_id in sorted(self.ready):
            queue = self.ready[edge_id]
            if not queue:
                continue
            edge = self.net.edge(edge_id)
            if edge.closed:
                continue  # departures on a closed edge wait for reopening
            consumed = 0
            for trip in queue:
                route = self._route_for(trip.origin, trip.destination)
                if route is None:
                    self.blocked_trips.append(trip)
                    consumed += 1
                    continue
                lane_idx = self._insertion_lane(edge_id)
                if lane_idx is None:
                    break  # FIFO head has no room; retry next step
                params = self.scenario.idm if trip.vehicle_class is VehicleClass.CAV else self.scenario.krauss
                vehicle = Vehicle(trip, list(route.edges), params.length, params.v_max, t)
                vehicle.lane = lane_idx
                _check_route(self.net, vehicle.route, vehicle.id)
                self.lanes[edge_id][lane_idx].append(vehicle)
                self.occupied.add(edge_id)
                self.active[vehicle.id] = vehicle
                consumed += 1
            if consumed:
                del queue[:consumed]

    # -- phase 3: synchronous speed decisions -------------------------------

    def _virtual_leader(self, vehicle: Vehicle) -> Vehicle | None:
        """Most upstream vehicle on the next route edge, if any."""
        idx = vehicle.route_index
        if idx + 1 >= len(vehicle.route):
            return None
        best: Vehicle | None = None
        best_rear = 0.0
        for lane in self.lanes[vehicle.route[idx + 1]]:
            if not lane:
                continue
            tail = lane[-1]
            rear = tail.pos - tail.length
            if best is None or rear < best_rear:
                best = tail
                best_rear = rear
        return best

    def _phase_speeds(self, t: float, step: int) -> None:
        krauss = self.scenario.krauss
        idm = self.scenario.idm
        dt = self.cfg.dt
        seed = self.cfg.seed
        for edge_id in sorted(self.occupied):
            lanes = self.lanes[edge_id]
            edge = self.net.edge(edge_id)
            for lane in lanes:
                for i, vehicle in enumerate(lane):
                    if i > 0:
                        lead = lane[i - 1]
                        raw_gap = lead.pos - lead.length - vehicle.pos
                        lead_id, lead_speed = lead.id, lead.speed
                    else:
                        lead = self._virtual_leader(vehicle)
                        if lead is not None:
                            raw_gap = (edge.length - vehicle.pos) + (lead.pos - lead.length)
                            lead_id, lead_speed = lead.id, lead.speed
                        else:
                            lead_id = None

                    vehicle.prev_speed = vehicle.speed
                    if lead_id is not None:
                        raw_gap = max(0.0, raw_gap)
                        value = ttc(raw_gap, vehicle.speed - lead_speed)
                        if self.ttc_counter.update(vehicle.id, vehicle.vehicle_class, lead_id, value):
                            self.safety_events.append(
                                SafetyEvent(t, "ttc", vehicle.id, lead_id, vehicle.vehicle_class, value)
                            )
                    else:
                        self.ttc_counter.update(vehicle.id, vehicle.vehicle_class, None, None)

                    if vehicle.vehicle_class is VehicleClass.CAV:
                        view = None if lead_id is None else LeaderView(lead_speed, raw_gap)
                        vehicle.next_speed = idm_step(vehicle.speed, view, edge.speed_limit, dt, idm)
                    else:
                        if lead_id is None:
                            view = None
                        else:
                            # Hold the standstill buffer out of the usable gap.
                            view = LeaderView(lead_speed, max(0.0, raw_gap - krauss.min_gap))
                        noise = counter_noise(seed, vehicle.id, step)
                        vehicle.next_speed = krauss_step(
                            vehicle.speed, view, edge.speed_limit, dt, noise, krauss
                        )

    # -- phase 4: movement, junctions, arrivals -----------------------------

    def _park(self, vehicle: Vehicle, edge_length: float, t: float, step: int) -> None:
        vehicle.pos = edge_length
        vehicle.speed = 0.0
        vehicle.moved_step = step
        if vehicle.wait_since is None:
            vehicle.wait_since = t

    def _arrive(self, vehicle: Vehicle, lane: list[Vehicle], edge: Edge, t: float) -> None:
        lane.remove(vehicle)
        vehicle.distance += edge.length
        del self.active[vehicle.id]
        self.arrived += 1
        self.records[vehicle.id] = TripRecord(
            vehicle.id,
            vehicle.vehicle_class,
            vehicle.origin,
            vehicle.destination,
            vehicle.depart_time,
            vehicle.insert_time,
            t + self.cfg.dt,
            vehicle.distance,
            True,
        )

    def _entry_lane(self, edge_id: int) -> tuple[int, float]:
        """Lane with the most entry room on ``edge_id`` and that room in m."""
        best_idx = 0
        best_room = float("-inf")
        for idx, lane in enumerate(self.lanes[edge_id]):
            room = float("inf") if not lane else lane[-1].pos - lane[-1].length
            if room > best_room:
                best_idx, best_room = idx, room
        return best_idx, best_room

    def _phase_movement(self, t: float, step: int) -> None:
        dt = self.cfg.dt
        candidates: dict[int, list[tuple[Vehicle, list[Vehicle], float, float]]] = {}

        # Lane heads reaching the edge end: arrivals leave immediately,
        # transfers contend for admission below.
        for edge_id in sorted(self.occupied):
            lanes = self.lanes[edge_id]
            edge = self.net.edge(edge_id)
            for lane in lanes:
                if not lane:
                    continue
                head = lane[0]
                desired = head.pos + head.next_speed * dt
                if desired < edge.length - _EPS:
                    continue
                if head.waiting:
                    self._park(head, edge.length, t, step)
                elif head.route_index + 1 >= len(head.route):
                    self._arrive(head, lane, edge, t)
                else:
                    candidates.setdefault(head.route[head.route_index + 1], []).append(
                        (head, lane, desired, edge.length)
                    )

        # One entrant per target edge per step, ordered by time spent at the
        # junction, then vehicle id.
        for target_id in sorted(candidates):
            entrants = candidates[target_id]
            entrants.sort(key=lambda item: (item[0].wait_since if item[0].wait_since is not None else t, item[0].id))
            target = self.net.edge(target_id)
            admitted = False
            if not target.closed:
                head, lane, desired, src_length = entrants[0]
                lane_idx, room = self._entry_lane(target_id)
                if room >= 0.0:
                    overshoot = desired - src_length
                    entry_pos = min(overshoot, room, target.length)
                    displacement = (src_length - head.pos) + entry_pos
                    lane.remove(head)
                    head.distance += src_length
                    from_edge = head.route[head.route_index]
                    head.route_index += 1
                    head.lane = lane_idx
                    head.pos = entry_pos
                    head.speed = min(displacement / dt, target.speed_limit, head.v_max)
                    head.wait_since = None
                    head.moved_step = step
                    self.lanes[target_id][lane_idx].append(head)
                    self.occupied.add(target_id)
                    self.junction_log.append(
                        JunctionEntry(t + dt, target.from_node, target_id, from_edge, head.id, head.vehicle_class)
                    )
                    admitted = True
            for head, lane, desired, src_length in entrants[1 if admitted else 0 :]:
                self._park(head, src_length, t, step)

        # Everyone else advances, contact-limited by the updated leader.
        for edge_id in sorted(self.occupied):
            lanes = self.lanes[edge_id]
            edge = self.net.edge(edge_id)
            for lane in lanes:
                bound_rear: float | None = None
                for vehicle in lane:
                    if vehicle.moved_step == step:
                        bound_rear = vehicle.pos - vehicle.length
                        continue
                    desired = vehicle.pos + vehicle.next_speed * dt
                    new_pos = desired
                    clamped_by_leader = False
                    if bound_rear is not None and new_pos > bound_rear:
                        new_pos = bound_rear
                        clamped_by_leader = True
                    if new_pos > edge.length:
                        new_pos = edge.length  # leader just left; cross next step
                    if new_pos < vehicle.pos:
                        new_pos = vehicle.pos
                    if new_pos != desired:
                        if clamped_by_leader:
                            self.contact_clamps += 1
                        vehicle.speed = (new_pos - vehicle.pos) / dt
                    else:
                        vehicle.speed = vehicle.next_speed
                    vehicle.pos = new_pos
                    bound_rear = new_pos - vehicle.length

    def _audit_gaps(self, t: float) -> None:
        for edge_id in sorted(self.occupied):
            lanes = self.lanes[edge_id]
            edge = self.net.edge(edge_id)
            for lane in lanes:
                for i, vehicle in enumerate(lane):
                    if not -1e-9 <= vehicle.pos <= edge.length + 1e-9:
                        self._integrity_fault(
                            f"t={t}: vehicle {vehicle.id} at pos {vehicle.pos} outside edge {edge_id}"
                        )
                    if i > 0:
                        lead = lane[i - 1]
                        gap = lead.pos - lead.length - vehicle.pos
                        if gap < -1e-9:
                            self._integrity_fault(
                                f"t={t}: negative gap {gap:.6f} m behind vehicle {lead.id} on edge {edge_id}"
                            )

    def _integrity_fault(self, message: str) -> None:
        if self.cfg.strict:
            raise SimulationIntegrityError(message)
        self.integrity_events.append(message)

    # -- phase 5: metric samples --------------------------------------------

    def _phase_metrics(self, t: float) -> None:
        dt = self.cfg.dt
        coeffs = self.mcfg.fuel
        for edge_id in sorted(self.occupied):
            for lane in self.lanes[edge_id]:
                for vehicle in lane:
                    self.edge_speeds.add(edge_id, vehicle.speed)
                    accel = (vehicle.speed - vehicle.prev_speed) / dt
                    self.fuel += fuel_rate(vehicle.speed, accel, coeffs) * dt

        pending = (len(self.trips) - self.release_ptr) + len(self.blocked_trips)
        pending += sum(len(queue) for queue in self.ready.values())
        waiting = sum(1 for v in self.active.values() if v.waiting)
        en_route = len(self.active) - waiting
        sample = ConservationSample(t, len(self.trips), self.arrived, en_route, pending, waiting)
        self.conservation.append(sample)
        if self.arrived + en_route + pending + waiting != len(self.trips):
            self._integrity_fault(
                f"t={t}: conservation broken: {self.arrived}+{en_route}+{pending}+{waiting} != {len(self.trips)}"
            )

    # -- driver ---------------------------------------------------------------

    def step(self, t: float, step: int) -> None:
        transitions = self._phase_events(t)
        self._phase_insertion(t, transitions)
        self._phase_speeds(t, step)
        self._phase_movement(t, step)
        self._audit_gaps(t)
        self._phase_metrics(t)
        self.occupied = {eid for eid in self.occupied if any(self.lanes[eid])}

    def all_done(self) -> bool:
        return self.arrived == len(self.trips)

    def finalize(self, steps: int, end_time: float) -> SimulationOutput:
        for trip in self.trips:
            if trip.vehicle_id in self.records:
                continue
            vehicle = self.active.get(trip.vehicle_id)
            self.records[trip.vehicle_id] = TripRecord(
                trip.vehicle_id,
                trip.vehicle_class,
                trip.origin,
                trip.destination,
                trip.depart_time,
                vehicle.insert_time if vehicle is not None else None,
                None,
                vehicle.distance if vehicle is not None else 0.0,
                False,
            )
        pet_events, _ = count_pet_events(self.junction_log, self.mcfg, self.counters)
        for time, vehicle_id, other_id, vclass, value in pet_events:
            self.safety_events.append(SafetyEvent(time, "pet", vehicle_id, other_id, vclass, value))
        self.safety_events.sort(key=lambda e: (e.time, e.kind, e.vehicle_id))
        return SimulationOutput(
            trips=[self.records[t.vehicle_id] for t in sorted(self.trips, key=lambda tr: tr.vehicle_id)],
            edge_speeds=self.edge_speeds,
            safety_events=self.safety_events,
            counters=self.counters,
            fuel_liters=self.fuel,
            co2_kg=self.mcfg.co2_per_liter * self.fuel,
            junction_log=self.junction_log,
            reroute_log=self.reroute_log,
            conservation=self.conservation,
            integrity_events=self.integrity_events,
            contact_clamps=self.contact_clamps,
            steps=steps,
            end_time=end_time,
            network=self.net,
        )


def run(scenario: Scenario, on_step=None) -> SimulationOutput:
    """Run one scenario to ``end_time`` or until every vehicle has arrived.

    The output is a pure function of the scenario (including seeds);
    vehicles still en route at the end are reported as unfinished, never
    dropped. ``on_step``, when given, is called as ``on_step(world, t)``
    after each step for observation only; it must not mutate the world.
    """
    if not scenario.network.edges:
        raise ValueError("cannot simulate an empty network")
    edge_ids = set(scenario.network.edge_map)
    for trip in scenario.trips:
        if trip.origin not in edge_ids or trip.destination not in edge_ids:
            raise ValueError(f"trip {trip.vehicle_id} references unknown edges")
        if trip.origin == trip.destination:
            raise ValueError(f"trip {trip.vehicle_id} has origin == destination")
    validate_events(scenario.events, scenario.network)

    world = _World(scenario)
    dt = scenario.engine.dt
    step = 0
    t = 0.0
    while t < scenario.engine.end_time - _EPS and not world.all_done():
        world.step(t, step)
        if on_step is not None:
            on_step(world, t)
        step += 1
        t = step * dt
    return world.finalize(step, t)
