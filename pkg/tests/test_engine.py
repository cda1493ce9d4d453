import math

import pytest

from conftest import line_network, merge_network, trip
from detoursim.demand import DemandConfig, VehicleClass, generate_trips
from detoursim.dynamics import IdmParams, KraussParams
from detoursim.engine import (
    EngineConfig,
    Scenario,
    SimulationIntegrityError,
    counter_noise,
    run,
)
from detoursim.events import ClosureEvent
from detoursim.metrics import summarize
from detoursim.network import Network, build_grid, central_edges


def scenario(net, trips, events=(), krauss=None, idm=None, engine=None, policy=None):
    from detoursim.routing import ReroutePolicy

    return Scenario(
        network=net,
        trips=list(trips),
        events=list(events),
        krauss=krauss or KraussParams(sigma=0.0),
        idm=idm or IdmParams(),
        engine=engine or EngineConfig(end_time=2000.0),
        policy=policy or ReroutePolicy(),
    )


@pytest.fixture(scope="module")
def nrc_run():
    """One medium closure run shared by the whole-run invariant tests."""
    net = build_grid(3, 4)
    closed = tuple(sorted(central_edges(net, 1)))
    trips = generate_trips(net, DemandConfig(300, penetration=0.5, seed=42))
    events = [ClosureEvent(closed, 1200.0, 2400.0)]
    sc = scenario(net, trips, events, krauss=KraussParams(), engine=EngineConfig(end_time=5400.0))
    return net, set(closed), run(sc)


def free_run_steps(length: float, accel: float = 2.6, limit: float = 13.89, dt: float = 1.0):
    """Oracle: hand-integrate free acceleration from rest over one edge.

    Returns (steps to cross, overshoot past the edge end, speed sequence).
    """
    v, pos, steps, speeds = 0.0, 0.0, 0, []
    while pos < length:
        v = min(v + accel * dt, limit)
        pos += v * dt
        steps += 1
        speeds.append(v)
    return steps, pos - length, speeds


class TestSingleVehicle:
    def test_free_trajectory_matches_hand_integration(self):
        net = line_network(2)
        sc = scenario(net, [trip(0, 0.0, 0, 1)])
        out = run(sc)

        steps1, overshoot, speeds = free_run_steps(100.0)
        # frozen from the hand integration: 2.6+5.2+7.8+10.4+13.0 = 39.0,
        # then 13.89 each step; 94.56 after nine steps, crossing on the tenth
        assert speeds[:6] == pytest.approx([2.6, 5.2, 7.8, 10.4, 13.0, 13.89])
        assert steps1 == 10
        assert overshoot == pytest.approx(8.45, abs=1e-9)

        assert len(out.junction_log) == 1
        entry = out.junction_log[0]
        assert entry.time == pytest.approx(10.0)
        assert (entry.from_edge, entry.to_edge) == (0, 1)

        # second edge: entered at the overshoot position at the speed limit
        steps2 = math.ceil((100.0 - overshoot) / 13.89)
        record = out.trips[0]
        assert record.finished
        assert record.insert_time == pytest.approx(0.0)
        assert record.arrival_time == pytest.approx((steps1 + steps2) * 1.0)
        assert record.distance == pytest.approx(200.0)

    def test_travel_time_at_least_free_flow(self):
        net = build_grid(3, 4)
        trips = generate_trips(net, DemandConfig(100, seed=21))
        out = run(scenario(net, trips, engine=EngineConfig(end_time=5400.0)))
        for record in out.trips:
            assert record.finished
            free_flow = record.distance / 13.89
            assert record.arrival_time - record.depart_time >= free_flow - 1e-9


class TestFollowing:
    def test_two_vehicles_keep_non_negative_gaps(self):
        net = line_network(3)
        trips = [trip(0, 0.0, 0, 2), trip(1, 10.0, 0, 2)]
        gaps = []

        def probe(world, t):
            for lanes in world.lanes.values():
                for lane in lanes:
                    for i in range(1, len(lane)):
                        gaps.append(lane[i - 1].pos - lane[i - 1].length - lane[i].pos)

        out = run(scenario(net, trips), on_step=probe)
        assert out.integrity_events == []
        assert all(g >= 0.0 for g in gaps)
        assert all(r.finished for r in out.trips)

    def test_spillback_queue_is_collision_free(self):
        # short edges so a closed exit backs the queue up across a junction
        net = line_network(3, length=40.0)
        trips = [trip(i, float(5 * i), 0, 2) for i in range(8)]
        events = [ClosureEvent((2,), 30.0, 200.0)]
        out = run(scenario(net, trips, events, engine=EngineConfig(end_time=1000.0)))
        assert out.integrity_events == []
        assert all(r.finished for r in out.trips)
        # the queue head was stranded (waiting) while the closure lasted
        waiting_counts = [s.waiting for s in out.conservation if 50 <= s.time < 200]
        assert max(waiting_counts) >= 1


class TestClosures:
    def test_stranded_vehicle_parks_at_edge_end(self):
        net = line_network(2)
        events = [ClosureEvent((1,), 5.0, 60.0)]
        observed = {}

        def probe(world, t):
            if t == 30.0:
                vehicle = world.active[0]
                observed["pos"] = vehicle.pos
                observed["speed"] = vehicle.speed
                observed["waiting"] = vehicle.waiting

        out = run(scenario(net, [trip(0, 0.0, 0, 1, cav=True)], events), on_step=probe)
        assert observed == {"pos": 100.0, "speed": 0.0, "waiting": True}
        record = out.trips[0]
        assert record.finished
        assert record.arrival_time > 60.0
        blocked = [r for r in out.reroute_log if r.kind == "blocked"]
        assert blocked and blocked[0].time == pytest.approx(5.0)
        resumed = [r for r in out.reroute_log if r.kind == "resume"]
        assert resumed and resumed[0].time == pytest.approx(60.0)

    def test_hdv_discovers_closure_at_the_junction(self):
        net = line_network(2)
        events = [ClosureEvent((1,), 5.0, 60.0)]
        out = run(scenario(net, [trip(0, 0.0, 0, 1)], events))
        blocked = [r for r in out.reroute_log if r.kind == "blocked"]
        assert blocked
        # the sign model: the driver learns of the closure only after
        # reaching the junction, strictly later than the closure itself
        assert blocked[0].time > 5.0
        assert out.trips[0].finished

    def test_no_vehicle_enters_a_closed_edge(self, nrc_run):
        _, closed, out = nrc_run
        for entry in out.junction_log:
            if entry.to_edge in closed:
                # the transfer happened during step entry.time - dt
                assert not 1200.0 <= entry.time - 1.0 < 2400.0
        for record in out.trips:
            if record.origin in closed and record.insert_time is not None:
                assert not 1200.0 <= record.insert_time < 2400.0

    def test_cav_reroutes_at_closure_step_hdv_never_earlier(self):
        # a corridor of trips whose unique shortest path crosses the central
        # link, straddling the closure instant from both classes
        net = build_grid(3, 4)
        trips = [trip(i, 170.0 + 3.0 * i, 14, 22, cav=i % 2 == 0) for i in range(12)]
        events = [ClosureEvent((18, 19), 200.0, 2000.0)]
        out = run(scenario(net, trips, events, engine=EngineConfig(end_time=3000.0)))
        reroutes = [r for r in out.reroute_log if r.kind == "reroute"]
        assert any(r.vehicle_class is VehicleClass.CAV for r in reroutes)
        assert any(r.vehicle_class is VehicleClass.HDV for r in reroutes)
        for record in reroutes:
            if record.vehicle_class is VehicleClass.CAV:
                assert record.time == 200.0
            else:
                assert record.time >= 200.0
        assert all(r.finished for r in out.trips)

    def test_departures_on_closed_origin_are_deferred(self):
        net = line_network(2)
        events = [ClosureEvent((0,), 0.0, 50.0)]
        out = run(scenario(net, [trip(0, 10.0, 0, 1)], events), on_step=None)
        record = out.trips[0]
        assert record.insert_time == pytest.approx(50.0)
        assert record.finished
        pending_before = [s.pending for s in out.conservation if s.time < 50.0]
        assert all(p == 1 for p in pending_before)


class TestJunction:
    def test_one_entrant_per_edge_per_step_ordered_by_id(self):
        net = merge_network()
        trips = [trip(0, 0.0, 0, 2, cav=True), trip(1, 0.0, 1, 2, cav=True)]
        out = run(scenario(net, trips))
        entries = [e for e in out.junction_log if e.to_edge == 2]
        assert len(entries) == 2
        # identical dynamics reach the junction together; the tie breaks by id
        assert [e.vehicle_id for e in entries] == [0, 1]
        assert entries[1].time - entries[0].time >= 1.0 - 1e-9

    def test_pet_events_match_pair_scan_oracle(self):
        # pairs departing together from both approaches cross one step
        # apart, which is exactly a threshold encroachment at dt = 1
        net = merge_network()
        trips = []
        for pair in range(4):
            trips.append(trip(2 * pair, 30.0 * pair, 0, 2, cav=True))
            trips.append(trip(2 * pair + 1, 30.0 * pair, 1, 2, cav=True))
        out = run(scenario(net, trips, engine=EngineConfig(end_time=500.0)))
        entries = [e for e in out.junction_log if e.to_edge == 2]
        assert len(entries) == 8

        expected_from_log = 0
        for first, second in zip(entries, entries[1:]):
            pet = second.time - first.time
            if first.from_edge != second.from_edge and 0.0 < pet <= 1.0:
                expected_from_log += 1
        assert out.counters.pet_events == expected_from_log
        assert out.counters.pet_events == 4

    def test_pet_events_occur_under_closure_discharge(self):
        # a short closure queues both approaches; the merge afterwards
        # produces at least one tight conflicting pair
        net = merge_network()
        trips = [trip(i, 3.0 * i, i % 2, 2, cav=True) for i in range(10)]
        events = [ClosureEvent((2,), 10.0, 60.0)]
        out = run(scenario(net, trips, events, engine=EngineConfig(end_time=500.0)))
        entries = [e for e in out.junction_log if e.to_edge == 2]
        oracle = sum(
            1
            for first, second in zip(entries, entries[1:])
            if first.from_edge != second.from_edge and 0.0 < second.time - first.time <= 1.0
        )
        assert out.counters.pet_events == oracle
        assert out.counters.pet_events >= 1
        assert all(r.finished for r in out.trips)


class TestRerouteTiming:
    def build(self):
        net = build_grid(3, 4)
        # unique shortest path 14 -> 18 -> 22 crosses the central link (18)
        trips = [trip(0, 0.0, 14, 22, cav=True), trip(1, 0.0, 14, 22, cav=False)]
        events = [ClosureEvent((18, 19), 5.0, 2000.0)]
        return scenario(net, trips, events, krauss=KraussParams(sigma=0.0), engine=EngineConfig(end_time=3000.0))

    def test_cav_reroutes_at_the_closure_step_hdv_strictly_later(self):
        out = run(self.build())
        reroutes = {r.vehicle_id: r for r in out.reroute_log if r.kind == "reroute"}
        assert set(reroutes) == {0, 1}
        assert reroutes[0].vehicle_class is VehicleClass.CAV
        assert reroutes[0].time == pytest.approx(5.0)
        assert reroutes[1].time > 5.0
        for record in out.trips:
            assert record.finished
            assert record.distance == pytest.approx(500.0)  # the 200 m detour


class TestRunContract:
    def test_zero_trips(self):
        out = run(scenario(line_network(2), []))
        assert out.trips == []
        assert out.fuel_liters == 0.0
        assert out.safety_events == []
        assert out.steps == 0

    def test_empty_network_rejected(self):
        with pytest.raises(ValueError):
            run(scenario(Network([], []), []))

    def test_bad_trips_rejected(self):
        net = line_network(2)
        with pytest.raises(ValueError):
            run(scenario(net, [trip(0, 0.0, 0, 99)]))
        with pytest.raises(ValueError):
            run(scenario(net, [trip(0, 0.0, 1, 1)]))

    def test_unfinished_trips_reported_at_end_time(self):
        net = line_network(3)
        sc = scenario(net, [trip(0, 0.0, 0, 2)], engine=EngineConfig(end_time=5.0))
        out = run(sc)
        record = out.trips[0]
        assert not record.finished
        assert record.arrival_time is None
        assert record.insert_time == pytest.approx(0.0)
        summary = summarize(out)
        assert summary.unfinished == 1 and summary.finished == 0
        assert summary.mean_travel_time is None

    def test_conservation_holds_every_step(self, nrc_run):
        _, _, out = nrc_run
        assert out.conservation  # sampled every step
        for sample in out.conservation:
            assert sample.arrived + sample.en_route + sample.pending + sample.waiting == sample.generated

    def test_distance_identity_against_junction_log(self, nrc_run):
        # a finished trip's distance is exactly the lengths of the edges it
        # entered: its origin plus every junction entry it logged
        net, _, out = nrc_run
        entered = {record.vehicle_id: [record.origin] for record in out.trips}
        for entry in out.junction_log:
            entered[entry.vehicle_id].append(entry.to_edge)
        for record in out.trips:
            if record.finished:
                expected = sum(net.edge(e).length for e in entered[record.vehicle_id])
                assert record.distance == pytest.approx(expected)

    def test_edge_mean_speeds_never_exceed_limits(self, nrc_run):
        net, _, out = nrc_run
        for edge in net.edges:
            mean = out.edge_speeds.mean(edge.id)
            if mean is not None:
                assert mean <= edge.speed_limit + 1e-9

    def test_small_grid_baseline_finishes_virtually_all_trips(self):
        net = build_grid(3, 4)
        trips = generate_trips(net, DemandConfig(600, seed=42))
        out = run(scenario(net, trips, krauss=KraussParams(), engine=EngineConfig(end_time=5400.0)))
        finished = sum(1 for r in out.trips if r.finished)
        assert finished >= 0.99 * 600

    def test_strict_mode_raises_on_forced_fault(self):
        # deliberately inconsistent: two trips forced onto one spot via a
        # zero insertion gap would be needed to break gaps; instead check
        # that strict mode is wired by driving the conservation assertion
        # through a corrupted world, which the public API cannot produce.
        net = line_network(2)
        sc = scenario(net, [trip(0, 0.0, 0, 1)], engine=EngineConfig(end_time=50.0, strict=True))

        def corrupt(world, t):
            if t == 3.0:
                world.arrived -= 1  # break the books

        with pytest.raises(SimulationIntegrityError):
            run(sc, on_step=corrupt)


class TestDeterminism:
    def test_same_seed_same_output(self, tmp_path):
        from detoursim.reports import write_run_outputs

        net = build_grid(3, 4)
        events = [ClosureEvent(tuple(central_edges(net, 1)), 300.0, 900.0)]

        def once(out_dir):
            trips = generate_trips(net, DemandConfig(150, penetration=0.5, seed=8))
            sc = scenario(
                net, trips, events, krauss=KraussParams(), engine=EngineConfig(end_time=5400.0, seed=8)
            )
            output = run(sc)
            return write_run_outputs(out_dir, output, summarize(output))

        first = once(tmp_path / "a")
        second = once(tmp_path / "b")
        for key in first:
            assert first[key].read_bytes() == second[key].read_bytes()

    def test_counter_noise_is_stable_and_uniform(self):
        values = [counter_noise(1, vid, step) for vid in range(50) for step in range(50)]
        assert all(0.0 <= v < 1.0 for v in values)
        assert counter_noise(1, 3, 7) == counter_noise(1, 3, 7)
        assert counter_noise(1, 3, 7) != counter_noise(2, 3, 7)
        assert counter_noise(1, 3, 7) != counter_noise(1, 4, 7)
        assert abs(sum(values) / len(values) - 0.5) < 0.02


class TestMultiLane:
    def test_round_robin_insertion_two_lanes(self):
        net = line_network(2)
        for edge in net.edges:
            edge.lanes = 2
        net = Network(net.nodes, net.edges)  # rebuild with the new lane counts
        trips = [trip(0, 0.0, 0, 1, cav=True), trip(1, 0.0, 0, 1, cav=True)]
        out = run(scenario(net, trips))
        assert out.trips[0].insert_time == out.trips[1].insert_time == 0.0
        assert all(r.finished for r in out.trips)
        assert out.integrity_events == []
