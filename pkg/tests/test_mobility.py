"""Trajectories, the connection state machine, composite events and stats."""

import math

import numpy as np
import pytest

from skylink.channel import ChannelModel, NoiseParams, noise_power_dbm
from skylink.mobility import (
    HO,
    RESELECT,
    RLF_END,
    RLF_START,
    ConnectionParams,
    Mode,
    NetState,
    NetTrace,
    Summary,
    aggregate_runs,
    combine_networks,
    flight_stats,
    gen_random_route,
    make_trajectory,
    rlf_intervals,
    run_flight,
    step_connection,
)
from skylink.network import AntennaPattern, Deployment, OperatorNetwork, Sector
from skylink.terrain import DsmRaster, GeoPoint

PARAMS = ConnectionParams(a3_offset_db=2.0, t310_s=0.2, threshold_db=-6.0, load=1.0)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


class TestTrajectory:
    def test_1500m_route_has_1001_samples(self):
        tr = make_trajectory(GeoPoint(0, 0, 40), GeoPoint(1500, 0, 40), 15.0, 0.1)
        assert tr.n_samples == 1001
        assert tr.flight_time_s == pytest.approx(100.0)

    def test_sample_spacing(self):
        tr = make_trajectory(GeoPoint(0, 0, 40), GeoPoint(300, 400, 40), 15.0, 0.1)
        steps = np.linalg.norm(np.diff(tr.samples[:, :2], axis=0), axis=1)
        assert np.allclose(steps[:-1], 1.5, atol=1e-9)
        assert steps[-1] <= 1.5 + 1e-9

    def test_partial_last_step_ends_at_destination(self):
        tr = make_trajectory(GeoPoint(0, 0, 40), GeoPoint(10.4, 0, 40), 15.0, 0.1)
        assert tr.samples[-1][0] == pytest.approx(10.4)
        assert tr.times[-1] == pytest.approx(10.4 / 15.0)
        assert tr.n_samples == 8  # 6 full steps + start + shorter last leg

    def test_constant_altitude_enforced(self):
        with pytest.raises(ValueError):
            make_trajectory(GeoPoint(0, 0, 40), GeoPoint(100, 0, 50), 15.0, 0.1)

    def test_short_route(self):
        tr = make_trajectory(GeoPoint(0, 0, 40), GeoPoint(0.5, 0, 40), 15.0, 0.1)
        assert tr.n_samples == 2


class TestGenRandomRoute:
    def test_deterministic(self):
        a = gen_random_route((0, 0, 1000, 1000), 40.0, 15.0, 0.1, seed=7)
        b = gen_random_route((0, 0, 1000, 1000), 40.0, 15.0, 0.1, seed=7)
        assert np.array_equal(a.samples, b.samples)

    def test_inside_bounds_at_altitude(self):
        tr = gen_random_route((100, 200, 900, 800), 55.0, 15.0, 0.1, seed=3)
        assert np.all(tr.samples[:, 0] >= 100) and np.all(tr.samples[:, 0] <= 900)
        assert np.all(tr.samples[:, 1] >= 200) and np.all(tr.samples[:, 1] <= 800)
        assert np.all(tr.samples[:, 2] == 55.0)

    def test_degenerate_bounds_rejected(self):
        with pytest.raises(ValueError):
            gen_random_route((0, 0, 0, 1000), 40.0, 15.0, 0.1, seed=1)


# ---------------------------------------------------------------------------
# Golden traces through the state machine
# ---------------------------------------------------------------------------


def drive(state, rx_rows, sinr_rows, times, dt=0.1):
    for t, rx, sinr in zip(times, rx_rows, sinr_rows):
        step_connection(state, np.asarray(rx, float), np.asarray(sinr, float), PARAMS, t, dt)
    return state


class TestGoldenTraces:
    def test_handover_at_exactly_one_second(self):
        # neighbor 1 exceeds serving 0 by 3 dB from t=1.0 on
        times = [round(0.1 * i, 10) for i in range(1, 21)]
        rx_rows, sinr_rows = [], []
        for t in times:
            if t < 1.0:
                rx_rows.append([-60.0, -59.0, -70.0])  # +1 dB, below the 2 dB offset
            else:
                rx_rows.append([-60.0, -57.0, -70.0])  # +3 dB
            sinr_rows.append([15.0, 15.0, 15.0])
        state = drive(NetState("op1", serving=0), rx_rows, sinr_rows, times)
        hos = [ev for ev in state.events if ev.kind == HO]
        assert len(hos) == 1
        assert hos[0].t == pytest.approx(1.0)
        assert hos[0].serving_from == 0 and hos[0].serving_to == 1
        assert state.serving == 1
        assert state.mode is Mode.CONNECTED

    def test_t310_expiry_and_reselect(self):
        # SINR at or below the threshold from 1.0 s; the timer expires 200 ms
        # after the dip starts, recovery happens at the next sample
        times = [round(0.1 * i, 10) for i in range(1, 21)]
        rx_rows, sinr_rows = [], []
        for t in times:
            rx_rows.append([-60.0])
            if 1.0 <= t < 1.25:
                sinr_rows.append([-7.0])
            else:
                sinr_rows.append([10.0])
        state = drive(NetState("op1", serving=0), rx_rows, sinr_rows, times)
        kinds = [(ev.kind, round(ev.t, 10)) for ev in state.events]
        assert kinds == [(RLF_START, 1.2), (RESELECT, 1.3), (RLF_END, 1.3)]
        assert state.mode is Mode.CONNECTED and state.serving == 0

    def test_short_dip_never_fails(self):
        # dip shorter than T310: timer resets, no RLF
        times = [round(0.1 * i, 10) for i in range(1, 11)]
        sinr_rows = [[-7.0] if t in (0.4, 0.5) else [10.0] for t in times]
        rx_rows = [[-60.0]] * len(times)
        state = drive(NetState("op1", serving=0), rx_rows, sinr_rows, times)
        assert state.events == []
        assert state.mode is Mode.CONNECTED

    def test_stable_serving_no_events(self):
        rng = np.random.default_rng(15)
        times = [round(0.1 * i, 10) for i in range(1, 101)]
        rx_rows, sinr_rows = [], []
        for _ in times:
            others = rng.uniform(-90, -70, 2)
            serving = max(others) + rng.uniform(2.5, 10.0)  # below A3 from others' view
            rx_rows.append([serving, *others])
            sinr_rows.append([rng.uniform(0, 20)] * 3)
        state = drive(NetState("op1", serving=0), rx_rows, sinr_rows, times)
        assert state.events == []

    def test_no_ho_and_rlf_start_same_step(self):
        rng = np.random.default_rng(16)
        times = [round(0.1 * i, 10) for i in range(1, 501)]
        state = NetState("op1", serving=0)
        for t in times:
            rx = rng.uniform(-100, -60, 3)
            sinr = rng.uniform(-12, 6, 3)
            if state.mode is Mode.CONNECTED and state.serving is None:
                break
            step_connection(state, rx, sinr, PARAMS, t, 0.1)
        by_time = {}
        for ev in state.events:
            by_time.setdefault(round(ev.t, 10), []).append(ev.kind)
        for kinds in by_time.values():
            assert not (HO in kinds and RLF_START in kinds)


# ---------------------------------------------------------------------------
# Flights over a real scenario
# ---------------------------------------------------------------------------


def isotropic_sector(sid, op_id, x, y, z, tx):
    pattern = AntennaPattern(
        gain_max_dbi=0.0, front_back_db=0.0, sla_v_db=0.0, upper_sidelobe_extra_db=0.0
    )
    return Sector(id=sid, position=GeoPoint(x, y, z), azimuth_deg=0.0, downtilt_deg=0.0,
                  tx_power_dbm=tx, pattern=pattern, operator_id=op_id)


def flat_raster(extent, resolution):
    n = int(extent / resolution)
    return DsmRaster(origin_x=0.0, origin_y=0.0, resolution=resolution,
                     ncols=n, nrows=n, elevations=np.zeros((n, n)))


class TestRunFlight:
    def test_always_covered_single_sector_has_no_events(self):
        raster = flat_raster(400.0, 10.0)
        op = OperatorNetwork("op1", 1.8e9, 20e6,
                             (isotropic_sector("s", "op1", 200, 200, 30, tx=43.0),))
        dep = Deployment(operators=(op,), raster=raster)
        tr = make_trajectory(GeoPoint(50, 50, 30), GeoPoint(350, 350, 30), 15.0, 0.1)
        log = run_flight(dep, raster, tr, PARAMS, ("op1",))
        assert log.trace("op1").events == ()

    def test_dead_zone_crossing_matches_geometric_oracle(self):
        # free-space SNR-limited coverage disc around a single low-power sector;
        # the route starts outside it, crosses it, and leaves again
        raster = flat_raster(200.0, 5.0)
        op = OperatorNetwork("op1", 1.0e9, 20e6,
                             (isotropic_sector("s", "op1", 100.0, 100.0, 20.0, tx=-30.0),))
        dep = Deployment(operators=(op,), raster=raster)
        tr = make_trajectory(GeoPoint(20, 100, 10), GeoPoint(180, 100, 10), 15.0, 0.1)
        log = run_flight(
            dep, raster, tr, PARAMS, ("op1",),
            channel_kwargs={"model": ChannelModel.FREE_SPACE},
        )
        events = log.trace("op1").events
        intervals = rlf_intervals(events, tr.flight_time_s)
        assert len(intervals) == 2

        # coverage radius: tx - PL(d) - N > T  =>  d < d_star
        n_dbm = noise_power_dbm(NoiseParams(bandwidth_hz=20e6))
        d_star = 10 ** ((-30.0 - PARAMS.threshold_db - n_dbm - 20 * math.log10(1.0e9) + 147.55) / 20.0)
        half_chord = math.sqrt(d_star**2 - 10.0**2)  # 10 m altitude offset
        t_enter = (100.0 - half_chord - 20.0) / 15.0
        t_leave = (100.0 + half_chord - 20.0) / 15.0
        dt = 0.1

        # starts in RLF at t=0; reselects when the disc is entered
        assert intervals[0][0] == 0.0
        assert intervals[0][1] == pytest.approx(t_enter, abs=dt + 1e-9)
        # T310 delays the second RLF start by exactly the timer
        assert intervals[1][0] == pytest.approx(t_leave + PARAMS.t310_s, abs=dt + 1e-9)
        assert intervals[1][1] == pytest.approx(tr.flight_time_s)

    def test_identical_inputs_identical_logs(self):
        raster = flat_raster(400.0, 10.0)
        op = OperatorNetwork("op1", 1.8e9, 20e6,
                             (isotropic_sector("s", "op1", 200, 200, 30, tx=0.0),))
        dep = Deployment(operators=(op,), raster=raster)
        tr = gen_random_route((50, 50, 350, 350), 30.0, 15.0, 0.1, seed=11)
        a = run_flight(dep, raster, tr, PARAMS, ("op1",))
        b = run_flight(dep, raster, tr, PARAMS, ("op1",))
        assert a.trace("op1").events == b.trace("op1").events
        assert np.array_equal(a.trace("op1").serving, b.trace("op1").serving)


# ---------------------------------------------------------------------------
# Composite multi-network events
# ---------------------------------------------------------------------------


def trace(op_id, events, t_end=20.0):
    return NetTrace(
        operator_id=op_id,
        sector_ids=("x",),
        events=tuple(events),
        serving=np.zeros(1, dtype=np.int32),
        modes=np.zeros(1, dtype=np.int8),
        t_end=t_end,
    )


def ho(t):
    from skylink.mobility import Event

    return Event(t, HO)


def rlf(t0, t1):
    from skylink.mobility import Event

    return [Event(t0, RLF_START), Event(t1, RLF_END)]


class TestCombineNetworks:
    def test_no_composite_when_other_net_connected(self):
        log = combine_networks([trace("n1", [ho(5.0)]), trace("n2", [])])
        assert [ev for ev in log.events if ev.kind == HO] == []

    def test_window_rule(self):
        log = combine_networks([trace("n1", [ho(5.0)]), trace("n2", [ho(5.9)])])
        hos = [ev for ev in log.events if ev.kind == HO]
        assert len(hos) == 1
        assert hos[0].t == pytest.approx(5.9)

    def test_window_rule_excludes_far_apart(self):
        log = combine_networks([trace("n1", [ho(5.0)]), trace("n2", [ho(6.5)])])
        assert [ev for ev in log.events if ev.kind == HO] == []

    def test_rlf_fallback_rule(self):
        log = combine_networks([trace("n1", [ho(5.0)]), trace("n2", rlf(4.0, 6.0))])
        hos = [ev for ev in log.events if ev.kind == HO]
        assert len(hos) == 1
        assert hos[0].t == pytest.approx(5.0)

    def test_single_network_identity(self):
        events = [ho(2.0), *rlf(5.0, 7.5), ho(9.0)]
        log = combine_networks([trace("n1", events)])
        assert sum(1 for ev in log.events if ev.kind == HO) == 2
        assert log.rlf_intervals == ((5.0, 7.5),)

    def test_duplicated_network_is_identity(self):
        events = [ho(2.0), *rlf(5.0, 7.5), ho(9.0)]
        log = combine_networks([trace("n1", events), trace("n2", events)])
        assert sum(1 for ev in log.events if ev.kind == HO) == 2
        assert log.rlf_intervals == ((5.0, 7.5),)

    def test_each_ho_consumed_at_most_once(self):
        # n1 fires twice inside one window of n2's single HO
        log = combine_networks([trace("n1", [ho(5.0), ho(5.4)]), trace("n2", [ho(5.2)])])
        hos = [ev for ev in log.events if ev.kind == HO]
        assert len(hos) == 1

    def test_composite_rlf_is_interval_intersection(self):
        log = combine_networks(
            [trace("n1", rlf(2.0, 8.0)), trace("n2", [*rlf(1.0, 3.0), *rlf(6.0, 9.0)])]
        )
        assert log.rlf_intervals == ((2.0, 3.0), (6.0, 8.0))

    def test_composite_duration_bounded_by_min(self):
        rng = np.random.default_rng(19)
        for _ in range(30):
            traces = []
            totals = []
            for k in range(3):
                events = []
                t = 0.0
                total = 0.0
                while t < 18.0:
                    t0 = t + float(rng.uniform(0.2, 3.0))
                    t1 = t0 + float(rng.uniform(0.2, 2.0))
                    if t1 >= 20.0:
                        break
                    events.extend(rlf(t0, t1))
                    total += t1 - t0
                    t = t1
                traces.append(trace(f"n{k}", events))
                totals.append(total)
            log = combine_networks(traces)
            composite_total = sum(hi - lo for lo, hi in log.rlf_intervals)
            assert composite_total <= min(totals) + 1e-12

    def test_open_rlf_interval_closes_at_flight_end(self):
        from skylink.mobility import Event

        log = combine_networks([trace("n1", [Event(15.0, RLF_START)])])
        assert log.rlf_intervals == ((15.0, 20.0),)

    def test_mismatched_time_base_rejected(self):
        with pytest.raises(ValueError, match="time base"):
            combine_networks([trace("n1", [], t_end=20.0), trace("n2", [], t_end=21.0)])


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def stats_with(n_ho_list, t_end=60.0):
    from skylink.mobility import NetStats, RunStats

    out = []
    for i, n_ho in enumerate(n_ho_list):
        ns = NetStats(n_ho=n_ho, ho_per_min=n_ho * 60.0 / t_end, n_rlf=0,
                      rlf_durations=(), rlf_total_s=0.0)
        out.append(RunStats(run_id=i, height_agl=60.0, operator_ids=("op1",),
                            flight_time_s=t_end, per_network={"op1": ns}, composite=ns))
    return out


class TestAggregateRuns:
    def test_single_run_summary_is_that_run(self):
        agg = aggregate_runs(stats_with([4]))
        s = agg[("composite", "n_ho")]
        assert s == Summary(4.0, 4.0, 4.0, 4.0, 4.0, 4.0)

    def test_median_of_one_to_five(self):
        agg = aggregate_runs(stats_with([1, 2, 3, 4, 5]))
        assert agg[("composite", "n_ho")].median == 3.0

    def test_quartiles_match_sort_oracle(self):
        rng = np.random.default_rng(23)
        values = [int(v) for v in rng.integers(0, 40, 100)]
        agg = aggregate_runs(stats_with(values))
        s = agg[("composite", "n_ho")]

        def q(frac):
            vals = sorted(values)
            h = (len(vals) - 1) * frac
            lo = math.floor(h)
            if lo == len(vals) - 1:
                return float(vals[-1])
            return vals[lo] + (vals[lo + 1] - vals[lo]) * (h - lo)

        assert s.q1 == pytest.approx(q(0.25))
        assert s.median == pytest.approx(q(0.5))
        assert s.q3 == pytest.approx(q(0.75))
        assert s.min == min(values) and s.max == max(values)
        assert s.mean == pytest.approx(sum(values) / len(values))

    def test_ho_per_min_consistency(self):
        st = stats_with([6], t_end=120.0)[0]
        assert st.composite.ho_per_min == pytest.approx(3.0)


class TestFlightStats:
    def test_single_network_composite_equals_network(self):
        raster = flat_raster(400.0, 10.0)
        op = OperatorNetwork("op1", 1.8e9, 20e6,
                             (isotropic_sector("s", "op1", 200, 200, 30, tx=-20.0),))
        dep = Deployment(operators=(op,), raster=raster)
        tr = gen_random_route((50, 50, 350, 350), 30.0, 15.0, 0.1, seed=2)
        st = flight_stats(run_flight(dep, raster, tr, PARAMS, ("op1",)))
        assert st.composite == st.per_network["op1"]
