"""
Drone flights, handovers and multi-network diversity
====================================================

Fly straight random routes through a two-operator network, watch the
per-network A3/T310 state machines, and compare single-network against
composite multi-network reliability.
"""

import numpy as np

from skylink import ConnectionParams, Deployment, gen_hex_network, gen_synthetic_city
from skylink.mobility import (
    aggregate_runs,
    flight_stats,
    flights_csv,
    gen_random_route,
    rlf_durations_csv,
    run_flight,
    run_random_flights,
)
from skylink.network import synthesize_column_pattern

city = gen_synthetic_city(extent=2000, resolution=10, building_density=0.25,
                          height_range=18, seed=11)
pattern = synthesize_column_pattern(lower_null_fill_db=20.0,
                                    upper_ripple_period_deg=5.5,
                                    upper_ripple_depth_db=10.0,
                                    null_floor_db=-15.0)
ops = tuple(
    gen_hex_network(500.0, 1, operator_id=f"op{k + 1}", azimuth_offset_deg=k * 60.0,
                    center=(1000.0 + 70 * k, 1000.0 + 40 * k),
                    antenna_height_agl=40.0, downtilt_deg=6.0, pattern=pattern,
                    azimuth_jitter_deg=10.0, downtilt_jitter_deg=3.0,
                    seed=3 + k, raster=city)
    for k in range(2)
)
dep = Deployment(operators=ops, raster=city)
params = ConnectionParams(a3_offset_db=2.0, t310_s=0.2, threshold_db=-6.0, load=1.0)

# One flight in detail: the drone attaches to the strongest sector and
# the event log records every handover and failure along the way.
route = gen_random_route((300, 300, 1700, 1700), height_agl=120.0,
                         speed_mps=15.0, timestep_s=0.1, seed=5)
log = run_flight(dep, city, route, params, ("op1", "op2"))
print(f"route: {route.n_samples} samples over {route.flight_time_s:.1f} s")
for trace in log.traces:
    kinds = {}
    for ev in trace.events:
        kinds[ev.kind] = kinds.get(ev.kind, 0) + 1
    print(f"  {trace.operator_id}: {kinds or 'no events'}")
stats = flight_stats(log)
print(f"  composite: {stats.composite.n_ho} HO, {stats.composite.n_rlf} RLF, "
      f"{stats.composite.rlf_total_s:.1f} s disconnected")

# A small Monte Carlo campaign; per-flight seeds make it reproducible
# and order-independent. The same routes are flown for both operator
# sets, so the diversity gain is a paired comparison.
for op_set in (("op1",), ("op1", "op2")):
    runs = run_random_flights(dep, city, (300, 300, 1700, 1700), 120.0, op_set,
                              n_runs=40, params=params, seed=100)
    agg = aggregate_runs(runs)
    ho = agg[("composite", "ho_per_min")]
    rlf = agg[("composite", "rlf_total_s")]
    print(f"ops={'+'.join(op_set):9s} median HO/min={ho.median:5.2f}  "
          f"median RLF total={rlf.median:5.2f} s")
    if len(op_set) == 1:
        single_runs = runs
    else:
        with open("demo_flights.csv", "w") as fh:
            fh.write(flights_csv(runs))
        with open("demo_rlf_durations.csv", "w") as fh:
            fh.write(rlf_durations_csv(runs))
print("wrote demo_flights.csv, demo_rlf_durations.csv")

# With shared routes, each flight's composite disconnected time can
# never exceed its single-network disconnected time.
worse = sum(
    1
    for single, multi in zip(single_runs, runs)
    if multi.composite.rlf_total_s > single.composite.rlf_total_s + 1e-9
)
print(f"flights where two networks were worse than one: {worse} / {len(runs)}")
