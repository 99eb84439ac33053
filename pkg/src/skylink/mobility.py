"""Drone flights with per-network handover / radio-link-failure tracking.

Each network evolves an independent connection state machine along the
trajectory: an A3-style handover (neighbor power exceeds serving power
by an offset, zero time-to-trigger, zero interruption) plus a T310
failure timer (started when the serving SINR drops to the outage
threshold, expiry declares RLF, reselection requires a would-be SINR
above the threshold again). Composite multi-network events follow the
set definitions: composite RLF only while every network is in RLF;
composite HO when one network hands over while all others are in RLF,
or when all networks hand over within a short window.

Measurements are evaluated exactly at sample points from the channel
model, so the mobile layer shares the static layer's point oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from .channel import ChannelParams, NoiseParams, noise_power_dbm
from .network import Deployment
from .radio_field import measure_route_powers
from .terrain import DsmRaster, GeoPoint


class Mode(Enum):
    CONNECTED = "CONNECTED"
    T310_RUNNING = "T310_RUNNING"
    RLF = "RLF"


HO = "HO"
RLF_START = "RLF_START"
RLF_END = "RLF_END"
RESELECT = "RESELECT"


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    serving_from: int = -1
    serving_to: int = -1


@dataclass(frozen=True)
class Trajectory:
    """Straight constant-altitude route sampled every ``timestep_s``.

    Consecutive samples are exactly speed*timestep apart; the final leg
    may be shorter so the route ends exactly at ``end``.
    """

    start: GeoPoint
    end: GeoPoint
    speed_mps: float
    timestep_s: float
    samples: np.ndarray  # (n, 3)
    times: np.ndarray  # (n,)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def flight_time_s(self) -> float:
        return float(self.times[-1])


def make_trajectory(start: GeoPoint, end: GeoPoint, speed_mps: float, timestep_s: float) -> Trajectory:
    if speed_mps <= 0 or timestep_s <= 0:
        raise ValueError("speed and timestep must be > 0")
    if start.z != end.z:
        raise ValueError("trajectory altitude must be constant")
    dx = end.x - start.x
    dy = end.y - start.y
    length = math.sqrt(dx * dx + dy * dy)
    step = speed_mps * timestep_s
    if length == 0.0:
        samples = np.array([[start.x, start.y, start.z]])
        times = np.zeros(1)
        return Trajectory(start, end, speed_mps, timestep_s, samples, times)

    n_full = int(math.floor(length / step + 1e-9))
    exact = abs(length - n_full * step) < 1e-9
    n = n_full + 1 if exact else n_full + 2
    samples = np.empty((n, 3), dtype=np.float64)
    times = np.empty(n, dtype=np.float64)
    ux, uy = dx / length, dy / length
    for i in range(n_full + 1):
        d = i * step
        samples[i] = (start.x + ux * d, start.y + uy * d, start.z)
        times[i] = i * timestep_s
    if not exact:
        samples[-1] = (end.x, end.y, end.z)
        times[-1] = length / speed_mps
    return Trajectory(start, end, speed_mps, timestep_s, samples, times)


def gen_random_route(
    bounds: tuple[float, float, float, float],
    height_agl: float,
    speed_mps: float,
    timestep_s: float,
    seed: int,
) -> Trajectory:
    """Uniform random A-to-B route inside ``bounds``, deterministic per seed."""
    x_min, y_min, x_max, y_max = bounds
    if not (x_max > x_min and y_max > y_min):
        raise ValueError(f"degenerate area bounds {bounds}")
    rng = np.random.default_rng(seed)
    ax = float(rng.uniform(x_min, x_max))
    ay = float(rng.uniform(y_min, y_max))
    bx = float(rng.uniform(x_min, x_max))
    by = float(rng.uniform(y_min, y_max))
    a = GeoPoint(ax, ay, height_agl)
    b = GeoPoint(bx, by, height_agl)
    return make_trajectory(a, b, speed_mps, timestep_s)


# -- per-network connection state machine --------------------------------------


@dataclass(frozen=True)
class ConnectionParams:
    a3_offset_db: float = 2.0
    t310_s: float = 0.2
    threshold_db: float = -6.0
    load: float = 1.0

    def __post_init__(self):
        if self.t310_s <= 0:
            raise ValueError("t310_s must be > 0")
        if not 0.0 <= self.load <= 1.0:
            raise ValueError("load must be in [0, 1]")


@dataclass
class NetState:
    operator_id: str
    serving: int | None = None
    mode: Mode = Mode.CONNECTED
    t310_elapsed: float = 0.0
    events: list[Event] = dc_field(default_factory=list)


def _argmax(values: np.ndarray) -> int:
    best = 0
    for i in range(1, values.shape[0]):
        if values[i] > values[best]:
            best = i
    return best


def step_connection(
    state: NetState,
    rx_dbm: np.ndarray,
    sinr_db: np.ndarray,
    params: ConnectionParams,
    t: float,
    dt: float,
) -> NetState:
    """Advance one timestep given this sample's measurements.

    ``rx_dbm`` holds per-sector received power, ``sinr_db`` the SINR each
    sector would have if it were serving. Mutates and returns ``state``.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    thr = params.threshold_db

    if state.mode is Mode.CONNECTED:
        serving = state.serving
        best = _argmax(rx_dbm)
        if best != serving and rx_dbm[best] > rx_dbm[serving] + params.a3_offset_db:
            state.events.append(Event(t, HO, serving_from=serving, serving_to=best))
            state.serving = best
            serving = best
        if sinr_db[serving] <= thr:
            state.mode = Mode.T310_RUNNING
            state.t310_elapsed = 0.0
    elif state.mode is Mode.T310_RUNNING:
        serving = state.serving
        if sinr_db[serving] > thr:
            state.mode = Mode.CONNECTED
            state.t310_elapsed = 0.0
        else:
            state.t310_elapsed += dt
            if state.t310_elapsed >= params.t310_s - 1e-12:
                state.events.append(Event(t, RLF_START, serving_from=serving))
                state.serving = None
                state.mode = Mode.RLF
                state.t310_elapsed = 0.0
    else:  # RLF
        best = _argmax(rx_dbm)
        if sinr_db[best] > thr:
            state.events.append(Event(t, RESELECT, serving_to=best))
            state.events.append(Event(t, RLF_END, serving_to=best))
            state.serving = best
            state.mode = Mode.CONNECTED
    return state


# -- flights -------------------------------------------------------------------


@dataclass(frozen=True)
class NetTrace:
    """One network's evolution over a flight."""

    operator_id: str
    sector_ids: tuple[str, ...]
    events: tuple[Event, ...]
    serving: np.ndarray  # (n,) int32, -1 while in RLF
    modes: np.ndarray  # (n,) int8: 0 CONNECTED, 1 T310_RUNNING, 2 RLF
    t_end: float


@dataclass(frozen=True)
class FlightLog:
    trajectory: Trajectory
    traces: tuple[NetTrace, ...]  # one per operator_set entry, in order

    @property
    def t_end(self) -> float:
        return self.trajectory.flight_time_s

    def trace(self, operator_id: str) -> NetTrace:
        for tr in self.traces:
            if tr.operator_id == operator_id:
                return tr
        raise KeyError(f"no trace for operator {operator_id!r}")


_MODE_CODE = {Mode.CONNECTED: 0, Mode.T310_RUNNING: 1, Mode.RLF: 2}


def _sinr_matrix(rx_dbm: np.ndarray, load: float, noise_dbm: float) -> np.ndarray:
    """Would-be SINR of each sector at each sample, from the power matrix."""
    lin = np.power(10.0, rx_dbm / 10.0)
    total = lin.sum(axis=1, keepdims=True)
    interference = np.maximum(total - lin, 0.0)
    noise_lin = 10.0 ** (noise_dbm / 10.0)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(lin / (load * interference + noise_lin))


def run_flight(
    deployment: Deployment,
    raster: DsmRaster | None,
    trajectory: Trajectory,
    params: ConnectionParams,
    operator_set,
    channel: ChannelParams | None = None,
    channel_kwargs: dict | None = None,
    noise: NoiseParams | None = None,
    noise_kwargs: dict | None = None,
) -> FlightLog:
    """Fly the trajectory with one independent state machine per network.

    The initial serving cell is the strongest sector at sample 0; if its
    SINR is already at or below the threshold the network starts in RLF.
    """
    raster = raster if raster is not None else deployment.raster
    operator_set = tuple(operator_set)
    if not operator_set:
        raise ValueError("operator_set must be non-empty")
    times = trajectory.times
    traces: list[NetTrace] = []
    for op_id in operator_set:
        op = deployment.operator(op_id)
        rx = measure_route_powers(op, raster, trajectory.samples, channel, channel_kwargs)
        noise_dbm = noise_power_dbm(
            noise if noise is not None else NoiseParams(bandwidth_hz=op.bandwidth_hz, **(noise_kwargs or {}))
        )
        sinr = _sinr_matrix(rx, params.load, noise_dbm)

        n = trajectory.n_samples
        serving_log = np.empty(n, dtype=np.int32)
        mode_log = np.empty(n, dtype=np.int8)
        state = NetState(operator_id=op_id)
        first = _argmax(rx[0])
        if sinr[0, first] <= params.threshold_db:
            state.events.append(Event(float(times[0]), RLF_START, serving_from=-1))
            state.serving = None
            state.mode = Mode.RLF
        else:
            state.serving = first
        serving_log[0] = -1 if state.serving is None else state.serving
        mode_log[0] = _MODE_CODE[state.mode]

        for i in range(1, n):
            dt = float(times[i] - times[i - 1])
            step_connection(state, rx[i], sinr[i], params, float(times[i]), dt)
            serving_log[i] = -1 if state.serving is None else state.serving
            mode_log[i] = _MODE_CODE[state.mode]

        traces.append(
            NetTrace(
                operator_id=op_id,
                sector_ids=tuple(sec.id for sec in op.sectors),
                events=tuple(state.events),
                serving=serving_log,
                modes=mode_log,
                t_end=trajectory.flight_time_s,
            )
        )
    return FlightLog(trajectory=trajectory, traces=tuple(traces))


# -- composite multi-network events ---------------------------------------------


def rlf_intervals(events, t_end: float) -> list[tuple[float, float]]:
    """[start, end) RLF intervals from an event stream; open ones close at t_end."""
    intervals = []
    start = None
    for ev in events:
        if ev.kind == RLF_START:
            start = ev.t
        elif ev.kind == RLF_END and start is not None:
            intervals.append((start, ev.t))
            start = None
    if start is not None:
        intervals.append((start, t_end))
    return intervals


def _intersect(a: list[tuple[float, float]], b: list[tuple[float, float]]):
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def _in_rlf(intervals, t: float) -> bool:
    for lo, hi in intervals:
        if lo <= t < hi:
            return True
    return False


@dataclass(frozen=True)
class CompositeLog:
    events: tuple[Event, ...]
    rlf_intervals: tuple[tuple[float, float], ...]
    t_end: float


def combine_networks(traces, window_s: float = 1.0) -> CompositeLog:
    """Composite HO/RLF event log across the given per-network traces.

    Composite RLF is the intersection of per-network RLF intervals. A
    composite HO is (a) a handover in one network while every other is
    in RLF at that instant, or (b) one event per greedy left-to-right
    window of length <= ``window_s`` containing a handover from every
    network; each per-network handover is consumed at most once.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one network log")
    t_end = traces[0].t_end
    for tr in traces:
        if abs(tr.t_end - t_end) > 1e-9:
            raise ValueError(
                f"mismatched time bases: {tr.operator_id} ends at {tr.t_end}, expected {t_end}"
            )

    per_net_rlf = [rlf_intervals(tr.events, tr.t_end) for tr in traces]
    composite_rlf = per_net_rlf[0]
    for iv in per_net_rlf[1:]:
        composite_rlf = _intersect(composite_rlf, iv)

    ho_times = [[ev.t for ev in tr.events if ev.kind == HO] for tr in traces]
    consumed = [np.zeros(len(ts), dtype=bool) for ts in ho_times]
    composite_events: list[Event] = []

    # rule (a): HO while all other networks are in RLF
    for j, ts in enumerate(ho_times):
        for k, t in enumerate(ts):
            others = [per_net_rlf[m] for m in range(len(traces)) if m != j]
            if all(_in_rlf(iv, t) for iv in others):
                composite_events.append(Event(t, HO))
                consumed[j][k] = True

    # rule (b): greedy scan for windows holding one unconsumed HO per network
    heads = [0] * len(traces)

    def _advance(j):
        while heads[j] < len(ho_times[j]) and consumed[j][heads[j]]:
            heads[j] += 1

    while True:
        for j in range(len(traces)):
            _advance(j)
        if any(heads[j] >= len(ho_times[j]) for j in range(len(traces))):
            break
        anchor = min(range(len(traces)), key=lambda j: ho_times[j][heads[j]])
        t0 = ho_times[anchor][heads[anchor]]
        chosen = []
        for j in range(len(traces)):
            tj = ho_times[j][heads[j]]
            if tj <= t0 + window_s:
                chosen.append((j, heads[j], tj))
            else:
                chosen = None
                break
        if chosen is None:
            consumed[anchor][heads[anchor]] = True  # cannot head any window
            continue
        for j, k, _ in chosen:
            consumed[j][k] = True
        composite_events.append(Event(max(t for _, _, t in chosen), HO))

    for lo, hi in composite_rlf:
        composite_events.append(Event(lo, RLF_START))
        composite_events.append(Event(hi, RLF_END))
    composite_events.sort(key=lambda ev: (ev.t, ev.kind))
    return CompositeLog(
        events=tuple(composite_events),
        rlf_intervals=tuple(composite_rlf),
        t_end=t_end,
    )


# -- per-run statistics ----------------------------------------------------------


@dataclass(frozen=True)
class NetStats:
    n_ho: int
    ho_per_min: float
    n_rlf: int
    rlf_durations: tuple[float, ...]
    rlf_total_s: float


@dataclass(frozen=True)
class RunStats:
    run_id: int
    height_agl: float
    operator_ids: tuple[str, ...]
    flight_time_s: float
    per_network: dict[str, NetStats]
    composite: NetStats

    @property
    def op_set_label(self) -> str:
        return "+".join(self.operator_ids)


def _stats_from(events, t_end: float) -> NetStats:
    n_ho = sum(1 for ev in events if ev.kind == HO)
    intervals = rlf_intervals(events, t_end)
    durations = tuple(hi - lo for lo, hi in intervals)
    ho_per_min = n_ho * 60.0 / t_end if t_end > 0 else 0.0
    return NetStats(
        n_ho=n_ho,
        ho_per_min=ho_per_min,
        n_rlf=len(intervals),
        rlf_durations=durations,
        rlf_total_s=sum(durations),
    )


def flight_stats(log: FlightLog, run_id: int = 0, window_s: float = 1.0) -> RunStats:
    """Per-network and composite statistics for one flight."""
    t_end = log.t_end
    per_network = {tr.operator_id: _stats_from(tr.events, t_end) for tr in log.traces}
    composite_log = combine_networks(log.traces, window_s=window_s)
    composite = _stats_from(composite_log.events, t_end)
    return RunStats(
        run_id=run_id,
        height_agl=float(log.trajectory.start.z),
        operator_ids=tuple(tr.operator_id for tr in log.traces),
        flight_time_s=t_end,
        per_network=per_network,
        composite=composite,
    )


def run_random_flights(
    deployment: Deployment,
    raster: DsmRaster | None,
    bounds: tuple[float, float, float, float],
    height_agl: float,
    operator_set,
    n_runs: int,
    params: ConnectionParams,
    speed_mps: float = 15.0,
    timestep_s: float = 0.1,
    seed: int = 0,
    window_s: float = 1.0,
    channel_kwargs: dict | None = None,
    noise_kwargs: dict | None = None,
) -> list[RunStats]:
    """Monte Carlo campaign; flight i uses seed ``seed + i`` so results are
    independent of execution order."""
    stats = []
    for i in range(n_runs):
        route = gen_random_route(bounds, height_agl, speed_mps, timestep_s, seed + i)
        log = run_flight(
            deployment,
            raster,
            route,
            params,
            operator_set,
            channel_kwargs=channel_kwargs,
            noise_kwargs=noise_kwargs,
        )
        stats.append(flight_stats(log, run_id=i, window_s=window_s))
    return stats


# -- aggregation ------------------------------------------------------------------


@dataclass(frozen=True)
class Summary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float


def _summarize(values) -> Summary:
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        return Summary(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return Summary(
        min=float(arr.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        max=float(arr.max()),
        mean=float(arr.mean()),
    )


_RUN_METRICS = ("n_ho", "ho_per_min", "n_rlf", "rlf_total_s")


def aggregate_runs(stats: list[RunStats]) -> dict[tuple[str, str], Summary]:
    """Distribution summaries keyed by (scope, metric).

    Scope is a network id or "composite". Run-level metrics are
    summarized across runs; "rlf_duration_s" pools individual RLF event
    durations across all runs.
    """
    if not stats:
        raise ValueError("no runs to aggregate")
    op_ids = stats[0].operator_ids
    for st in stats:
        if st.operator_ids != op_ids:
            raise ValueError("all runs must share the same operator set")

    out: dict[tuple[str, str], Summary] = {}
    scopes = [(op_id, lambda st, op_id=op_id: st.per_network[op_id]) for op_id in op_ids]
    scopes.append(("composite", lambda st: st.composite))
    for scope, pick in scopes:
        for metric in _RUN_METRICS:
            out[(scope, metric)] = _summarize(getattr(pick(st), metric) for st in stats)
        pooled = [d for st in stats for d in pick(st).rlf_durations]
        out[(scope, "rlf_duration_s")] = _summarize(pooled)
    return out


# -- CSV serialization -------------------------------------------------------------


def flights_csv(stats: list[RunStats]) -> str:
    lines = ["run_id,height_agl,op_set,n_ho,ho_per_min,n_rlf,rlf_total_s"]
    for st in stats:
        c = st.composite
        lines.append(
            f"{st.run_id},{st.height_agl:.3f},{st.op_set_label},"
            f"{c.n_ho},{c.ho_per_min:.6f},{c.n_rlf},{c.rlf_total_s:.6f}"
        )
    return "\n".join(lines) + "\n"


def rlf_durations_csv(stats: list[RunStats]) -> str:
    lines = ["run_id,op_set,duration_s"]
    for st in stats:
        for d in st.composite.rlf_durations:
            lines.append(f"{st.run_id},{st.op_set_label},{d:.6f}")
    return "\n".join(lines) + "\n"


def summary_csv(groups: list[tuple[float, str, dict[tuple[str, str], Summary]]]) -> str:
    """groups: (height_agl, op_set_label, aggregate_runs output) triples."""
    lines = ["height_agl,op_set,scope,metric,min,q1,median,q3,max,mean"]
    for height, label, agg in groups:
        for (scope, metric), s in sorted(agg.items()):
            lines.append(
                f"{height:.3f},{label},{scope},{metric},"
                f"{s.min:.6f},{s.q1:.6f},{s.median:.6f},{s.q3:.6f},{s.max:.6f},{s.mean:.6f}"
            )
    return "\n".join(lines) + "\n"


__all__ = [
    "CompositeLog",
    "ConnectionParams",
    "Event",
    "FlightLog",
    "HO",
    "Mode",
    "NetState",
    "NetStats",
    "NetTrace",
    "RESELECT",
    "RLF_END",
    "RLF_START",
    "RunStats",
    "Summary",
    "Trajectory",
    "aggregate_runs",
    "combine_networks",
    "flight_stats",
    "flights_csv",
    "gen_random_route",
    "make_trajectory",
    "rlf_durations_csv",
    "rlf_intervals",
    "run_flight",
    "run_random_flights",
    "step_connection",
    "summary_csv",
]
