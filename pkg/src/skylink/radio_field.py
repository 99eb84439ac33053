"""Received-power and SINR fields on a fixed-altitude evaluation grid.

Evaluation points sit at grid-cell centres at a constant z equal to the
flight height above ground datum. Points whose surface cell rises above
that height (building interiors) are not evaluable: they carry no field
values and are excluded from all downstream statistics.

Every field sample equals an independent single-point call of
:func:`skylink.channel.rx_power_dbm` bit for bit; the grid path takes no
shortcuts and results do not depend on how the grid is partitioned
across threads.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import (
    apply_thread_cap,
    power_field_kernel,
    route_measure_kernel,
    sinr_from_powers_db,
    sinr_grid_kernel,
)
from .channel import ChannelParams, NoiseParams, noise_power_dbm, rx_power_dbm, sector_shadow_tables
from .network import Deployment, OperatorNetwork
from .terrain import DsmRaster, GeoPoint


@dataclass(frozen=True)
class PowerField:
    """Per-point, per-sector received power for one operator."""

    operator_id: str
    height_agl: float
    origin_x: float
    origin_y: float
    resolution: float
    sector_ids: tuple[str, ...]
    rx_dbm: np.ndarray = field(repr=False)  # (rows, cols, n_sectors)
    evaluable: np.ndarray = field(repr=False)  # (rows, cols) bool

    @property
    def nrows(self) -> int:
        return self.rx_dbm.shape[0]

    @property
    def ncols(self) -> int:
        return self.rx_dbm.shape[1]

    def point_xy(self, row: int, col: int) -> tuple[float, float]:
        return (
            self.origin_x + (col + 0.5) * self.resolution,
            self.origin_y + (row + 0.5) * self.resolution,
        )


@dataclass(frozen=True)
class SinrField:
    """Combined serving assignment and SINR for an operator set."""

    height_agl: float
    load: float
    operator_ids: tuple[str, ...]
    origin_x: float
    origin_y: float
    resolution: float
    sector_ids: tuple[str, ...]  # combined, indexed by `serving`
    sinr_db: np.ndarray = field(repr=False)  # (rows, cols), -inf for no signal
    serving: np.ndarray = field(repr=False)  # (rows, cols) int32, -1 for none
    evaluable: np.ndarray = field(repr=False)  # (rows, cols) bool

    @property
    def nrows(self) -> int:
        return self.sinr_db.shape[0]

    @property
    def ncols(self) -> int:
        return self.sinr_db.shape[1]

    @property
    def op_set_label(self) -> str:
        return "+".join(self.operator_ids)

    def point_xy(self, row: int, col: int) -> tuple[float, float]:
        return (
            self.origin_x + (col + 0.5) * self.resolution,
            self.origin_y + (row + 0.5) * self.resolution,
        )


def _grid_shape(raster: DsmRaster, resolution: float) -> tuple[int, int]:
    ncols = max(1, int((raster.width + 1e-9) // resolution))
    nrows = max(1, int((raster.height + 1e-9) // resolution))
    return nrows, ncols


_EMPTY_AXIS = np.zeros(0, dtype=np.float64)
_EMPTY_TABLE = np.zeros((0, 0), dtype=np.float64)


def _pack_sectors(op: OperatorNetwork):
    n = len(op.sectors)
    pos = np.empty((n, 3), dtype=np.float64)
    az = np.empty(n, dtype=np.float64)
    tilt = np.empty(n, dtype=np.float64)
    tx = np.empty(n, dtype=np.float64)
    pat = np.empty((n, 6), dtype=np.float64)
    for i, sec in enumerate(op.sectors):
        pos[i] = (sec.position.x, sec.position.y, sec.position.z)
        az[i] = sec.azimuth_deg
        tilt[i] = sec.downtilt_deg
        tx[i] = sec.tx_power_dbm
        p = sec.pattern
        pat[i] = (
            p.gain_max_dbi,
            p.hbw_deg,
            p.vbw_deg,
            p.front_back_db,
            p.sla_v_db,
            p.upper_sidelobe_extra_db,
        )
    return pos, az, tilt, tx, pat


def _shared_table(op: OperatorNetwork):
    """The table shared by all sectors, empty arrays if none have one,
    or None when tables are heterogeneous (slow path)."""
    tables = [sec.pattern.table for sec in op.sectors]
    if all(t is None for t in tables):
        return _EMPTY_AXIS, _EMPTY_AXIS, _EMPTY_TABLE
    first = tables[0]
    if first is None:
        return None
    for t in tables[1:]:
        if t is None:
            return None
        if t is not first and not (
            np.array_equal(t.az_deg, first.az_deg)
            and np.array_equal(t.el_deg, first.el_deg)
            and np.array_equal(t.gain_dbi, first.gain_dbi)
        ):
            return None
    return first.az_deg, first.el_deg, first.gain_dbi


def _default_channel(op: OperatorNetwork, channel, channel_kwargs) -> ChannelParams:
    if channel is not None:
        return channel
    return ChannelParams(fc_hz=op.carrier_hz, **(channel_kwargs or {}))


def _default_noise(op: OperatorNetwork, noise, noise_kwargs) -> NoiseParams:
    if noise is not None:
        return noise
    return NoiseParams(bandwidth_hz=op.bandwidth_hz, **(noise_kwargs or {}))


def compute_power_field(
    deployment: Deployment,
    operator_id: str,
    raster: DsmRaster | None = None,
    height_agl: float = 100.0,
    resolution: float = 25.0,
    channel: ChannelParams | None = None,
    channel_kwargs: dict | None = None,
) -> PowerField:
    """Received power from every sector of one operator over the grid."""
    raster = raster if raster is not None else deployment.raster
    if raster is None:
        raise ValueError("no raster given and deployment carries none")
    if height_agl < 0:
        raise ValueError(f"height_agl must be >= 0, got {height_agl}")
    if resolution <= 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    op = deployment.operator(operator_id)
    for sec in op.sectors:
        if not raster.contains(sec.position.x, sec.position.y):
            raise ValueError(f"sector {sec.id} site outside raster bounds")
    cp = _default_channel(op, channel, channel_kwargs)
    nrows, ncols = _grid_shape(raster, resolution)
    sector_ids = tuple(sec.id for sec in op.sectors)

    table = _shared_table(op)
    if table is None:
        rx, evaluable = _power_field_python(op, raster, height_agl, resolution, nrows, ncols, cp)
    else:
        apply_thread_cap()
        pos, az, tilt, tx, pat = _pack_sectors(op)
        kx, ky, ph = sector_shadow_tables(cp, op.sectors)
        rx, evaluable = power_field_kernel(
            raster.elevations,
            raster.origin_x,
            raster.origin_y,
            raster.resolution,
            raster.origin_x,
            raster.origin_y,
            resolution,
            nrows,
            ncols,
            float(height_agl),
            pos,
            az,
            tilt,
            tx,
            pat,
            int(cp.model),
            cp.fc_hz,
            kx,
            ky,
            ph,
            *table,
        )
    return PowerField(
        operator_id=operator_id,
        height_agl=height_agl,
        origin_x=raster.origin_x,
        origin_y=raster.origin_y,
        resolution=resolution,
        sector_ids=sector_ids,
        rx_dbm=rx,
        evaluable=evaluable,
    )


def _power_field_python(op, raster, height_agl, resolution, nrows, ncols, cp):
    """Reference grid path for tabulated patterns (slow, point-by-point)."""
    rx = np.full((nrows, ncols, len(op.sectors)), -np.inf, dtype=np.float64)
    evaluable = np.zeros((nrows, ncols), dtype=bool)
    from .terrain import elevation_at

    for r in range(nrows):
        y = raster.origin_y + (r + 0.5) * resolution
        for c in range(ncols):
            x = raster.origin_x + (c + 0.5) * resolution
            if elevation_at(raster, x, y) > height_agl:
                continue
            evaluable[r, c] = True
            p = GeoPoint(x, y, float(height_agl))
            for s, sec in enumerate(op.sectors):
                rx[r, c, s] = rx_power_dbm(sec, p, raster, cp)
    return rx, evaluable


def measure_route_powers(
    op: OperatorNetwork,
    raster: DsmRaster,
    points: np.ndarray,
    channel: ChannelParams | None = None,
    channel_kwargs: dict | None = None,
) -> np.ndarray:
    """Per-sector received power at each route sample, shape (n_samples, n_sectors).

    Samples are evaluated exactly like single-point calls; no grid
    interpolation is involved.
    """
    cp = _default_channel(op, channel, channel_kwargs)
    points = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError("points must have shape (n, 3)")
    table = _shared_table(op)
    if table is None:
        out = np.empty((points.shape[0], len(op.sectors)), dtype=np.float64)
        for i in range(points.shape[0]):
            p = GeoPoint(*points[i])
            for s, sec in enumerate(op.sectors):
                out[i, s] = rx_power_dbm(sec, p, raster, cp)
        return out
    apply_thread_cap()
    pos, az, tilt, tx, pat = _pack_sectors(op)
    kx, ky, ph = sector_shadow_tables(cp, op.sectors)
    return route_measure_kernel(
        raster.elevations,
        raster.origin_x,
        raster.origin_y,
        raster.resolution,
        points,
        pos,
        az,
        tilt,
        tx,
        pat,
        int(cp.model),
        cp.fc_hz,
        kx,
        ky,
        ph,
        *table,
    )


def sinr_at(powers_dbm, serving_index: int, load: float, noise_dbm: float) -> float:
    """SINR (dB) of the serving entry against the rest at the given load."""
    powers = np.ascontiguousarray(np.asarray(powers_dbm, dtype=np.float64))
    if powers.ndim != 1 or powers.size == 0:
        raise ValueError("powers_dbm must be a non-empty 1D sequence")
    if not 0 <= serving_index < powers.size:
        raise ValueError(f"serving_index {serving_index} out of range")
    if not 0.0 <= load <= 1.0:
        raise ValueError(f"load must be in [0, 1], got {load}")
    return float(sinr_from_powers_db(powers, serving_index, load, noise_dbm))


def assign_serving(pfield: PowerField) -> np.ndarray:
    """Strongest-sector index per point (ties to the lowest index; -1 if none)."""
    if pfield.rx_dbm.shape[2] == 0:
        raise ValueError("power field has no sectors")
    out = np.argmax(pfield.rx_dbm, axis=2).astype(np.int32)
    best = np.max(pfield.rx_dbm, axis=2)
    out[~pfield.evaluable] = -1
    out[best == -np.inf] = -1
    return out


def multi_op_sinr(per_operator_sinrs) -> tuple[float, int]:
    """Best per-operator SINR and its operator index (ties to lowest index)."""
    values = list(per_operator_sinrs)
    if not values:
        raise ValueError("per_operator_sinrs must be non-empty")
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return values[best], best


def compute_sinr_grid(
    deployment: Deployment,
    raster: DsmRaster | None,
    height_agl: float,
    resolution: float,
    load: float,
    operator_set,
    channel: ChannelParams | None = None,
    channel_kwargs: dict | None = None,
    noise: NoiseParams | None = None,
    noise_kwargs: dict | None = None,
) -> SinrField:
    """Best-operator SINR field over the grid.

    Each operator is evaluated independently (its own serving assignment
    and same-operator interference scaled by ``load``); the point then
    takes the maximum SINR over the operator set.
    """
    operator_set = tuple(operator_set)
    if not operator_set:
        raise ValueError("operator_set must be non-empty")
    if not 0.0 <= load <= 1.0:
        raise ValueError(f"load must be in [0, 1], got {load}")
    raster = raster if raster is not None else deployment.raster

    per_op_sinr = []
    per_op_serving = []
    offsets = []
    combined_ids: list[str] = []
    evaluable = None
    for op_id in operator_set:
        op = deployment.operator(op_id)
        pfield = compute_power_field(
            deployment, op_id, raster, height_agl, resolution, channel, channel_kwargs
        )
        noise_dbm = noise_power_dbm(_default_noise(op, noise, noise_kwargs))
        sinr, serving = sinr_grid_kernel(pfield.rx_dbm, pfield.evaluable, float(load), noise_dbm)
        per_op_sinr.append(sinr)
        per_op_serving.append(serving)
        offsets.append(len(combined_ids))
        combined_ids.extend(pfield.sector_ids)
        evaluable = pfield.evaluable if evaluable is None else evaluable

    stack = np.stack(per_op_sinr)  # (k, rows, cols)
    winner = np.argmax(stack, axis=0)  # first max wins ties
    combined_sinr = np.take_along_axis(stack, winner[None], axis=0)[0]

    serving_stack = np.stack(per_op_serving)
    serving_local = np.take_along_axis(serving_stack, winner[None], axis=0)[0]
    offset_arr = np.asarray(offsets, dtype=np.int32)[winner]
    combined_serving = np.where(serving_local >= 0, serving_local + offset_arr, -1).astype(np.int32)

    return SinrField(
        height_agl=height_agl,
        load=load,
        operator_ids=operator_set,
        origin_x=raster.origin_x,
        origin_y=raster.origin_y,
        resolution=resolution,
        sector_ids=tuple(combined_ids),
        sinr_db=combined_sinr,
        serving=combined_serving,
        evaluable=evaluable,
    )


# -- serialization ------------------------------------------------------------


def format_db(value: float) -> str:
    """Fixed 6-decimal dB formatting; the no-signal sentinel stays `-inf`."""
    if value == -math.inf:
        return "-inf"
    return f"{value:.6f}"


def sinr_field_csv(field_: SinrField) -> str:
    """CSV export: x,y,height_agl,op_set,serving_sector,sinr_db per evaluable point."""
    buf = io.StringIO()
    buf.write("x,y,height_agl,op_set,serving_sector,sinr_db\n")
    label = field_.op_set_label
    for r in range(field_.nrows):
        for c in range(field_.ncols):
            if not field_.evaluable[r, c]:
                continue
            x, y = field_.point_xy(r, c)
            idx = int(field_.serving[r, c])
            sec = field_.sector_ids[idx] if idx >= 0 else ""
            buf.write(
                f"{x:.3f},{y:.3f},{field_.height_agl:.3f},{label},{sec},"
                f"{format_db(float(field_.sinr_db[r, c]))}\n"
            )
    return buf.getvalue()


__all__ = [
    "PowerField",
    "SinrField",
    "assign_serving",
    "compute_power_field",
    "compute_sinr_grid",
    "format_db",
    "measure_route_powers",
    "multi_op_sinr",
    "sinr_at",
    "sinr_field_csv",
]
