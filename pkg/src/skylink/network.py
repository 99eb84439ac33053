"""Multi-operator deployments: sites, sectors, antenna patterns.

Deployment documents are JSON (schema below); hexagonal test networks
can be synthesized with per-operator azimuth offsets, lattice shifts and
seeded jitter to obtain the inter-operator layout diversity that real
networks exhibit.

Deployment JSON schema::

    {"operators": [
        {"operator_id": "op1", "carrier_hz": 1.8e9, "bandwidth_hz": 20e6,
         "sectors": [
             {"id": "op1-s00-0", "x": 100.0, "y": 200.0,
              "antenna_height_agl": 30.0, "azimuth_deg": 0.0,
              "downtilt_deg": 6.0, "tx_power_dbm": 43.0,
              "pattern": { ... optional ... }}]}]}

``antenna_height_agl`` is metres above the surface raster at (x, y) and
is converted to an absolute z at load time. Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import pattern_gain_db
from .terrain import DsmRaster, GeoPoint, elevation_at


class DeploymentError(ValueError):
    """Raised when a deployment document fails validation."""


@dataclass(frozen=True)
class PatternTable:
    """Measured gain samples on an (azimuth, elevation) grid, in dBi."""

    az_deg: np.ndarray
    el_deg: np.ndarray
    gain_dbi: np.ndarray  # shape (n_az, n_el)

    def __post_init__(self):
        az = np.ascontiguousarray(np.asarray(self.az_deg, dtype=np.float64))
        el = np.ascontiguousarray(np.asarray(self.el_deg, dtype=np.float64))
        g = np.ascontiguousarray(np.asarray(self.gain_dbi, dtype=np.float64))
        if az.ndim != 1 or el.ndim != 1 or az.size < 2 or el.size < 2:
            raise ValueError("pattern table needs at least a 2x2 grid")
        if np.any(np.diff(az) <= 0) or np.any(np.diff(el) <= 0):
            raise ValueError("pattern table axes must be strictly ascending")
        if g.shape != (az.size, el.size):
            raise ValueError(
                f"pattern table gain shape {g.shape} does not match axes "
                f"({az.size}, {el.size})"
            )
        object.__setattr__(self, "az_deg", az)
        object.__setattr__(self, "el_deg", el)
        object.__setattr__(self, "gain_dbi", g)

    def lookup(self, az_off: float, el_off: float) -> float:
        """Bilinear interpolation, clamped to the grid hull."""
        az = min(max(az_off, self.az_deg[0]), self.az_deg[-1])
        el = min(max(el_off, self.el_deg[0]), self.el_deg[-1])
        i = int(np.searchsorted(self.az_deg, az, side="right") - 1)
        j = int(np.searchsorted(self.el_deg, el, side="right") - 1)
        i = min(i, self.az_deg.size - 2)
        j = min(j, self.el_deg.size - 2)
        ta = (az - self.az_deg[i]) / (self.az_deg[i + 1] - self.az_deg[i])
        te = (el - self.el_deg[j]) / (self.el_deg[j + 1] - self.el_deg[j])
        g = self.gain_dbi
        return float(
            (1 - ta) * (1 - te) * g[i, j]
            + ta * (1 - te) * g[i + 1, j]
            + (1 - ta) * te * g[i, j + 1]
            + ta * te * g[i + 1, j + 1]
        )


@dataclass(frozen=True)
class AntennaPattern:
    """Sectored antenna pattern, parametric unless ``table`` is given."""

    gain_max_dbi: float = 17.0
    hbw_deg: float = 65.0
    vbw_deg: float = 6.5
    front_back_db: float = 30.0
    sla_v_db: float = 30.0
    upper_sidelobe_extra_db: float = 10.0
    table: PatternTable | None = None

    def __post_init__(self):
        if not 0.0 < self.hbw_deg <= 180.0 or not 0.0 < self.vbw_deg <= 180.0:
            raise ValueError("beamwidths must be in (0, 180] degrees")
        if self.front_back_db < 0 or self.sla_v_db < 0 or self.upper_sidelobe_extra_db < 0:
            raise ValueError("pattern attenuations must be non-negative")


@dataclass(frozen=True)
class Sector:
    """One sector antenna of a site."""

    id: str
    position: GeoPoint
    azimuth_deg: float
    downtilt_deg: float
    tx_power_dbm: float
    pattern: AntennaPattern
    operator_id: str

    def __post_init__(self):
        if not 0.0 <= self.azimuth_deg < 360.0:
            raise ValueError(f"sector {self.id}: azimuth must be in [0, 360), got {self.azimuth_deg}")
        if not math.isfinite(self.tx_power_dbm):
            raise ValueError(f"sector {self.id}: tx_power_dbm must be finite")


@dataclass(frozen=True)
class OperatorNetwork:
    operator_id: str
    carrier_hz: float
    bandwidth_hz: float
    sectors: tuple[Sector, ...]

    def __post_init__(self):
        object.__setattr__(self, "sectors", tuple(self.sectors))
        if not self.sectors:
            raise ValueError(f"operator {self.operator_id}: sector list must be non-empty")
        if self.carrier_hz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError(f"operator {self.operator_id}: carrier and bandwidth must be > 0")


@dataclass(frozen=True)
class Deployment:
    operators: tuple[OperatorNetwork, ...]
    raster: DsmRaster | None = None

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        ids = [op.operator_id for op in self.operators]
        if len(set(ids)) != len(ids):
            raise ValueError(f"operator ids must be unique, got {ids}")

    def operator(self, operator_id: str) -> OperatorNetwork:
        for op in self.operators:
            if op.operator_id == operator_id:
                return op
        raise KeyError(f"unknown operator {operator_id!r}")


# -- angle / gain queries -----------------------------------------------------


def antenna_gain_db(pattern: AntennaPattern, az_off: float, el_off: float) -> float:
    """Gain in dBi at the given offsets from boresight.

    Uses the parametric sectored form unless the pattern carries a
    measured table, in which case the table is interpolated bilinearly.
    """
    if pattern.table is not None:
        return pattern.table.lookup(az_off, el_off)
    return float(
        pattern_gain_db(
            pattern.gain_max_dbi,
            pattern.hbw_deg,
            pattern.vbw_deg,
            pattern.front_back_db,
            pattern.sla_v_db,
            pattern.upper_sidelobe_extra_db,
            az_off,
            el_off,
        )
    )


def sector_bearing(sector: Sector, p: GeoPoint) -> tuple[float, float, float, float]:
    """(az_off, el_off, d2d, d3d) of point p as seen from the sector.

    az_off is the signed difference between the bearing to p and the
    sector azimuth, wrapped to (-180, 180]; el_off is the elevation
    angle of p relative to the downtilted boresight.
    """
    dx = p.x - sector.position.x
    dy = p.y - sector.position.y
    dz = p.z - sector.position.z
    d2d = math.sqrt(dx * dx + dy * dy)
    d3d = math.sqrt(dx * dx + dy * dy + dz * dz)
    if d3d == 0.0:
        raise ValueError(f"point coincides with sector {sector.id} antenna position")
    bearing = math.degrees(math.atan2(dx, dy))
    az_off = (bearing - sector.azimuth_deg + 180.0) % 360.0
    if az_off <= 0.0:
        az_off += 360.0
    az_off -= 180.0
    el = math.degrees(math.atan2(dz, d2d))
    el_off = el + sector.downtilt_deg
    return az_off, el_off, d2d, d3d


# -- document I/O -------------------------------------------------------------

_PATTERN_KEYS = {
    "gain_max_dbi",
    "hbw_deg",
    "vbw_deg",
    "front_back_db",
    "sla_v_db",
    "upper_sidelobe_extra_db",
    "table",
}
_TABLE_KEYS = {"az_deg", "el_deg", "gain_dbi"}
_SECTOR_KEYS = {
    "id",
    "x",
    "y",
    "antenna_height_agl",
    "azimuth_deg",
    "downtilt_deg",
    "tx_power_dbm",
    "pattern",
}
_OPERATOR_KEYS = {"operator_id", "carrier_hz", "bandwidth_hz", "sectors"}


def _require(cond: bool, path: str, message: str):
    if not cond:
        raise DeploymentError(f"validation error at `{path}`: {message}")


def _number(obj, path: str) -> float:
    _require(isinstance(obj, (int, float)) and not isinstance(obj, bool), path, "expected a number")
    _require(math.isfinite(obj), path, "must be finite")
    return float(obj)


def _check_keys(obj: dict, allowed: set[str], path: str):
    unknown = set(obj) - allowed
    if unknown:
        raise DeploymentError(f"validation error at `{path}.{sorted(unknown)[0]}`: unknown key")


def _parse_pattern(obj, path: str) -> AntennaPattern:
    _require(isinstance(obj, dict), path, "expected an object")
    _check_keys(obj, _PATTERN_KEYS, path)
    kwargs = {}
    for key in _PATTERN_KEYS - {"table"}:
        if key in obj:
            kwargs[key] = _number(obj[key], f"{path}.{key}")
    table = None
    if "table" in obj:
        tobj = obj["table"]
        _require(isinstance(tobj, dict), f"{path}.table", "expected an object")
        _check_keys(tobj, _TABLE_KEYS, f"{path}.table")
        for key in _TABLE_KEYS:
            _require(key in tobj, f"{path}.table.{key}", "missing key")
        try:
            table = PatternTable(
                np.asarray(tobj["az_deg"], dtype=np.float64),
                np.asarray(tobj["el_deg"], dtype=np.float64),
                np.asarray(tobj["gain_dbi"], dtype=np.float64),
            )
        except ValueError as exc:
            raise DeploymentError(f"validation error at `{path}.table`: {exc}") from None
    try:
        return AntennaPattern(table=table, **kwargs)
    except ValueError as exc:
        raise DeploymentError(f"validation error at `{path}`: {exc}") from None


def load_deployment(document: str | dict, raster: DsmRaster) -> Deployment:
    """Parse and fully validate a deployment document against a raster.

    Antenna heights are above the local surface; the absolute antenna z
    is resolved here so all later geometry is in absolute coordinates.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise DeploymentError(f"validation error at `$`: invalid JSON ({exc})") from None
    _require(isinstance(document, dict), "$", "expected a JSON object")
    _check_keys(document, {"operators"}, "$")
    _require("operators" in document, "$.operators", "missing key")
    ops_obj = document["operators"]
    _require(isinstance(ops_obj, list) and ops_obj, "$.operators", "expected a non-empty array")

    seen_sector_ids: set[str] = set()
    operators = []
    for i, op_obj in enumerate(ops_obj):
        op_path = f"operators[{i}]"
        _require(isinstance(op_obj, dict), op_path, "expected an object")
        _check_keys(op_obj, _OPERATOR_KEYS, op_path)
        for key in ("operator_id", "carrier_hz", "bandwidth_hz", "sectors"):
            _require(key in op_obj, f"{op_path}.{key}", "missing key")
        _require(isinstance(op_obj["operator_id"], str), f"{op_path}.operator_id", "expected a string")
        carrier = _number(op_obj["carrier_hz"], f"{op_path}.carrier_hz")
        _require(carrier > 0, f"{op_path}.carrier_hz", "must be > 0")
        bandwidth = _number(op_obj["bandwidth_hz"], f"{op_path}.bandwidth_hz")
        _require(bandwidth > 0, f"{op_path}.bandwidth_hz", "must be > 0")
        secs_obj = op_obj["sectors"]
        _require(isinstance(secs_obj, list) and secs_obj, f"{op_path}.sectors", "expected a non-empty array")

        sectors = []
        for j, sec_obj in enumerate(secs_obj):
            sec_path = f"{op_path}.sectors[{j}]"
            _require(isinstance(sec_obj, dict), sec_path, "expected an object")
            _check_keys(sec_obj, _SECTOR_KEYS, sec_path)
            for key in _SECTOR_KEYS - {"pattern"}:
                _require(key in sec_obj, f"{sec_path}.{key}", "missing key")
            _require(isinstance(sec_obj["id"], str), f"{sec_path}.id", "expected a string")
            sid = sec_obj["id"]
            _require(sid not in seen_sector_ids, f"{sec_path}.id", f"duplicate sector id {sid!r}")
            seen_sector_ids.add(sid)
            x = _number(sec_obj["x"], f"{sec_path}.x")
            y = _number(sec_obj["y"], f"{sec_path}.y")
            _require(raster.contains(x, y), f"{sec_path}.x", "site outside raster bounds")
            agl = _number(sec_obj["antenna_height_agl"], f"{sec_path}.antenna_height_agl")
            _require(agl >= 0, f"{sec_path}.antenna_height_agl", "must be >= 0")
            azimuth = _number(sec_obj["azimuth_deg"], f"{sec_path}.azimuth_deg")
            _require(0.0 <= azimuth < 360.0, f"{sec_path}.azimuth_deg", "must be in [0, 360)")
            downtilt = _number(sec_obj["downtilt_deg"], f"{sec_path}.downtilt_deg")
            tx = _number(sec_obj["tx_power_dbm"], f"{sec_path}.tx_power_dbm")
            pattern = (
                _parse_pattern(sec_obj["pattern"], f"{sec_path}.pattern")
                if "pattern" in sec_obj
                else AntennaPattern()
            )
            z = elevation_at(raster, x, y) + agl
            sectors.append(
                Sector(
                    id=sid,
                    position=GeoPoint(x, y, z),
                    azimuth_deg=azimuth,
                    downtilt_deg=downtilt,
                    tx_power_dbm=tx,
                    pattern=pattern,
                    operator_id=op_obj["operator_id"],
                )
            )
        operators.append(
            OperatorNetwork(
                operator_id=op_obj["operator_id"],
                carrier_hz=carrier,
                bandwidth_hz=bandwidth,
                sectors=tuple(sectors),
            )
        )
    try:
        return Deployment(operators=tuple(operators), raster=raster)
    except ValueError as exc:
        raise DeploymentError(f"validation error at `$.operators`: {exc}") from None


def save_deployment(deployment: Deployment, raster: DsmRaster | None = None) -> str:
    """Serialize a deployment to JSON; inverse of :func:`load_deployment`."""
    raster = raster if raster is not None else deployment.raster
    ops = []
    for op in deployment.operators:
        secs = []
        for sec in op.sectors:
            surface = elevation_at(raster, sec.position.x, sec.position.y) if raster else 0.0
            entry = {
                "id": sec.id,
                "x": sec.position.x,
                "y": sec.position.y,
                "antenna_height_agl": sec.position.z - surface,
                "azimuth_deg": sec.azimuth_deg,
                "downtilt_deg": sec.downtilt_deg,
                "tx_power_dbm": sec.tx_power_dbm,
                "pattern": _pattern_to_dict(sec.pattern),
            }
            secs.append(entry)
        ops.append(
            {
                "operator_id": op.operator_id,
                "carrier_hz": op.carrier_hz,
                "bandwidth_hz": op.bandwidth_hz,
                "sectors": secs,
            }
        )
    return json.dumps({"operators": ops}, indent=2)


def _pattern_to_dict(pattern: AntennaPattern) -> dict:
    out = {
        "gain_max_dbi": pattern.gain_max_dbi,
        "hbw_deg": pattern.hbw_deg,
        "vbw_deg": pattern.vbw_deg,
        "front_back_db": pattern.front_back_db,
        "sla_v_db": pattern.sla_v_db,
        "upper_sidelobe_extra_db": pattern.upper_sidelobe_extra_db,
    }
    if pattern.table is not None:
        out["table"] = {
            "az_deg": pattern.table.az_deg.tolist(),
            "el_deg": pattern.table.el_deg.tolist(),
            "gain_dbi": pattern.table.gain_dbi.tolist(),
        }
    return out


def synthesize_column_pattern(
    n_elements: int = 8,
    spacing_wl: float = 0.9,
    gain_max_dbi: float = 17.0,
    hbw_deg: float = 65.0,
    front_back_db: float = 45.0,
    upper_sidelobe_extra_db: float = 10.0,
    null_floor_db: float = -30.0,
    taper_sidelobe_db: float | None = None,
    lower_null_fill_db: float | None = None,
    upper_ripple_period_deg: float | None = None,
    upper_ripple_depth_db: float = 15.0,
    upper_level_db: float = -13.0,
    az_step_deg: float = 2.0,
    el_step_deg: float = 0.25,
) -> AntennaPattern:
    """Tabulated sector pattern with a realistic vertical lobe structure.

    The vertical cut is the array factor of a vertical column of
    ``n_elements`` radiators: a narrow main lobe, distinct sidelobes and
    nulls between them (bounded at ``null_floor_db``), with extra
    suppression applied to the sidelobes above boresight (less energy
    toward the sky). ``taper_sidelobe_db`` applies a Chebyshev amplitude
    taper giving equal-ripple sidelobes at that level; the default
    uniform column has decaying sidelobes instead. ``lower_null_fill_db``
    floors the cut below boresight at that depth, the usual null-fill
    treatment that keeps ground coverage smooth. When
    ``upper_ripple_period_deg`` is given, the region above the first
    null is replaced by a lobe/null ripple of that angular period
    around ``upper_level_db`` (full panels show a denser upper structure
    than a bare column would suggest). Stands in for measured
    macro-antenna data when none is available; the sidelobe / null
    alternation up high is what fragments cell dominance at altitude.
    """
    if n_elements < 2 or spacing_wl <= 0:
        raise ValueError("need at least 2 elements with positive spacing")
    az = np.arange(-180.0, 180.0 + az_step_deg / 2, az_step_deg)
    el = np.arange(-90.0, 90.0 + el_step_deg / 2, el_step_deg)
    a_h = -np.minimum(12.0 * (az / hbw_deg) ** 2, front_back_db)

    psi = 2.0 * np.pi * spacing_wl * np.sin(np.radians(el))
    if taper_sidelobe_db is None:
        num = np.sin(n_elements * psi / 2.0)
        den = n_elements * np.sin(psi / 2.0)
        af = np.abs(np.where(np.abs(den) < 1e-9, 1.0, num / np.where(np.abs(den) < 1e-9, 1.0, den)))
    else:
        import warnings

        from scipy.signal.windows import chebwin

        with warnings.catch_warnings():
            # chebwin warns about noise-bandwidth behavior below 45 dB,
            # which concerns spectral windows, not array tapers
            warnings.simplefilter("ignore", UserWarning)
            weights = chebwin(n_elements, at=abs(taper_sidelobe_db))
        k = np.arange(n_elements)[:, None]
        af = np.abs(np.sum(weights[:, None] * np.exp(1j * k * psi[None, :]), axis=0))
        af /= weights.sum()
    a_v = 20.0 * np.log10(np.maximum(af, 10.0 ** (null_floor_db / 20.0)))
    first_null_deg = math.degrees(math.asin(min(1.0, 1.0 / (n_elements * spacing_wl))))
    if lower_null_fill_db is not None:
        fill = np.maximum(a_v, -abs(lower_null_fill_db))
        a_v = np.where(el <= 0.0, fill, a_v)
    if upper_ripple_period_deg is not None:
        ripple = upper_level_db - 0.5 * upper_ripple_depth_db * (
            1.0 - np.cos(2.0 * np.pi * (el - first_null_deg) / upper_ripple_period_deg)
        )
        a_v = np.where(el > first_null_deg, ripple, a_v)
    a_v = np.where(el > first_null_deg, a_v - upper_sidelobe_extra_db, a_v)

    gain = gain_max_dbi + np.maximum(a_h[:, None] + a_v[None, :], -front_back_db)
    return AntennaPattern(
        gain_max_dbi=gain_max_dbi,
        hbw_deg=hbw_deg,
        front_back_db=front_back_db,
        upper_sidelobe_extra_db=upper_sidelobe_extra_db,
        table=PatternTable(az, el, gain),
    )


# -- synthetic hexagonal networks ---------------------------------------------


def hex_site_positions(isd: float, rings: int, center: tuple[float, float] = (0.0, 0.0)):
    """Site centres of a hexagonal lattice with the given inter-site distance."""
    if isd <= 0:
        raise ValueError(f"isd must be > 0, got {isd}")
    if rings < 0:
        raise ValueError(f"rings must be >= 0, got {rings}")
    sites = []
    for q in range(-rings, rings + 1):
        for r in range(max(-rings, -q - rings), min(rings, -q + rings) + 1):
            x = center[0] + isd * (q + r / 2.0)
            y = center[1] + isd * (math.sqrt(3.0) / 2.0) * r
            sites.append((x, y))
    return sites


def gen_hex_network(
    isd: float,
    rings: int,
    operator_id: str = "op1",
    *,
    per_site_sectors: int = 3,
    azimuth_offset_deg: float = 0.0,
    center: tuple[float, float] = (0.0, 0.0),
    antenna_height_agl: float = 30.0,
    downtilt_deg: float = 6.0,
    tx_power_dbm: float = 43.0,
    carrier_hz: float = 1.8e9,
    bandwidth_hz: float = 20e6,
    pattern: AntennaPattern | None = None,
    azimuth_jitter_deg: float = 0.0,
    downtilt_jitter_deg: float = 0.0,
    seed: int = 0,
    raster: DsmRaster | None = None,
) -> OperatorNetwork:
    """Synthesize a hexagonal sectored network, deterministic per seed.

    Different operators built with distinct azimuth offsets and/or lattice
    centres (and, optionally, seeded per-sector jitter) model the layout
    diversity between real operators. When ``raster`` is given, antennas
    are mounted ``antenna_height_agl`` above the local surface; otherwise
    ground level 0 is assumed.
    """
    pattern = pattern if pattern is not None else AntennaPattern()
    rng = np.random.default_rng(seed)
    sites = hex_site_positions(isd, rings, center)
    sectors = []
    for si, (x, y) in enumerate(sites):
        if raster is not None:
            z = elevation_at(raster, x, y) + antenna_height_agl
        else:
            z = antenna_height_agl
        for k in range(per_site_sectors):
            az = k * 360.0 / per_site_sectors + azimuth_offset_deg
            if azimuth_jitter_deg > 0:
                az += float(rng.uniform(-azimuth_jitter_deg, azimuth_jitter_deg))
            tilt = downtilt_deg
            if downtilt_jitter_deg > 0:
                tilt += float(rng.uniform(-downtilt_jitter_deg, downtilt_jitter_deg))
            sectors.append(
                Sector(
                    id=f"{operator_id}-s{si:02d}-{k}",
                    position=GeoPoint(x, y, z),
                    azimuth_deg=az % 360.0,
                    downtilt_deg=tilt,
                    tx_power_dbm=tx_power_dbm,
                    pattern=pattern,
                    operator_id=operator_id,
                )
            )
    return OperatorNetwork(
        operator_id=operator_id,
        carrier_hz=carrier_hz,
        bandwidth_hz=bandwidth_hz,
        sectors=tuple(sectors),
    )


__all__ = [
    "AntennaPattern",
    "Deployment",
    "DeploymentError",
    "OperatorNetwork",
    "PatternTable",
    "Sector",
    "antenna_gain_db",
    "gen_hex_network",
    "hex_site_positions",
    "load_deployment",
    "save_deployment",
    "sector_bearing",
]
