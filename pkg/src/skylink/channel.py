"""Air-to-ground link state, pathloss, received power and noise.

The link state is purely geometric (surface raster line of sight); the
aerial urban-macro pathloss applies above 22.5 m with a terrestrial
urban-macro fallback below. Shadowing is optional and off by default:
grids and flights use median pathloss unless explicitly enabled.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import lru_cache

import numpy as np

from ._kernels import (
    pathloss_scalar_db,
    rx_power_scalar_dbm,
    shadow_scalar_db,
)
from .network import Sector
from .terrain import DsmRaster, GeoPoint, has_los


class LinkState(Enum):
    LOS = "LOS"
    NLOS = "NLOS"


class ChannelModel(IntEnum):
    UMA_AV = 0
    FREE_SPACE = 1


@dataclass(frozen=True)
class ChannelParams:
    fc_hz: float
    model: ChannelModel = ChannelModel.UMA_AV
    shadowing_enabled: bool = False
    shadow_decorrelation_m: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if self.fc_hz <= 0:
            raise ValueError(f"fc_hz must be > 0, got {self.fc_hz}")
        if self.shadowing_enabled and self.shadow_decorrelation_m <= 0:
            raise ValueError("shadow_decorrelation_m must be > 0 when shadowing is enabled")


@dataclass(frozen=True)
class NoiseParams:
    bandwidth_hz: float
    noise_density_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")


def noise_power_dbm(noise: NoiseParams) -> float:
    """Thermal noise power N = B * N0 * F, in dBm."""
    return (
        noise.noise_density_dbm_hz
        + 10.0 * math.log10(noise.bandwidth_hz)
        + noise.noise_figure_db
    )


def classify_link(raster: DsmRaster, sector: Sector, p: GeoPoint) -> LinkState:
    """LOS iff the surface raster leaves the antenna-to-point segment clear."""
    return LinkState.LOS if has_los(raster, sector.position, p) else LinkState.NLOS


def pathloss_db(
    params: ChannelParams, link: LinkState, d2d: float, d3d: float, h_ut: float
) -> float:
    """Median pathloss for the given geometry.

    Aerial urban-macro above 22.5 m (NLOS height coefficient clamped at
    100 m); terrestrial urban-macro below; or free space.
    """
    if d3d <= 0:
        raise ValueError(f"d3d must be > 0, got {d3d}")
    if h_ut < 0:
        raise ValueError(f"h_ut must be >= 0, got {h_ut}")
    return float(
        pathloss_scalar_db(int(params.model), params.fc_hz, link is LinkState.LOS, d2d, d3d, h_ut)
    )


# -- shadowing ----------------------------------------------------------------

_N_SHADOW_WAVES = 256
_EMPTY_WAVES = np.zeros(0, dtype=np.float64)


@lru_cache(maxsize=4096)
def _shadow_waves(seed: int, decorrelation_m: float, sector_id: str):
    """Plane-wave table (kx, ky, phase) for one sector's shadowing field.

    The wavenumber magnitudes are drawn from the spectral density whose
    isotropic correlation is exp(-d/decorrelation). Seeded by a stable
    hash of (seed, sector id) so results do not depend on process state.
    """
    digest = hashlib.blake2b(
        f"{seed}|{decorrelation_m!r}|{sector_id}".encode(), digest_size=8
    ).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    u = 1.0 - rng.random(_N_SHADOW_WAVES)
    k = np.sqrt(u**-2.0 - 1.0) / decorrelation_m
    theta = rng.uniform(0.0, 2.0 * np.pi, _N_SHADOW_WAVES)
    phase = rng.uniform(0.0, 2.0 * np.pi, _N_SHADOW_WAVES)
    return (
        np.ascontiguousarray(k * np.cos(theta)),
        np.ascontiguousarray(k * np.sin(theta)),
        np.ascontiguousarray(phase),
    )


def shadow_db(params: ChannelParams, sector: Sector, p: GeoPoint, link: LinkState) -> float:
    """Shadow fading term at p for this sector (0 when shadowing is off)."""
    if not params.shadowing_enabled:
        return 0.0
    kx, ky, ph = _shadow_waves(params.seed, params.shadow_decorrelation_m, sector.id)
    return float(shadow_scalar_db(kx, ky, ph, p.x, p.y, link is LinkState.LOS, max(p.z, 0.0)))


def sector_shadow_tables(params: ChannelParams, sectors) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacked per-sector wave tables for the grid/route kernels."""
    n = len(sectors)
    if not params.shadowing_enabled:
        empty = np.zeros((n, 0), dtype=np.float64)
        return empty, empty, empty
    kx = np.empty((n, _N_SHADOW_WAVES), dtype=np.float64)
    ky = np.empty((n, _N_SHADOW_WAVES), dtype=np.float64)
    ph = np.empty((n, _N_SHADOW_WAVES), dtype=np.float64)
    for i, sec in enumerate(sectors):
        kx[i], ky[i], ph[i] = _shadow_waves(params.seed, params.shadow_decorrelation_m, sec.id)
    return kx, ky, ph


# -- received power -----------------------------------------------------------

_EMPTY_AXIS = np.zeros(0, dtype=np.float64)
_EMPTY_TABLE = np.zeros((0, 0), dtype=np.float64)


def rx_power_dbm(sector: Sector, p: GeoPoint, raster: DsmRaster, params: ChannelParams) -> float:
    """Received power at p from the sector: tx + gain - pathloss - shadow.

    This is the single-point reference path; the grid and route kernels
    evaluate exactly the same computation, so field samples match this
    call bit for bit.
    """
    if (
        p.x == sector.position.x
        and p.y == sector.position.y
        and p.z == sector.position.z
    ):
        raise ValueError(f"point coincides with sector {sector.id} antenna position")
    if params.shadowing_enabled:
        kx, ky, ph = _shadow_waves(params.seed, params.shadow_decorrelation_m, sector.id)
    else:
        kx = ky = ph = _EMPTY_WAVES
    if sector.pattern.table is not None:
        tab_az = sector.pattern.table.az_deg
        tab_el = sector.pattern.table.el_deg
        tab_g = sector.pattern.table.gain_dbi
    else:
        tab_az = tab_el = _EMPTY_AXIS
        tab_g = _EMPTY_TABLE
    return float(
        rx_power_scalar_dbm(
            raster.elevations,
            raster.origin_x,
            raster.origin_y,
            raster.resolution,
            sector.position.x,
            sector.position.y,
            sector.position.z,
            sector.azimuth_deg,
            sector.downtilt_deg,
            sector.tx_power_dbm,
            sector.pattern.gain_max_dbi,
            sector.pattern.hbw_deg,
            sector.pattern.vbw_deg,
            sector.pattern.front_back_db,
            sector.pattern.sla_v_db,
            sector.pattern.upper_sidelobe_extra_db,
            int(params.model),
            params.fc_hz,
            p.x,
            p.y,
            p.z,
            kx,
            ky,
            ph,
            tab_az,
            tab_el,
            tab_g,
        )
    )


__all__ = [
    "ChannelModel",
    "ChannelParams",
    "LinkState",
    "NoiseParams",
    "classify_link",
    "noise_power_dbm",
    "pathloss_db",
    "rx_power_dbm",
    "sector_shadow_tables",
    "shadow_db",
]
