"""Numba kernels shared by the point-query and grid/route evaluation paths.

Every grid or route value is produced by the same scalar functions the
public point APIs call, so a field sample equals an independent
single-point call bit for bit. Nothing here uses fastmath; IEEE
semantics are preserved so results are independent of partitioning.
"""

from __future__ import annotations

import math
import os

import numpy as np
from numba import config as _numba_config
from numba import njit, prange, set_num_threads

MODEL_UMA_AV = 0
MODEL_FREE_SPACE = 1

# fixed BS height used only by the terrestrial fallback breakpoint
_TERRESTRIAL_BS_HEIGHT_M = 25.0
_LIGHT_SPEED = 3.0e8


def apply_thread_cap() -> None:
    """Honor the SKYLINK_THREADS env var for parallel kernel regions."""
    cap = os.environ.get("SKYLINK_THREADS")
    if not cap:
        return
    try:
        n = int(cap)
    except ValueError:
        return
    set_num_threads(max(1, min(n, _numba_config.NUMBA_NUM_THREADS)))


@njit(cache=True)
def los_clear(elev, ox, oy, res, ax, ay, az, bx, by, bz):
    """Exact DDA over the cells crossed by the 2D segment a-b.

    Returns False as soon as the segment's interpolated height fails to
    exceed a crossed cell's surface. The cells containing the endpoints
    are skipped. Grazing a surface exactly counts as blocked.
    """
    nrows, ncols = elev.shape
    ca = int(math.floor((ax - ox) / res))
    ra = int(math.floor((ay - oy) / res))
    cb = int(math.floor((bx - ox) / res))
    rb = int(math.floor((by - oy) / res))
    if ca >= ncols:
        ca = ncols - 1
    if cb >= ncols:
        cb = ncols - 1
    if ra >= nrows:
        ra = nrows - 1
    if rb >= nrows:
        rb = nrows - 1
    if ca == cb and ra == rb:
        return True

    dx = bx - ax
    dy = by - ay
    dz = bz - az

    step_c = 0
    t_max_x = math.inf
    t_dx = math.inf
    if dx > 0.0:
        step_c = 1
        t_max_x = (ox + (ca + 1) * res - ax) / dx
        t_dx = res / dx
    elif dx < 0.0:
        step_c = -1
        t_max_x = (ox + ca * res - ax) / dx
        t_dx = -res / dx

    step_r = 0
    t_max_y = math.inf
    t_dy = math.inf
    if dy > 0.0:
        step_r = 1
        t_max_y = (oy + (ra + 1) * res - ay) / dy
        t_dy = res / dy
    elif dy < 0.0:
        step_r = -1
        t_max_y = (oy + ra * res - ay) / dy
        t_dy = -res / dy

    col = ca
    row = ra
    t_enter = 0.0
    max_steps = abs(cb - ca) + abs(rb - ra) + 4
    for _ in range(max_steps):
        if t_max_x < t_max_y:
            t_exit = t_max_x
            t_max_x += t_dx
            ncol = col + step_c
            nrow = row
        elif t_max_y < t_max_x:
            t_exit = t_max_y
            t_max_y += t_dy
            ncol = col
            nrow = row + step_r
        else:
            # exact corner crossing: step diagonally
            t_exit = t_max_x
            t_max_x += t_dx
            t_max_y += t_dy
            ncol = col + step_c
            nrow = row + step_r
        if t_exit > 1.0:
            t_exit = 1.0
        if not ((col == ca and row == ra) or (col == cb and row == rb)):
            if 0 <= row < nrows and 0 <= col < ncols:
                z1 = az + t_enter * dz
                z2 = az + t_exit * dz
                zmin = z1 if z1 < z2 else z2
                if zmin <= elev[row, col]:
                    return False
        col = ncol
        row = nrow
        t_enter = t_exit
        if col == cb and row == rb:
            break
        if t_enter >= 1.0:
            break
    return True


@njit(cache=True)
def pattern_gain_db(gmax, hbw, vbw, am, slav, upper_extra, az_off, el_off):
    """Sectored parametric pattern with upper-sidelobe suppression."""
    ah = 12.0 * (az_off / hbw) * (az_off / hbw)
    if ah > am:
        ah = am
    av = 12.0 * (el_off / vbw) * (el_off / vbw)
    if av > slav:
        av = slav
    att = ah + av
    if att > am:
        att = am
    g = gmax - att
    if el_off > 0.0:
        g -= upper_extra
        floor = gmax - am - slav
        if g < floor:
            g = floor
    return g


@njit(cache=True)
def pathloss_scalar_db(model, fc_hz, is_los, d2d, d3d, h_ut):
    """Pathloss in dB; d3d is clamped to 1 mm to stay finite."""
    if d3d < 1e-3:
        d3d = 1e-3
    if model == MODEL_FREE_SPACE:
        return 20.0 * math.log10(d3d) + 20.0 * math.log10(fc_hz) - 147.55

    fg = fc_hz / 1.0e9
    if h_ut > 22.5:
        if is_los:
            return 28.0 + 22.0 * math.log10(d3d) + 20.0 * math.log10(fg)
        h = h_ut
        if h > 100.0:
            h = 100.0
        return (
            -17.5
            + (46.0 - 7.0 * math.log10(h)) * math.log10(d3d)
            + 20.0 * math.log10(40.0 * math.pi * fg / 3.0)
        )

    # terrestrial urban-macro fallback for low heights
    h = h_ut
    if h < 1.5:
        h = 1.5
    hbs = _TERRESTRIAL_BS_HEIGHT_M
    dbp = 4.0 * (hbs - 1.0) * (h - 1.0) * fc_hz / _LIGHT_SPEED
    if d2d <= dbp:
        pl_los = 28.0 + 22.0 * math.log10(d3d) + 20.0 * math.log10(fg)
    else:
        pl_los = (
            28.0
            + 40.0 * math.log10(d3d)
            + 20.0 * math.log10(fg)
            - 9.0 * math.log10(dbp * dbp + (hbs - h) * (hbs - h))
        )
    if is_los:
        return pl_los
    pl_nlos = 13.54 + 39.08 * math.log10(d3d) + 20.0 * math.log10(fg) - 0.6 * (h - 1.5)
    if pl_nlos < pl_los:
        pl_nlos = pl_los
    return pl_nlos


@njit(cache=True)
def table_gain_db(tab_az, tab_el, tab_g, az_off, el_off):
    """Bilinear lookup in a measured-pattern table, clamped to the hull.

    Mirrors PatternTable.lookup operation for operation so both paths
    agree bitwise.
    """
    az = az_off
    if az < tab_az[0]:
        az = tab_az[0]
    if az > tab_az[-1]:
        az = tab_az[-1]
    el = el_off
    if el < tab_el[0]:
        el = tab_el[0]
    if el > tab_el[-1]:
        el = tab_el[-1]
    i = np.searchsorted(tab_az, az, side="right") - 1
    j = np.searchsorted(tab_el, el, side="right") - 1
    if i > tab_az.shape[0] - 2:
        i = tab_az.shape[0] - 2
    if j > tab_el.shape[0] - 2:
        j = tab_el.shape[0] - 2
    ta = (az - tab_az[i]) / (tab_az[i + 1] - tab_az[i])
    te = (el - tab_el[j]) / (tab_el[j + 1] - tab_el[j])
    return (
        (1 - ta) * (1 - te) * tab_g[i, j]
        + ta * (1 - te) * tab_g[i + 1, j]
        + (1 - ta) * te * tab_g[i, j + 1]
        + ta * te * tab_g[i + 1, j + 1]
    )


@njit(cache=True)
def shadow_scalar_db(kx, ky, ph, px, py, is_los, h_ut):
    """Correlated log-normal shadowing from a plane-wave expansion.

    The normalized field is a pure function of position (order of
    evaluation cannot change results); its spatial correlation decays as
    exp(-d/decorrelation) by construction of the wavenumber density.
    """
    m = kx.shape[0]
    if m == 0:
        return 0.0
    s = 0.0
    for i in range(m):
        s += math.cos(kx[i] * px + ky[i] * py + ph[i])
    s *= math.sqrt(2.0 / m)
    if is_los:
        sigma = 4.64 * math.exp(-0.0066 * h_ut)
    else:
        sigma = 6.0
    return sigma * s


@njit(cache=True)
def rx_power_scalar_dbm(
    elev,
    ox,
    oy,
    res,
    sx,
    sy,
    sz,
    az_deg,
    tilt_deg,
    tx_dbm,
    gmax,
    hbw,
    vbw,
    am,
    slav,
    upper_extra,
    model,
    fc_hz,
    px,
    py,
    pz,
    kx,
    ky,
    ph,
    tab_az,
    tab_el,
    tab_g,
):
    """Received power: tx + pattern gain - pathloss - shadowing.

    A non-empty ``tab_az`` switches the gain to a table lookup.
    """
    dx = px - sx
    dy = py - sy
    dz = pz - sz
    d2d = math.sqrt(dx * dx + dy * dy)
    d3d = math.sqrt(dx * dx + dy * dy + dz * dz)

    bearing = math.degrees(math.atan2(dx, dy))
    az_off = (bearing - az_deg + 180.0) % 360.0
    if az_off <= 0.0:
        az_off += 360.0
    az_off -= 180.0
    el = math.degrees(math.atan2(dz, d2d))
    el_off = el + tilt_deg

    is_los = los_clear(elev, ox, oy, res, sx, sy, sz, px, py, pz)
    h_ut = pz
    if h_ut < 0.0:
        h_ut = 0.0
    pl = pathloss_scalar_db(model, fc_hz, is_los, d2d, d3d, h_ut)
    if tab_az.shape[0] > 0:
        g = table_gain_db(tab_az, tab_el, tab_g, az_off, el_off)
    else:
        g = pattern_gain_db(gmax, hbw, vbw, am, slav, upper_extra, az_off, el_off)
    sh = shadow_scalar_db(kx, ky, ph, px, py, is_los, h_ut)
    return tx_dbm + g - pl - sh


@njit(cache=True)
def sinr_from_powers_db(powers_dbm, serving, load, noise_dbm):
    """SINR of ``serving`` against the other entries of ``powers_dbm``.

    Interference is summed in ascending index order and scaled by the
    fractional load; -inf serving power yields -inf.
    """
    interf = 0.0
    for i in range(powers_dbm.shape[0]):
        if i != serving:
            interf += 10.0 ** (powers_dbm[i] / 10.0)
    num = 10.0 ** (powers_dbm[serving] / 10.0)
    den = load * interf + 10.0 ** (noise_dbm / 10.0)
    if num <= 0.0:
        return -math.inf
    return 10.0 * math.log10(num / den)


@njit(cache=True, parallel=True)
def power_field_kernel(
    elev,
    ox,
    oy,
    res,
    gx0,
    gy0,
    res_eval,
    nrows_eval,
    ncols_eval,
    z_eval,
    sec_pos,
    sec_az,
    sec_tilt,
    sec_tx,
    sec_pat,
    model,
    fc_hz,
    sh_kx,
    sh_ky,
    sh_ph,
    tab_az,
    tab_el,
    tab_g,
):
    """Per-sector received power on the evaluation grid.

    Grid points sit at cell centres at constant z; points whose surface
    cell rises above z are not evaluable and are filled with -inf.
    """
    n_sec = sec_pos.shape[0]
    rx = np.empty((nrows_eval, ncols_eval, n_sec), dtype=np.float64)
    evaluable = np.empty((nrows_eval, ncols_eval), dtype=np.bool_)
    nrows, ncols = elev.shape
    for r in prange(nrows_eval):
        for c in range(ncols_eval):
            x = gx0 + (c + 0.5) * res_eval
            y = gy0 + (r + 0.5) * res_eval
            col = int(math.floor((x - ox) / res))
            row = int(math.floor((y - oy) / res))
            if col >= ncols:
                col = ncols - 1
            if row >= nrows:
                row = nrows - 1
            if elev[row, col] > z_eval:
                evaluable[r, c] = False
                for s in range(n_sec):
                    rx[r, c, s] = -math.inf
                continue
            evaluable[r, c] = True
            for s in range(n_sec):
                rx[r, c, s] = rx_power_scalar_dbm(
                    elev,
                    ox,
                    oy,
                    res,
                    sec_pos[s, 0],
                    sec_pos[s, 1],
                    sec_pos[s, 2],
                    sec_az[s],
                    sec_tilt[s],
                    sec_tx[s],
                    sec_pat[s, 0],
                    sec_pat[s, 1],
                    sec_pat[s, 2],
                    sec_pat[s, 3],
                    sec_pat[s, 4],
                    sec_pat[s, 5],
                    model,
                    fc_hz,
                    x,
                    y,
                    z_eval,
                    sh_kx[s],
                    sh_ky[s],
                    sh_ph[s],
                    tab_az,
                    tab_el,
                    tab_g,
                )
    return rx, evaluable


@njit(cache=True, parallel=True)
def route_measure_kernel(
    elev,
    ox,
    oy,
    res,
    pts,
    sec_pos,
    sec_az,
    sec_tilt,
    sec_tx,
    sec_pat,
    model,
    fc_hz,
    sh_kx,
    sh_ky,
    sh_ph,
    tab_az,
    tab_el,
    tab_g,
):
    """Per-sector received power at each route sample point."""
    m = pts.shape[0]
    n_sec = sec_pos.shape[0]
    rx = np.empty((m, n_sec), dtype=np.float64)
    for i in prange(m):
        for s in range(n_sec):
            rx[i, s] = rx_power_scalar_dbm(
                elev,
                ox,
                oy,
                res,
                sec_pos[s, 0],
                sec_pos[s, 1],
                sec_pos[s, 2],
                sec_az[s],
                sec_tilt[s],
                sec_tx[s],
                sec_pat[s, 0],
                sec_pat[s, 1],
                sec_pat[s, 2],
                sec_pat[s, 3],
                sec_pat[s, 4],
                sec_pat[s, 5],
                model,
                fc_hz,
                pts[i, 0],
                pts[i, 1],
                pts[i, 2],
                sh_kx[s],
                sh_ky[s],
                sh_ph[s],
                tab_az,
                tab_el,
                tab_g,
            )
    return rx


@njit(cache=True, parallel=True)
def sinr_grid_kernel(rx, evaluable, load, noise_dbm):
    """Serving assignment (argmax, first index wins ties) and SINR per point."""
    nrows, ncols, n_sec = rx.shape
    sinr = np.empty((nrows, ncols), dtype=np.float64)
    serving = np.empty((nrows, ncols), dtype=np.int32)
    for r in prange(nrows):
        for c in range(ncols):
            if not evaluable[r, c]:
                sinr[r, c] = -math.inf
                serving[r, c] = -1
                continue
            best = 0
            for s in range(1, n_sec):
                if rx[r, c, s] > rx[r, c, best]:
                    best = s
            if rx[r, c, best] == -math.inf:
                sinr[r, c] = -math.inf
                serving[r, c] = -1
                continue
            serving[r, c] = best
            sinr[r, c] = sinr_from_powers_db(rx[r, c], best, load, noise_dbm)
    return sinr, serving
