"""Antenna pattern, sector geometry, deployment I/O and hex generator tests."""

import json
import math

import numpy as np
import pytest

from skylink.network import (
    AntennaPattern,
    Deployment,
    DeploymentError,
    PatternTable,
    Sector,
    antenna_gain_db,
    gen_hex_network,
    load_deployment,
    save_deployment,
    sector_bearing,
)
from skylink.terrain import DsmRaster, GeoPoint


def flat_raster(size=10, resolution=100.0):
    return DsmRaster(
        origin_x=-size * resolution / 2,
        origin_y=-size * resolution / 2,
        resolution=resolution,
        ncols=size,
        nrows=size,
        elevations=np.zeros((size, size)),
    )


def mk_sector(azimuth=0.0, downtilt=6.0, position=(0.0, 0.0, 30.0), **kw):
    return Sector(
        id=kw.pop("id", "s0"),
        position=GeoPoint(*position),
        azimuth_deg=azimuth,
        downtilt_deg=downtilt,
        tx_power_dbm=kw.pop("tx_power_dbm", 43.0),
        pattern=kw.pop("pattern", AntennaPattern()),
        operator_id=kw.pop("operator_id", "op1"),
    )


# ---------------------------------------------------------------------------
# Parametric antenna pattern
# ---------------------------------------------------------------------------


class TestAntennaGain:
    def test_boresight(self):
        pat = AntennaPattern()
        assert antenna_gain_db(pat, 0.0, 0.0) == pat.gain_max_dbi

    def test_half_beamwidth_is_3db_down(self):
        pat = AntennaPattern()
        got = antenna_gain_db(pat, pat.hbw_deg / 2, 0.0)
        assert got == pytest.approx(pat.gain_max_dbi - 3.0, abs=1e-12)

    def test_back_lobe_clamped_at_front_back(self):
        pat = AntennaPattern()
        got = antenna_gain_db(pat, 180.0, 0.0)
        assert got == pytest.approx(pat.gain_max_dbi - pat.front_back_db, abs=1e-12)

    def test_even_in_azimuth(self):
        pat = AntennaPattern()
        rng = np.random.default_rng(3)
        for az in rng.uniform(0, 180, 50):
            assert antenna_gain_db(pat, az, 0.0) == antenna_gain_db(pat, -az, 0.0)

    def test_never_exceeds_gain_max(self):
        pat = AntennaPattern()
        rng = np.random.default_rng(5)
        for az, el in zip(rng.uniform(-180, 180, 200), rng.uniform(-90, 90, 200)):
            assert antenna_gain_db(pat, az, el) <= pat.gain_max_dbi

    def test_upper_sidelobe_suppression(self):
        plain = AntennaPattern(upper_sidelobe_extra_db=0.0)
        supp = AntennaPattern(upper_sidelobe_extra_db=10.0)
        floor = supp.gain_max_dbi - supp.front_back_db - supp.sla_v_db
        rng = np.random.default_rng(7)
        for az, el in zip(rng.uniform(-180, 180, 200), rng.uniform(0.01, 90, 200)):
            base = antenna_gain_db(plain, az, el)
            got = antenna_gain_db(supp, az, el)
            assert got == pytest.approx(max(base - 10.0, floor), abs=1e-12)
        for az, el in zip(rng.uniform(-180, 180, 100), rng.uniform(-90, 0, 100)):
            assert antenna_gain_db(supp, az, el) == antenna_gain_db(plain, az, el)

    def test_invalid_pattern_rejected(self):
        with pytest.raises(ValueError):
            AntennaPattern(hbw_deg=0.0)
        with pytest.raises(ValueError):
            AntennaPattern(front_back_db=-1.0)


class TestSynthesizeColumnPattern:
    def test_boresight_is_gain_max(self):
        from skylink.network import synthesize_column_pattern

        pat = synthesize_column_pattern(gain_max_dbi=17.0)
        assert antenna_gain_db(pat, 0.0, 0.0) == pytest.approx(17.0, abs=0.05)

    def test_has_nulls_and_sidelobes_above_boresight(self):
        from skylink.network import synthesize_column_pattern

        pat = synthesize_column_pattern(n_elements=8, spacing_wl=0.9,
                                        upper_sidelobe_extra_db=0.0,
                                        null_floor_db=-30.0)
        els = np.arange(8.5, 40.0, 0.25)
        gains = np.array([antenna_gain_db(pat, 0.0, e) for e in els])
        # alternation: the upper region spans at least 15 dB peak-to-null
        assert gains.max() - gains.min() > 15.0
        assert gains.max() < pat.gain_max_dbi - 8.0  # clearly below the main lobe

    def test_upper_suppression_lowers_only_upper_region(self):
        from skylink.network import synthesize_column_pattern

        base = synthesize_column_pattern(upper_sidelobe_extra_db=0.0)
        supp = synthesize_column_pattern(upper_sidelobe_extra_db=10.0)
        assert antenna_gain_db(supp, 0.0, 20.0) == pytest.approx(
            antenna_gain_db(base, 0.0, 20.0) - 10.0, abs=1e-9)
        assert antenna_gain_db(supp, 0.0, -20.0) == pytest.approx(
            antenna_gain_db(base, 0.0, -20.0), abs=1e-9)

    def test_lower_null_fill_floors_below_boresight(self):
        from skylink.network import synthesize_column_pattern

        filled = synthesize_column_pattern(lower_null_fill_db=18.0,
                                           upper_sidelobe_extra_db=0.0)
        els = np.arange(-60.0, 0.0, 0.25)
        gains = np.array([antenna_gain_db(filled, 0.0, e) for e in els])
        assert gains.min() >= filled.gain_max_dbi - 18.0 - 1e-9

    def test_upper_ripple_period(self):
        from skylink.network import synthesize_column_pattern

        pat = synthesize_column_pattern(upper_ripple_period_deg=5.0,
                                        upper_ripple_depth_db=12.0,
                                        upper_level_db=-13.0,
                                        upper_sidelobe_extra_db=0.0)
        # peaks recur every 5 degrees starting at the first null
        first_null = math.degrees(math.asin(1.0 / (8 * 0.9)))
        g1 = antenna_gain_db(pat, 0.0, first_null + 5.0)
        g2 = antenna_gain_db(pat, 0.0, first_null + 10.0)
        assert g1 == pytest.approx(g2, abs=0.05)
        trough = antenna_gain_db(pat, 0.0, first_null + 2.5)
        assert g1 - trough == pytest.approx(12.0, abs=0.1)

    def test_chebyshev_taper_equalizes_sidelobes(self):
        from skylink.network import synthesize_column_pattern

        pat = synthesize_column_pattern(n_elements=16, taper_sidelobe_db=20.0,
                                        upper_sidelobe_extra_db=0.0,
                                        null_floor_db=-60.0)
        els = np.arange(10.0, 30.0, 0.05)
        gains = np.array([antenna_gain_db(pat, 0.0, e) for e in els])
        # local maxima (sidelobe peaks) sit near gain_max - 20
        peaks = [gains[i] for i in range(1, len(gains) - 1)
                 if gains[i] > gains[i - 1] and gains[i] > gains[i + 1]]
        assert peaks
        assert max(abs(p - (pat.gain_max_dbi - 20.0)) for p in peaks) < 1.5


class TestPatternTable:
    def test_exact_on_nodes_and_bilinear_between(self):
        az = np.array([-180.0, 0.0, 180.0])
        el = np.array([-90.0, 0.0, 90.0])
        # gain = 2 + 0.01*az + 0.1*el is bilinear, so interpolation is exact
        gain = 2.0 + 0.01 * az[:, None] + 0.1 * el[None, :]
        pat = AntennaPattern(table=PatternTable(az, el, gain))
        assert antenna_gain_db(pat, 0.0, 0.0) == pytest.approx(2.0)
        assert antenna_gain_db(pat, 90.0, 45.0) == pytest.approx(2.0 + 0.9 + 4.5)
        assert antenna_gain_db(pat, -37.3, 12.9) == pytest.approx(2.0 - 0.373 + 1.29)

    def test_clamped_outside_hull(self):
        az = np.array([-10.0, 10.0])
        el = np.array([-10.0, 10.0])
        gain = np.array([[1.0, 2.0], [3.0, 4.0]])
        pat = AntennaPattern(table=PatternTable(az, el, gain))
        assert antenna_gain_db(pat, 170.0, 0.0) == antenna_gain_db(pat, 10.0, 0.0)


# ---------------------------------------------------------------------------
# Sector bearing geometry
# ---------------------------------------------------------------------------


class TestSectorBearing:
    def test_due_north_same_height(self):
        sec = mk_sector(azimuth=0.0, downtilt=6.0, position=(0, 0, 30))
        az_off, el_off, d2d, d3d = sector_bearing(sec, GeoPoint(0, 500, 30))
        assert az_off == pytest.approx(0.0, abs=1e-12)
        assert el_off == pytest.approx(6.0, abs=1e-12)
        assert d2d == pytest.approx(500.0)
        assert d3d == pytest.approx(500.0)

    def test_directly_above(self):
        sec = mk_sector(azimuth=45.0, downtilt=6.0, position=(10, 20, 30))
        az_off, el_off, d2d, d3d = sector_bearing(sec, GeoPoint(10, 20, 130))
        assert el_off == pytest.approx(96.0)
        assert d2d == 0.0
        assert d3d == pytest.approx(100.0)

    def test_wrap_range(self):
        sec = mk_sector(azimuth=350.0, position=(0, 0, 0))
        az_off, _, _, _ = sector_bearing(sec, GeoPoint(0, 100, 0))  # bearing 0
        assert az_off == pytest.approx(10.0)
        sec = mk_sector(azimuth=170.0, position=(0, 0, 0))
        az_off, _, _, _ = sector_bearing(sec, GeoPoint(0, 100, 0))
        assert az_off == pytest.approx(-170.0)

    def test_opposite_maps_to_plus_180(self):
        sec = mk_sector(azimuth=90.0, position=(0, 0, 0))
        az_off, _, _, _ = sector_bearing(sec, GeoPoint(-100, 0, 0))  # bearing 270
        assert az_off == pytest.approx(180.0)

    def test_coincident_point_raises(self):
        sec = mk_sector(position=(1, 2, 3))
        with pytest.raises(ValueError):
            sector_bearing(sec, GeoPoint(1, 2, 3))

    def test_against_trig_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            spos = rng.uniform(-500, 500, 3)
            p = rng.uniform(-500, 500, 3)
            if np.allclose(spos, p):
                continue
            azim = float(rng.uniform(0, 360))
            tilt = float(rng.uniform(-10, 15))
            sec = mk_sector(azimuth=azim, downtilt=tilt, position=tuple(spos))
            az_off, el_off, d2d, d3d = sector_bearing(sec, GeoPoint(*p))

            dx, dy, dz = p - spos
            d2d_ref = math.hypot(dx, dy)
            d3d_ref = math.sqrt(dx * dx + dy * dy + dz * dz)
            bearing = math.degrees(math.atan2(dx, dy)) % 360.0
            diff = (bearing - azim) % 360.0
            if diff > 180.0:
                diff -= 360.0
            el_ref = math.degrees(math.atan2(dz, d2d_ref)) + tilt
            assert az_off == pytest.approx(diff, abs=1e-9)
            assert el_off == pytest.approx(el_ref, abs=1e-9)
            assert d2d == pytest.approx(d2d_ref, abs=1e-9)
            assert d3d == pytest.approx(d3d_ref, abs=1e-9)


# ---------------------------------------------------------------------------
# Hexagonal layout generator
# ---------------------------------------------------------------------------


class TestGenHexNetwork:
    def test_zero_rings(self):
        net = gen_hex_network(500.0, 0)
        assert len(net.sectors) == 3

    def test_two_rings(self):
        net = gen_hex_network(500.0, 2)
        assert len(net.sectors) == 57

    def test_sector_count_formula(self):
        for rings in range(4):
            net = gen_hex_network(300.0, rings)
            sites = 1 + sum(6 * r for r in range(1, rings + 1))
            assert len(net.sectors) == 3 * sites

    def test_deterministic(self):
        a = gen_hex_network(500.0, 1, azimuth_jitter_deg=5.0, seed=42)
        b = gen_hex_network(500.0, 1, azimuth_jitter_deg=5.0, seed=42)
        assert a == b

    def test_neighbor_distance_is_isd(self):
        net = gen_hex_network(500.0, 1)
        sites = sorted({(s.position.x, s.position.y) for s in net.sectors})
        center = (0.0, 0.0)
        ring = [s for s in sites if s != center]
        for x, y in ring:
            assert math.hypot(x, y) == pytest.approx(500.0)

    def test_azimuth_offset_applied(self):
        net = gen_hex_network(500.0, 0, azimuth_offset_deg=40.0)
        assert sorted(s.azimuth_deg for s in net.sectors) == pytest.approx([40.0, 160.0, 280.0])


# ---------------------------------------------------------------------------
# Deployment document I/O
# ---------------------------------------------------------------------------


def minimal_doc(azimuth=45.0):
    return {
        "operators": [
            {
                "operator_id": "op1",
                "carrier_hz": 1.8e9,
                "bandwidth_hz": 20e6,
                "sectors": [
                    {
                        "id": "s1",
                        "x": 0.0,
                        "y": 0.0,
                        "antenna_height_agl": 30.0,
                        "azimuth_deg": azimuth,
                        "downtilt_deg": 6.0,
                        "tx_power_dbm": 43.0,
                    }
                ],
            }
        ]
    }


class TestLoadDeployment:
    def test_minimal(self):
        dep = load_deployment(json.dumps(minimal_doc()), flat_raster())
        assert len(dep.operators) == 1
        assert len(dep.operators[0].sectors) == 1
        assert dep.operators[0].sectors[0].position.z == 30.0

    def test_height_is_above_surface(self):
        elev = np.zeros((10, 10))
        elev[5, 5] = 12.0  # cell containing (0, 0) for the origin used below
        raster = DsmRaster(
            origin_x=-500.0,
            origin_y=-500.0,
            resolution=100.0,
            ncols=10,
            nrows=10,
            elevations=elev,
        )
        dep = load_deployment(json.dumps(minimal_doc()), raster)
        assert dep.operators[0].sectors[0].position.z == 42.0

    def test_bad_azimuth_names_path(self):
        doc = minimal_doc(azimuth=400.0)
        with pytest.raises(DeploymentError, match=r"operators\[0\].sectors\[0\].azimuth_deg"):
            load_deployment(json.dumps(doc), flat_raster())

    def test_unknown_key_rejected(self):
        doc = minimal_doc()
        doc["operators"][0]["sectors"][0]["frequency"] = 1.0
        with pytest.raises(DeploymentError, match="unknown key"):
            load_deployment(json.dumps(doc), flat_raster())

    def test_duplicate_sector_id(self):
        doc = minimal_doc()
        doc["operators"][0]["sectors"].append(dict(doc["operators"][0]["sectors"][0]))
        with pytest.raises(DeploymentError, match="duplicate"):
            load_deployment(json.dumps(doc), flat_raster())

    def test_duplicate_operator_id(self):
        doc = minimal_doc()
        other = json.loads(json.dumps(doc["operators"][0]))
        other["sectors"][0]["id"] = "s2"
        doc["operators"].append(other)
        with pytest.raises(DeploymentError, match="unique"):
            load_deployment(json.dumps(doc), flat_raster())

    def test_invalid_json(self):
        with pytest.raises(DeploymentError):
            load_deployment("{not json", flat_raster())

    def test_round_trip(self):
        raster = flat_raster(size=40, resolution=100.0)
        ops = tuple(
            gen_hex_network(
                500.0,
                1,
                operator_id=f"op{k + 1}",
                azimuth_offset_deg=k * 40.0,
                azimuth_jitter_deg=3.0,
                seed=k,
            )
            for k in range(2)
        )
        dep = Deployment(operators=ops, raster=raster)
        again = load_deployment(save_deployment(dep, raster), raster)
        assert again.operators == dep.operators
