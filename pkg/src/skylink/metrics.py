"""Coverage statistics over SINR fields.

Coverage uses the strict inequality SINR > T. Outage zones are
4-connected components of {SINR <= T} among evaluable cells; building
cells are neither covered nor outage and break connectivity. Everything
here is pure over immutable fields.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .radio_field import SinrField, format_db

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.int32)


@dataclass(frozen=True)
class CoverageReport:
    height_agl: float
    load: float
    operator_ids: tuple[str, ...]
    threshold_db: float
    p_cov: float
    n_points: int


@dataclass(frozen=True)
class ZoneComponent:
    cell_count: int
    area_km2: float
    bbox: tuple[float, float, float, float]  # x_min, y_min, x_max, y_max


@dataclass(frozen=True)
class OutageZones:
    components: tuple[ZoneComponent, ...]
    max_area_km2: float

    @property
    def total_area_km2(self) -> float:
        return sum(c.area_km2 for c in self.components)


def coverage_probability(field: SinrField, threshold_db: float) -> CoverageReport:
    """Fraction of evaluable points with SINR strictly above the threshold."""
    n_points = int(np.count_nonzero(field.evaluable))
    if n_points == 0:
        raise ValueError("field has no evaluable points")
    covered = int(np.count_nonzero(field.sinr_db[field.evaluable] > threshold_db))
    return CoverageReport(
        height_agl=field.height_agl,
        load=field.load,
        operator_ids=field.operator_ids,
        threshold_db=threshold_db,
        p_cov=covered / n_points,
        n_points=n_points,
    )


def sinr_cdf(field: SinrField) -> list[tuple[float, float]]:
    """Empirical CDF over evaluable points: (value, P(X <= value)) pairs.

    Values are unique and ascending; the CDF is the right-continuous
    step through these points.
    """
    values = field.sinr_db[field.evaluable]
    if values.size == 0:
        raise ValueError("field has no evaluable points")
    sorted_vals = np.sort(values)
    uniq, counts = np.unique(sorted_vals, return_counts=True)
    cum = np.cumsum(counts) / values.size
    return [(float(v), float(f)) for v, f in zip(uniq, cum)]


def max_outage_zone(field: SinrField, threshold_db: float) -> OutageZones:
    """Connected outage regions and the area of the largest one."""
    if int(np.count_nonzero(field.evaluable)) == 0:
        raise ValueError("field has no evaluable points")
    outage = field.evaluable & (field.sinr_db <= threshold_db)
    labels, n = ndimage.label(outage, structure=_FOUR_CONN)
    cell_area_km2 = (field.resolution * field.resolution) / 1.0e6
    components = []
    if n:
        counts = np.bincount(labels.ravel())[1:]
        slices = ndimage.find_objects(labels)
        for lab in range(1, n + 1):
            rows, cols = slices[lab - 1]
            bbox = (
                field.origin_x + cols.start * field.resolution,
                field.origin_y + rows.start * field.resolution,
                field.origin_x + cols.stop * field.resolution,
                field.origin_y + rows.stop * field.resolution,
            )
            cells = int(counts[lab - 1])
            components.append(
                ZoneComponent(cell_count=cells, area_km2=cells * cell_area_km2, bbox=bbox)
            )
        components.sort(key=lambda z: (-z.cell_count, z.bbox))
    max_area = components[0].area_km2 if components else 0.0
    return OutageZones(components=tuple(components), max_area_km2=max_area)


@dataclass(frozen=True)
class AssignmentMap:
    """Per-pixel serving-sector labels for a single operator."""

    operator_id: str
    height_agl: float
    origin_x: float
    origin_y: float
    resolution: float
    sector_ids: tuple[str, ...]
    labels: np.ndarray  # (rows, cols) int32, -1 where not evaluable / no signal

    def point_xy(self, row: int, col: int) -> tuple[float, float]:
        return (
            self.origin_x + (col + 0.5) * self.resolution,
            self.origin_y + (row + 0.5) * self.resolution,
        )


def assignment_map(field: SinrField) -> AssignmentMap:
    """Serving-sector label grid; defined per single operator only."""
    if len(field.operator_ids) != 1:
        raise ValueError(
            f"assignment maps are per-operator; field covers {field.operator_ids}"
        )
    return AssignmentMap(
        operator_id=field.operator_ids[0],
        height_agl=field.height_agl,
        origin_x=field.origin_x,
        origin_y=field.origin_y,
        resolution=field.resolution,
        sector_ids=field.sector_ids,
        labels=field.serving.copy(),
    )


# -- CSV serialization --------------------------------------------------------


def coverage_csv(rows: list[tuple[CoverageReport, OutageZones]]) -> str:
    buf = io.StringIO()
    buf.write("height_agl,load,op_set,threshold_db,p_cov,out_max_km2,n_points\n")
    for report, zones in rows:
        label = "+".join(report.operator_ids)
        buf.write(
            f"{report.height_agl:.3f},{report.load:.3f},{label},"
            f"{format_db(report.threshold_db)},{report.p_cov:.6f},"
            f"{zones.max_area_km2:.6f},{report.n_points}\n"
        )
    return buf.getvalue()


def cdf_csv(entries: list[tuple[SinrField, list[tuple[float, float]]]]) -> str:
    buf = io.StringIO()
    buf.write("op_set,height_agl,load,sinr_db,cum_frac\n")
    for field, pairs in entries:
        label = field.op_set_label
        for value, frac in pairs:
            buf.write(
                f"{label},{field.height_agl:.3f},{field.load:.3f},"
                f"{format_db(value)},{frac:.6f}\n"
            )
    return buf.getvalue()


def assignment_csv(amap: AssignmentMap) -> str:
    buf = io.StringIO()
    buf.write("x,y,sector_id\n")
    rows, cols = amap.labels.shape
    for r in range(rows):
        for c in range(cols):
            idx = int(amap.labels[r, c])
            if idx < 0:
                continue
            x, y = amap.point_xy(r, c)
            buf.write(f"{x:.3f},{y:.3f},{amap.sector_ids[idx]}\n")
    return buf.getvalue()


__all__ = [
    "AssignmentMap",
    "CoverageReport",
    "OutageZones",
    "ZoneComponent",
    "assignment_csv",
    "assignment_map",
    "cdf_csv",
    "coverage_csv",
    "coverage_probability",
    "max_outage_zone",
    "sinr_cdf",
]
