"""Digital surface model and geometric line-of-sight queries.

The surface raster stores terrain-plus-building heights on a regular grid
in a local metric frame. The vertical datum is bare ground level, so a
point flying at z metres is z metres above ground wherever the surface
itself is at 0; building cells carry their rooftop height.

Rasters are immutable after construction and all queries are pure, so
they can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import los_clear


class GridParseError(ValueError):
    """Raised when an ASCII grid document cannot be parsed."""


@dataclass(frozen=True)
class GeoPoint:
    """A 3D point in the local metric frame (x east, y north, z up)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"GeoPoint coordinates must be finite, got {(self.x, self.y, self.z)}")


@dataclass(frozen=True)
class DsmRaster:
    """Gridded surface elevations with lower-left origin.

    ``elevations`` has shape (nrows, ncols) with row 0 the southernmost
    row, so cell (col, row) covers the square
    origin + [col, col+1) x [row, row+1) * resolution.
    """

    origin_x: float
    origin_y: float
    resolution: float
    ncols: int
    nrows: int
    elevations: np.ndarray = field(repr=False)
    nodata: float = -9999.0

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")
        if self.ncols < 1 or self.nrows < 1:
            raise ValueError("raster must have at least one cell")
        elev = np.ascontiguousarray(np.asarray(self.elevations, dtype=np.float64))
        if elev.shape != (self.nrows, self.ncols):
            raise ValueError(
                f"elevation grid shape {elev.shape} does not match (nrows, ncols)="
                f"{(self.nrows, self.ncols)}"
            )
        valid = elev[elev != self.nodata]
        if valid.size and not np.all(np.isfinite(valid)):
            raise ValueError("non-nodata elevations must be finite")
        elev.setflags(write=False)
        object.__setattr__(self, "elevations", elev)

    # -- geometry helpers ---------------------------------------------------

    @property
    def width(self) -> float:
        return self.ncols * self.resolution

    @property
    def height(self) -> float:
        return self.nrows * self.resolution

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max); membership is half-open at the max edge."""
        return (
            self.origin_x,
            self.origin_y,
            self.origin_x + self.width,
            self.origin_y + self.height,
        )

    def contains(self, x: float, y: float) -> bool:
        x_min, y_min, x_max, y_max = self.bounds
        return x_min <= x < x_max and y_min <= y < y_max

    def cell_index(self, x: float, y: float) -> tuple[int, int]:
        """(col, row) of the cell containing (x, y).

        A coordinate exactly on a shared cell edge belongs to the
        higher-index cell.
        """
        if not self.contains(x, y):
            raise ValueError(f"point ({x}, {y}) outside raster bounds {self.bounds}")
        col = int(math.floor((x - self.origin_x) / self.resolution))
        row = int(math.floor((y - self.origin_y) / self.resolution))
        # guard against float round-off at the extreme edge
        col = min(col, self.ncols - 1)
        row = min(row, self.nrows - 1)
        return col, row


def load_ascii_grid(document: str) -> DsmRaster:
    """Parse an ESRI ASCII grid document.

    Header keys: ncols, nrows, xllcorner, yllcorner, cellsize,
    NODATA_value (optional); data rows follow, northernmost row first.
    """
    lines = document.splitlines()
    header: dict[str, float] = {}
    header_keys = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"}
    idx = 0
    while idx < len(lines):
        line = lines[idx].strip()
        if not line:
            idx += 1
            continue
        parts = line.split()
        key = parts[0].lower()
        if key not in header_keys:
            break
        if len(parts) != 2:
            raise GridParseError(f"line {idx + 1}: malformed header line {line!r}")
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise GridParseError(f"line {idx + 1}: non-numeric header value {parts[1]!r}") from None
        idx += 1

    for req in ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize"):
        if req not in header:
            raise GridParseError(f"line {idx + 1}: missing header key {req!r}")
    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    if ncols != header["ncols"] or nrows != header["nrows"] or ncols < 1 or nrows < 1:
        raise GridParseError("line 1: ncols/nrows must be positive integers")
    cellsize = header["cellsize"]
    if cellsize <= 0:
        raise GridParseError("line 1: cellsize must be > 0")
    nodata = header.get("nodata_value", -9999.0)

    rows: list[list[float]] = []
    for line_no in range(idx, len(lines)):
        line = lines[line_no].strip()
        if not line:
            continue
        values = []
        for tok in line.split():
            try:
                values.append(float(tok))
            except ValueError:
                raise GridParseError(f"line {line_no + 1}: non-numeric cell value {tok!r}") from None
        rows.append(values)
    if len(rows) != nrows:
        raise GridParseError(f"line {len(lines)}: expected {nrows} data rows, found {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != ncols:
            raise GridParseError(f"line {idx + i + 1}: expected {ncols} values, found {len(row)}")

    # file stores the north row first; store south-up
    elev = np.asarray(rows, dtype=np.float64)[::-1].copy()
    return DsmRaster(
        origin_x=header["xllcorner"],
        origin_y=header["yllcorner"],
        resolution=cellsize,
        ncols=ncols,
        nrows=nrows,
        elevations=elev,
        nodata=nodata,
    )


def save_ascii_grid(raster: DsmRaster) -> str:
    """Serialize a raster back to ESRI ASCII grid text (lossless round trip)."""
    out = [
        f"ncols {raster.ncols}",
        f"nrows {raster.nrows}",
        f"xllcorner {raster.origin_x!r}",
        f"yllcorner {raster.origin_y!r}",
        f"cellsize {raster.resolution!r}",
        f"NODATA_value {raster.nodata!r}",
    ]
    for row in raster.elevations[::-1]:
        out.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(out) + "\n"


def elevation_at(raster: DsmRaster, x: float, y: float) -> float:
    """Surface elevation of the cell containing (x, y); nearest-cell, no interpolation."""
    col, row = raster.cell_index(x, y)
    return float(raster.elevations[row, col])


def has_los(raster: DsmRaster, a: GeoPoint, b: GeoPoint) -> bool:
    """True iff the 3D segment a-b clears every surface cell it crosses.

    The cells containing the endpoints are excluded from the blockage
    test (a rooftop antenna does not block itself). A segment grazing a
    rooftop exactly counts as blocked. Symmetric in (a, b).
    """
    for p in (a, b):
        if not raster.contains(p.x, p.y):
            raise ValueError(f"point ({p.x}, {p.y}) outside raster bounds {raster.bounds}")
    return bool(
        los_clear(
            raster.elevations,
            raster.origin_x,
            raster.origin_y,
            raster.resolution,
            a.x,
            a.y,
            a.z,
            b.x,
            b.y,
            b.z,
        )
    )


def gen_synthetic_city(
    extent: float | tuple[float, float],
    resolution: float,
    building_density: float,
    height_range: float,
    seed: int,
) -> DsmRaster:
    """Generate a flat city with rectangular buildings at sampled heights.

    ``extent`` is the side length in metres (or an (x, y) pair),
    ``building_density`` the target fraction of raised cells, and
    ``height_range`` the maximum building height. Deterministic per seed.
    """
    if not 0.0 <= building_density <= 1.0:
        raise ValueError(f"building_density must be in [0, 1], got {building_density}")
    if height_range < 0:
        raise ValueError(f"height_range must be non-negative, got {height_range}")
    if resolution <= 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    if isinstance(extent, (int, float)):
        extent = (float(extent), float(extent))
    ncols = max(1, int(round(extent[0] / resolution)))
    nrows = max(1, int(round(extent[1] / resolution)))

    elev = np.zeros((nrows, ncols), dtype=np.float64)
    rng = np.random.default_rng(seed)
    target = building_density * ncols * nrows
    raised = 0
    # footprint sides roughly 10..30 m regardless of resolution
    max_side = max(1, int(round(30.0 / resolution)))
    min_side = max(1, int(round(10.0 / resolution)))
    max_iter = 20 * ncols * nrows
    it = 0
    while raised < target and it < max_iter:
        it += 1
        w = int(rng.integers(min_side, max_side + 1))
        h = int(rng.integers(min_side, max_side + 1))
        c0 = int(rng.integers(0, max(1, ncols - w + 1)))
        r0 = int(rng.integers(0, max(1, nrows - h + 1)))
        height = float(rng.uniform(0.25, 1.0)) * height_range
        block = elev[r0 : r0 + h, c0 : c0 + w]
        raised += int(np.count_nonzero(block == 0.0))
        np.maximum(block, height, out=block)

    return DsmRaster(
        origin_x=0.0,
        origin_y=0.0,
        resolution=resolution,
        ncols=ncols,
        nrows=nrows,
        elevations=elev,
    )
