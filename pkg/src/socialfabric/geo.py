"""Planar frame, analysis rectangle and raster resampling onto the mesh."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import GeoPoint, ProjectedPoint

METRES_PER_DEGREE = 111_320.0


def degrees_to_metres(deg: float) -> float:
    """Isotropic conversion used for load radii given in degrees."""
    return deg * METRES_PER_DEGREE


def project(p: GeoPoint, ref: GeoPoint) -> ProjectedPoint:
    """Equirectangular projection about ``ref`` (metres east/north)."""
    x, y = project_arrays(p[0], p[1], ref)
    return ProjectedPoint(float(x), float(y))


def unproject(q: ProjectedPoint, ref: GeoPoint) -> GeoPoint:
    lon, lat = unproject_arrays(q[0], q[1], ref)
    return GeoPoint(float(lon), float(lat))


def project_arrays(lon, lat, ref: GeoPoint):
    k = METRES_PER_DEGREE * np.cos(np.radians(ref.lat))
    return (np.asarray(lon, dtype=float) - ref.lon) * k, (np.asarray(lat, dtype=float) - ref.lat) * METRES_PER_DEGREE


def unproject_arrays(x, y, ref: GeoPoint):
    k = METRES_PER_DEGREE * np.cos(np.radians(ref.lat))
    return ref.lon + np.asarray(x, dtype=float) / k, ref.lat + np.asarray(y, dtype=float) / METRES_PER_DEGREE


@dataclass(frozen=True)
class DomainRect:
    """Buffered analysis rectangle in the frame centred on the bbox centre.

    ``origin`` is the lower-left corner of the outer (buffered) rectangle.
    """

    origin: ProjectedPoint
    width_m: float
    height_m: float
    ref_lat: float
    buffer_m: float
    ref_lon: float = 0.0

    def __post_init__(self):
        if not (self.width_m > 0 and self.height_m > 0):
            raise ValueError("domain width and height must be positive")
        if self.buffer_m < 0:
            raise ValueError("buffer must be >= 0")
        if self.width_m - 2 * self.buffer_m <= 0 or self.height_m - 2 * self.buffer_m <= 0:
            raise ValueError("buffer leaves no interior")

    @property
    def ref(self) -> GeoPoint:
        return GeoPoint(self.ref_lon, self.ref_lat)

    @property
    def interior_width_m(self) -> float:
        return self.width_m - 2 * self.buffer_m

    @property
    def interior_height_m(self) -> float:
        return self.height_m - 2 * self.buffer_m

    def contains(self, q: ProjectedPoint) -> bool:
        return (
            self.origin.x <= q[0] <= self.origin.x + self.width_m
            and self.origin.y <= q[1] <= self.origin.y + self.height_m
        )

    def geo_extent(self, interior: bool = False) -> tuple[float, float, float, float]:
        """``(lon_min, lat_min, lon_max, lat_max)`` of the outer or interior rectangle."""
        pad = self.buffer_m if interior else 0.0
        x0, y0 = self.origin.x + pad, self.origin.y + pad
        x1, y1 = self.origin.x + self.width_m - pad, self.origin.y + self.height_m - pad
        lon, lat = unproject_arrays([x0, x1], [y0, y1], self.ref)
        return float(lon[0]), float(lat[0]), float(lon[1]), float(lat[1])


def build_domain(bbox: tuple[GeoPoint, GeoPoint], buffer_m: float) -> DomainRect:
    """Project a lon/lat bbox about its centre and pad it by ``buffer_m``."""
    lo, hi = (GeoPoint(*p).validate() for p in bbox)
    if not (lo.lon < hi.lon and lo.lat < hi.lat):
        raise ValueError(f"degenerate bbox {tuple(lo)} .. {tuple(hi)}: min must be < max in both axes")
    if buffer_m < 0:
        raise ValueError("buffer must be >= 0")
    ref = GeoPoint(0.5 * (lo.lon + hi.lon), 0.5 * (lo.lat + hi.lat))
    x0, y0 = project(lo, ref)
    x1, y1 = project(hi, ref)
    return DomainRect(
        origin=ProjectedPoint(x0 - buffer_m, y0 - buffer_m),
        width_m=(x1 - x0) + 2 * buffer_m,
        height_m=(y1 - y0) + 2 * buffer_m,
        ref_lat=ref.lat,
        ref_lon=ref.lon,
        buffer_m=float(buffer_m),
    )


@dataclass(frozen=True)
class RasterLayer:
    """North-up raster: ``values[row, col]`` with row 0 at the top.

    ``origin`` is the top-left corner; ``cell_size`` is ``(dlon, dlat)`` in
    degrees, both positive.
    """

    values: np.ndarray
    origin: GeoPoint
    cell_size: tuple[float, float]
    valid: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or min(v.shape) < 1:
            raise ValueError(f"raster must be a 2D grid of at least 1x1, got shape {v.shape}")
        mask = np.isfinite(v) if self.valid is None else (np.asarray(self.valid, dtype=bool) & np.isfinite(v))
        v = np.where(mask, v, np.nan)
        if self.cell_size[0] <= 0 or self.cell_size[1] <= 0:
            raise ValueError("raster cell sizes must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "valid", mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def extent(self) -> tuple[float, float, float, float]:
        """``(lon_min, lat_min, lon_max, lat_max)``."""
        nrow, ncol = self.shape
        lon0, lat1 = self.origin
        return lon0, lat1 - nrow * self.cell_size[1], lon0 + ncol * self.cell_size[0], lat1

    @classmethod
    def constant(cls, value: float, extent: tuple[float, float, float, float], shape=(4, 4)) -> "RasterLayer":
        lon0, lat0, lon1, lat1 = extent
        ny, nx = shape
        return cls(np.full(shape, float(value)), GeoPoint(lon0, lat1), ((lon1 - lon0) / nx, (lat1 - lat0) / ny))


def _overlaps(a, b) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def sample_raster(layer: RasterLayer, lon, lat) -> np.ndarray:
    """Bilinear samples at lon/lat points; NaN where no valid data is near.

    Where any of the four surrounding cell centres is invalid or off-grid the
    nearest valid cell within one cell of the point is used instead.
    """
    lon = np.asarray(lon, dtype=float)
    lat = np.asarray(lat, dtype=float)
    nrow, ncol = layer.shape
    col = (lon - layer.origin.lon) / layer.cell_size[0] - 0.5
    row = (layer.origin.lat - lat) / layer.cell_size[1] - 0.5

    c0 = np.floor(col).astype(int)
    r0 = np.floor(row).astype(int)
    fc = col - c0
    fr = row - r0
    vals = layer.values
    out = np.zeros(lon.shape)
    ok = np.ones(lon.shape, dtype=bool)
    for dr, dc, wt in ((0, 0, (1 - fr) * (1 - fc)), (0, 1, (1 - fr) * fc), (1, 0, fr * (1 - fc)), (1, 1, fr * fc)):
        rr, cc = r0 + dr, c0 + dc
        inside = (rr >= 0) & (rr < nrow) & (cc >= 0) & (cc < ncol)
        v = np.full(lon.shape, np.nan)
        v[inside] = vals[rr[inside], cc[inside]]
        # a neighbour with zero weight may be missing without harm
        needed = wt > 0
        ok &= ~needed | np.isfinite(v)
        out += np.where(needed, np.nan_to_num(v) * wt, 0.0)
    out = np.where(ok, out, np.nan)

    todo = np.flatnonzero(~ok.ravel())
    if todo.size:
        flat = out.ravel()
        col_f, row_f = col.ravel(), row.ravel()
        for k in todo:
            flat[k] = _nearest_valid(layer, row_f[k], col_f[k])
        out = flat.reshape(lon.shape)
    return out


def _nearest_valid(layer: RasterLayer, row: float, col: float) -> float:
    nrow, ncol = layer.shape
    rc, cc = int(np.rint(row)), int(np.rint(col))
    best, best_d = np.nan, np.inf
    for r in range(max(rc - 2, 0), min(rc + 3, nrow)):
        for c in range(max(cc - 2, 0), min(cc + 3, ncol)):
            if not layer.valid[r, c]:
                continue
            # Chebyshev distance from the point to the cell footprint, in cells
            d = max(abs(row - r) - 0.5, abs(col - c) - 0.5, 0.0)
            if d <= 1.0 and np.hypot(row - r, col - c) < best_d:
                best, best_d = layer.values[r, c], np.hypot(row - r, col - c)
    return best


def resample_to_mesh(layer: RasterLayer, domain: DomainRect, mesh) -> tuple[np.ndarray, np.ndarray]:
    """Sample the raster at every element centre.

    Returns ``(values, missing)`` shaped like the element grid ``(ny, nx)``.
    """
    interior = domain.geo_extent(interior=True)
    if not _overlaps(layer.extent(), interior):
        raise ValueError(
            "raster extent (lon %.4f..%.4f, lat %.4f..%.4f) does not overlap domain interior "
            "(lon %.4f..%.4f, lat %.4f..%.4f)"
            % (layer.extent()[0], layer.extent()[2], layer.extent()[1], layer.extent()[3],
               interior[0], interior[2], interior[1], interior[3])
        )
    centres = mesh.element_centres
    lon, lat = unproject_arrays(centres[..., 0], centres[..., 1], domain.ref)
    values = sample_raster(layer, lon, lat)
    missing = ~np.isfinite(values)
    return values, missing
