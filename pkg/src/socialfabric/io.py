"""Event tables, GeoTIFF rasters and the scenario output bundle."""

from __future__ import annotations

import csv
import json
import logging
import math
import tempfile
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np
import tifffile

from .events import ConflictEvent
from .geo import METRES_PER_DEGREE, RasterLayer, unproject_arrays
from .types import GeoPoint

logger = logging.getLogger(__name__)

EVENT_COLUMNS = (
    "event_date", "event_type", "sub_event_type", "fatalities",
    "civilian_targeting", "latitude", "longitude", "geo_precision",
)

# GeoTIFF tag ids
MODEL_PIXEL_SCALE = 33550
MODEL_TIEPOINT = 33922
GEO_KEY_DIRECTORY = 34735
GDAL_NODATA = 42113
RASTER_PIXEL_IS_AREA = 1
RASTER_PIXEL_IS_POINT = 2


class InputError(ValueError):
    pass


# --------------------------------------------------------------------------- #
# events
# --------------------------------------------------------------------------- #


def _civilian_flag(text: str) -> int:
    t = text.strip()
    if t in ("", "0"):
        return 0
    return 1


def read_events_csv(path) -> list[ConflictEvent]:
    """Parse an ACLED-style event table. Extra columns are ignored."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError(f"{path}: missing header row; expected columns {list(EVENT_COLUMNS)}")
        missing = [c for c in EVENT_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise InputError(f"{path}: missing column(s) {missing}; required schema: {list(EVENT_COLUMNS)}")
        events = []
        for row in reader:
            line = reader.line_num
            try:
                events.append(ConflictEvent(
                    event_date=date.fromisoformat(row["event_date"].strip()),
                    event_type=row["event_type"].strip(),
                    sub_event_type=row["sub_event_type"].strip(),
                    fatalities=int(row["fatalities"].strip() or 0),
                    civilian_targeting=_civilian_flag(row["civilian_targeting"] or ""),
                    location=GeoPoint(float(row["longitude"]), float(row["latitude"])),
                    geo_precision=int(row["geo_precision"]),
                ))
            except (ValueError, TypeError, AttributeError) as exc:
                raise InputError(f"{path}: row {line}: {exc}") from None
    return events


def write_events_csv(path, events) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_COLUMNS)
        for e in events:
            w.writerow([
                e.event_date.isoformat(), e.event_type, e.sub_event_type, e.fatalities,
                "Civilian targeting" if e.civilian_targeting else "",
                repr(e.location.lat), repr(e.location.lon), e.geo_precision,
            ])


# --------------------------------------------------------------------------- #
# GeoTIFF
# --------------------------------------------------------------------------- #


def _geokeys(pixel_is: int) -> tuple[int, ...]:
    # header, GTModelType=geographic, GTRasterType, GeographicType=WGS84
    return (1, 1, 0, 3, 1024, 0, 1, 2, 1025, 0, 1, pixel_is, 2048, 0, 1, 4326)


def write_geotiff(path, values: np.ndarray, top_left: GeoPoint, cell_size: tuple[float, float], *,
                  pixel_is_point: bool = False, nodata: float = float("nan"), description: str = "") -> Path:
    """Single-band float64 north-up GeoTIFF.

    ``values[0]`` is the northern row. For point rasters ``top_left`` is the
    first sample's location; otherwise it is the outer corner of the first cell.
    """
    path = Path(path)
    data = np.asarray(values, dtype=np.float64)
    dlon, dlat = cell_size
    nodata_text = "nan" if math.isnan(nodata) else repr(float(nodata))
    tags = [
        (MODEL_PIXEL_SCALE, "d", 3, (dlon, dlat, 0.0), True),
        (MODEL_TIEPOINT, "d", 6, (0.0, 0.0, 0.0, top_left.lon, top_left.lat, 0.0), True),
        (GEO_KEY_DIRECTORY, "H", 16, _geokeys(RASTER_PIXEL_IS_POINT if pixel_is_point else RASTER_PIXEL_IS_AREA), True),
        (GDAL_NODATA, "s", 0, nodata_text, True),
    ]
    tifffile.imwrite(path, data, photometric="minisblack", extratags=tags, description=description or None,
                     metadata=None)
    return path


def read_geotiff(path) -> RasterLayer:
    path = Path(path)
    with tifffile.TiffFile(path) as tif:
        page = tif.pages[0]
        data = page.asarray().astype(float)
        if data.ndim != 2:
            raise InputError(f"{path}: expected a single-band raster, got shape {data.shape}")
        tags = page.tags
        try:
            scale = tags[MODEL_PIXEL_SCALE].value
            tie = tags[MODEL_TIEPOINT].value
        except KeyError:
            raise InputError(f"{path}: not georeferenced (missing ModelPixelScale/ModelTiepoint)") from None
        pixel_is = RASTER_PIXEL_IS_AREA
        if GEO_KEY_DIRECTORY in tags:
            keys = tags[GEO_KEY_DIRECTORY].value
            for k in range(4, len(keys), 4):
                if keys[k] == 1025:
                    pixel_is = keys[k + 3]
        nodata = None
        if GDAL_NODATA in tags:
            text = str(tags[GDAL_NODATA].value).strip().rstrip("\x00")
            nodata = float(text) if text else None
    dlon, dlat = float(scale[0]), float(scale[1])
    col0, row0, lon0, lat0 = float(tie[0]), float(tie[1]), float(tie[3]), float(tie[4])
    lon0 -= col0 * dlon
    lat0 += row0 * dlat
    if pixel_is == RASTER_PIXEL_IS_POINT:
        lon0 -= 0.5 * dlon
        lat0 += 0.5 * dlat
    valid = np.isfinite(data)
    if nodata is not None and not math.isnan(nodata):
        valid &= data != nodata
    return RasterLayer(data, GeoPoint(lon0, lat0), (dlon, dlat), valid)


def write_csv_grid(path, values: np.ndarray, header: str = "") -> Path:
    path = Path(path)
    np.savetxt(path, np.asarray(values, dtype=float), delimiter=",", fmt="%.17g", header=header, comments="# ")
    return path


def read_csv_grid(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)


# --------------------------------------------------------------------------- #
# output bundle
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class OutputBundle:
    directory: Path
    files: dict

    def __getitem__(self, key: str) -> Path:
        return self.files[key]


def ensure_writable(directory) -> Path:
    """Create ``directory`` and prove it accepts files before anything is written."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=directory, prefix=".probe-"):
            pass
    except OSError as exc:
        raise OSError(f"output directory {directory} is not writable ({exc.strerror or exc})") from None
    return directory


def grid_georef(result) -> tuple[GeoPoint, tuple[float, float]]:
    """North-west corner node in lon/lat and the grid spacing in degrees.

    Node rasters tie their first sample to that node (pixel-is-point); element
    rasters use it as the outer corner of their first cell (pixel-is-area).
    """
    mesh, domain = result.mesh, result.domain
    lon, lat = unproject_arrays(mesh.origin.x, mesh.origin.y + mesh.height, domain.ref)
    kx = METRES_PER_DEGREE * math.cos(math.radians(domain.ref_lat))
    return GeoPoint(float(lon), float(lat)), (mesh.dx / kx, mesh.dy / METRES_PER_DEGREE)


def _stamp(result, kind: str) -> str:
    return json.dumps({"config_hash": result.config_hash, "field": kind}, sort_keys=True)


def metrics_document(result) -> dict:
    return {
        "config_hash": result.config_hash,
        "metrics": result.metrics.as_dict(),
        "provenance": result.provenance,
        "grid": {
            "node_shape": list(result.field.shape),
            "element_shape": [result.mesh.ny, result.mesh.nx],
            "row_order": "north_to_south",
        },
    }


def write_outputs(result, cfg, directory=None) -> OutputBundle:
    """Write every requested artifact; fails before writing if the directory is unusable."""
    from . import plots

    out = ensure_writable(directory or cfg.output.directory)
    formats = set(cfg.output.formats)
    files: dict[str, Path] = {}
    w_north = np.flipud(result.field.w)
    vm_north = np.flipud(result.stress.von_mises)
    h = result.config_hash
    top_left, cell = grid_georef(result)

    if "geotiff" in formats:
        files["displacement_tif"] = write_geotiff(
            out / "displacement.tif", w_north, top_left, cell, pixel_is_point=True,
            description=_stamp(result, "displacement_m"),
        )
        files["von_mises_tif"] = write_geotiff(
            out / "von_mises.tif", vm_north, top_left, cell, description=_stamp(result, "von_mises_pa"),
        )
    if "csv" in formats:
        files["displacement_csv"] = write_csv_grid(
            out / "displacement.csv", w_north, f"config_hash={h} field=displacement_m rows=north_to_south")
        files["von_mises_csv"] = write_csv_grid(
            out / "von_mises.csv", vm_north, f"config_hash={h} field=von_mises_pa rows=north_to_south")
    if "json" in formats:
        path = out / "metrics.json"
        path.write_text(json.dumps(metrics_document(result), indent=2, sort_keys=True, default=str))
        files["metrics_json"] = path
    if "png" in formats:
        files["displacement_png"] = plots.contour_plot(
            result, "displacement", out / "displacement.png", boundary=cfg.output.boundary_file)
        files["von_mises_png"] = plots.contour_plot(
            result, "von_mises", out / "von_mises.png", boundary=cfg.output.boundary_file)
    return OutputBundle(out, files)


def write_material_rasters(result_like, directory) -> dict[str, Path]:
    """Thickness, modulus and Poisson rasters on the element grid."""
    out = ensure_writable(directory)
    top_left, cell = grid_georef(result_like)
    mat = result_like.materials
    files = {}
    for name, grid in (("thickness", mat.h), ("youngs_modulus", mat.E), ("poissons_ratio", mat.nu)):
        files[name] = write_geotiff(
            out / f"{name}.tif", np.flipud(grid), top_left, cell, description=_stamp(result_like, name),
        )
    return files


def load_result_dir(directory) -> tuple[np.ndarray, dict]:
    """Displacement grid and metrics document from a written bundle."""
    directory = Path(directory)
    meta_path = directory / "metrics.json"
    if not meta_path.exists():
        raise InputError(f"{directory}: no metrics.json (run with the json output format)")
    meta = json.loads(meta_path.read_text())
    if (directory / "displacement.csv").exists():
        w = read_csv_grid(directory / "displacement.csv")
    elif (directory / "displacement.tif").exists():
        w = read_geotiff(directory / "displacement.tif").values
    else:
        raise InputError(f"{directory}: no displacement.csv or displacement.tif")
    return w, meta
