"""Synthetic Nigeria-like demo scenario: indicator rasters, an event table and a config.

The data are invented. Event counts and fatality totals per sub-type follow
the 2018 ACLED summary for Nigeria so the event pipeline can be checked
against known numbers; locations, dates and the per-event split of
fatalities are drawn from a seeded generator.
"""

from __future__ import annotations

import json
from datetime import date, timedelta
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .defaults import (
    BATTLES,
    EXPLOSIONS,
    NIGERIA_BBOX,
    PROTESTS,
    RIOTS,
    VIOLENCE_AGAINST_CIVILIANS,
    default_indicators,
)
from .events import STRATEGIC, ConflictEvent
from .io import write_events_csv, write_geotiff
from .types import GeoPoint

SEED = 2018
ANALYSIS_DATE = date(2018, 12, 31)
RASTER_CELL_DEG = 0.25

# (event type, sub-event type) -> (count, fatalities) for exact-location, non-strategic events
EXACT_EVENTS = {
    (VIOLENCE_AGAINST_CIVILIANS, "Attack"): (303, 1023),
    (VIOLENCE_AGAINST_CIVILIANS, "Abduction/forced disappearance"): (24, 0),
    (VIOLENCE_AGAINST_CIVILIANS, "Sexual violence"): (6, 4),
    (BATTLES, "Armed clash"): (242, 1049),
    (BATTLES, "Government regains territory"): (20, 135),
    (BATTLES, "Non-state actor overtakes territory"): (8, 95),
    (PROTESTS, "Peaceful protest"): (375, 0),
    (PROTESTS, "Protest with intervention"): (26, 0),
    (PROTESTS, "Excessive force against protesters"): (3, 2),
    (EXPLOSIONS, "Remote explosive/landmine/IED"): (7, 5),
    (EXPLOSIONS, "Air/drone strike"): (20, 150),
    (EXPLOSIONS, "Suicide bomb"): (20, 166),
    (EXPLOSIONS, "Grenade"): (1, 0),
    (EXPLOSIONS, "Shelling/artillery/missile attack"): (1, 10),
    (RIOTS, "Violent demonstration"): (106, 71),
    (RIOTS, "Mob violence"): (92, 75),
}
TOTAL_EVENTS = 2050
PRECISION_COUNTS = {1: 1307, 2: 687, 3: 56}
STRATEGIC_TOTAL = 117

# Hotspots (lon, lat, spread in degrees, relative weight) per event type.
HOTSPOTS = {
    BATTLES: [(13.2, 11.9, 0.6, 5.0), (8.6, 9.6, 0.7, 1.0), (6.6, 12.3, 0.6, 1.0)],
    EXPLOSIONS: [(13.2, 11.9, 0.5, 6.0), (12.4, 11.2, 0.5, 1.0)],
    VIOLENCE_AGAINST_CIVILIANS: [(8.8, 9.3, 0.8, 3.0), (13.0, 11.8, 0.6, 2.0), (6.9, 12.1, 0.7, 2.0)],
    RIOTS: [(3.4, 6.5, 0.4, 2.0), (8.5, 12.0, 0.5, 1.0), (7.4, 9.1, 0.5, 1.0)],
    PROTESTS: [(3.4, 6.5, 0.4, 3.0), (7.4, 9.1, 0.4, 2.0), (7.0, 4.8, 0.4, 1.5), (8.5, 12.0, 0.5, 1.0)],
    STRATEGIC: [(7.4, 9.1, 1.5, 1.0)],
}

# Raster shapes: each indicator is a sum of gaussian bumps (lon, lat, sigma, amplitude) plus a north-south trend.
FIELD_RECIPES = {
    "cisi": ([(3.4, 6.5, 1.2, 0.7), (7.4, 9.1, 1.0, 0.5), (8.5, 12.0, 1.0, 0.4)], 0.15, -0.05),
    "spi_drought": ([(13.0, 12.5, 1.8, 0.6), (5.5, 13.0, 1.5, 0.4)], 0.05, 0.04),
    "spi_wetness": ([(6.5, 5.0, 1.5, 0.5), (9.5, 7.5, 1.2, 0.3)], 0.05, -0.02),
    "health_infrastructure": ([(3.4, 6.5, 1.0, 0.6), (7.4, 9.1, 0.8, 0.5), (7.0, 5.0, 1.2, 0.4)], 0.1, -0.03),
    "travel_time_healthcare": ([(12.5, 11.5, 1.8, 0.08), (10.5, 8.0, 1.5, 0.05)], 0.0, 0.002),
    "dependency_ratio": ([(11.0, 12.0, 2.5, 0.4)], 0.3, 0.03),
    "gdp": ([(3.4, 6.5, 1.0, 0.8), (7.0, 4.8, 1.0, 0.5), (7.4, 9.1, 0.8, 0.4)], 0.1, -0.02),
    "poverty": ([(11.5, 12.0, 2.5, 0.5)], 0.2, 0.05),
    "child_poverty": ([(11.0, 12.5, 2.2, 0.5)], 0.25, 0.04),
    "population_density": ([(3.4, 6.5, 0.5, 0.9), (8.5, 12.0, 0.6, 0.6), (7.4, 9.1, 0.5, 0.5), (7.0, 4.9, 0.7, 0.5)], 0.05, 0.0),
    "road_density": ([(3.4, 6.5, 1.2, 0.6), (7.4, 9.1, 1.5, 0.4), (8.5, 12.0, 1.2, 0.4)], 0.1, -0.01),
}

CONFIG_NAME = "nigeria_demo.yaml"
EVENTS_NAME = "events_2018.csv"
BOUNDARY_NAME = "outline.geojson"
RASTER_DIR = "rasters"

# A coarse invented outline, only for the map overlay.
OUTLINE = [
    (2.7, 6.4), (2.7, 9.0), (3.6, 10.3), (3.6, 11.7), (4.1, 13.5), (6.0, 13.7), (8.0, 13.0),
    (10.0, 13.3), (12.5, 13.1), (14.1, 13.1), (14.6, 11.6), (13.6, 10.0), (12.8, 8.5),
    (11.8, 7.0), (10.6, 6.9), (9.6, 5.6), (8.5, 4.6), (6.0, 4.3), (4.5, 6.3), (2.7, 6.4),
]


def _grid():
    (lon0, lat0), (lon1, lat1) = NIGERIA_BBOX
    ncol = int(np.ceil((lon1 - lon0) / RASTER_CELL_DEG))
    nrow = int(np.ceil((lat1 - lat0) / RASTER_CELL_DEG))
    lons = lon0 + (np.arange(ncol) + 0.5) * RASTER_CELL_DEG
    lats = lat1 - (np.arange(nrow) + 0.5) * RASTER_CELL_DEG
    return GeoPoint(lon0, lat1), *np.meshgrid(lons, lats)


def indicator_field(name: str, lon: np.ndarray, lat: np.ndarray) -> np.ndarray:
    """Synthetic indicator surface on [0, 1]."""
    bumps, floor, per_degree = FIELD_RECIPES[name]
    v = np.full(lon.shape, floor) + per_degree * (lat - 9.0)
    for x, y, s, amp in bumps:
        v += amp * np.exp(-((lon - x) ** 2 + (lat - y) ** 2) / (2 * s * s))
    return np.clip(v, 0.0, 1.0)


def _draw_location(rng, etype: str) -> GeoPoint:
    (lon0, lat0), (lon1, lat1) = NIGERIA_BBOX
    spots = HOTSPOTS.get(etype, HOTSPOTS[STRATEGIC])
    p = np.array([s[3] for s in spots])
    while True:
        x, y, s, _ = spots[rng.choice(len(spots), p=p / p.sum())]
        lon, lat = rng.normal(x, s), rng.normal(y, s)
        if lon0 + 0.05 < lon < lon1 - 0.05 and lat0 + 0.05 < lat < lat1 - 0.05:
            return GeoPoint(round(float(lon), 4), round(float(lat), 4))


def _split_fatalities(rng, total: int, count: int) -> list[int]:
    if total == 0:
        return [0] * count
    # skewed split: most events have few deaths, a handful many
    shares = rng.gamma(0.4, size=count)
    return [int(k) for k in rng.multinomial(total, shares / shares.sum())]


def _date(rng) -> date:
    return date(2018, 1, 1) + timedelta(days=int(rng.integers(0, 365)))


def demo_events(seed: int = SEED) -> list[ConflictEvent]:
    rng = np.random.default_rng(seed)
    events = []

    def add(etype, sub, fatalities, precision):
        events.append(ConflictEvent(
            event_date=_date(rng), event_type=etype, sub_event_type=sub, fatalities=fatalities,
            civilian_targeting=int(etype == VIOLENCE_AGAINST_CIVILIANS or sub == "Excessive force against protesters"),
            location=_draw_location(rng, etype), geo_precision=precision,
        ))

    for (etype, sub), (count, deaths) in EXACT_EVENTS.items():
        for k in _split_fatalities(rng, deaths, count):
            add(etype, sub, k, 1)

    exact_strategic = PRECISION_COUNTS[1] - len(events)
    for _ in range(exact_strategic):
        add(STRATEGIC, "Arrests", 0, 1)
    # remaining strategic developments and the other events carry imprecise locations
    imprecise = [2] * PRECISION_COUNTS[2] + [3] * PRECISION_COUNTS[3]
    rng.shuffle(imprecise)
    n_strategic_rest = STRATEGIC_TOTAL - exact_strategic
    pairs = list(EXACT_EVENTS)
    for i, precision in enumerate(imprecise):
        if i < n_strategic_rest:
            add(STRATEGIC, "Other", 0, precision)
        else:
            etype, sub = pairs[int(rng.integers(0, len(pairs)))]
            add(etype, sub, int(rng.poisson(1.0)), precision)
    order = rng.permutation(len(events))
    return [events[i] for i in order]


def demo_config(raster_paths: dict[str, str]) -> dict:
    return {
        "name": "nigeria-2018-synthetic",
        "domain": {"name": "Nigeria (synthetic)", "bbox": [list(p) for p in NIGERIA_BBOX]},
        "mesh": {"resolution_m": 10000.0, "buffer_m": 350000.0, "boundary_condition": "clamped_all"},
        "fabric": {
            "baselines": {"thickness": 2500.0, "youngs_modulus": 5.0e9, "poissons_ratio": 0.3},
            "preset": "reference",
            "rasters": raster_paths,
        },
        "events": {"csv": EVENTS_NAME, "analysis_date": ANALYSIS_DATE.isoformat(), "democracy_index": 0.4},
        "solver": {"tolerance": 1.0e-10},
        "output": {
            "directory": "output",
            "formats": ["geotiff", "csv", "json", "png"],
            "threshold_frac": 0.10,
            "boundary_file": BOUNDARY_NAME,
        },
    }


def write_demo(directory, seed: int = SEED) -> dict[str, Path]:
    """Write rasters, events, outline and config under ``directory``."""
    directory = Path(directory)
    (directory / RASTER_DIR).mkdir(parents=True, exist_ok=True)
    top_left, lon, lat = _grid()
    raster_paths = {}
    for spec in default_indicators():
        rel = f"{RASTER_DIR}/{spec.name}.tif"
        write_geotiff(directory / rel, indicator_field(spec.name, lon, lat), top_left,
                      (RASTER_CELL_DEG, RASTER_CELL_DEG), description=f"synthetic {spec.name}")
        raster_paths[spec.name] = rel
    write_events_csv(directory / EVENTS_NAME, demo_events(seed))
    outline = {"type": "Feature", "properties": {"name": "synthetic outline"},
               "geometry": {"type": "Polygon", "coordinates": [[list(p) for p in OUTLINE]]}}
    (directory / BOUNDARY_NAME).write_text(json.dumps(outline))
    cfg_path = directory / CONFIG_NAME
    cfg_path.write_text(yaml.safe_dump(demo_config(raster_paths), sort_keys=False))
    return {"config": cfg_path, "events": directory / EVENTS_NAME, "boundary": directory / BOUNDARY_NAME,
            "rasters": directory / RASTER_DIR}


def shipped_demo_dir() -> Path:
    """Location of the demo scenario installed with the package."""
    return Path(str(resources.files(__package__) / "data" / "demo"))


if __name__ == "__main__":
    print(write_demo(shipped_demo_dir())["config"])
