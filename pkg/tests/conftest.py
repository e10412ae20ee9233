import logging

import numpy as np
import pytest

from socialfabric.mesh import PlateMesh, assign_materials


@pytest.fixture
def small_mesh():
    """4x4 unit-square mesh with the baseline material."""
    return assign_materials(PlateMesh(4, 4, 0.25, 0.25), (0.01, 1.0e9, 0.3))


@pytest.fixture(autouse=True)
def _quiet_logs(caplog):
    caplog.set_level(logging.WARNING)


def rel(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.abs(a - b).max() / np.abs(b).max())


@pytest.fixture
def scenario_dir(tmp_path):
    """A small, fast scenario: two rasters, a handful of events, one configured load."""
    from datetime import date

    import yaml

    from socialfabric.events import ConflictEvent
    from socialfabric.io import write_events_csv, write_geotiff
    from socialfabric.types import GeoPoint

    lon = np.linspace(7.0, 8.5, 12)[None, :] * np.ones((10, 1))
    write_geotiff(tmp_path / "gdp.tif", (lon - 7.0) / 1.5, GeoPoint(7.0, 10.0), (0.125, 0.125))
    write_geotiff(tmp_path / "density.tif", np.full((10, 12), 0.4), GeoPoint(7.0, 10.0), (0.125, 0.125))
    write_events_csv(tmp_path / "events.csv", [
        ConflictEvent(date(2018, 12, 1), "Battles", "Armed clash", 3, 0, GeoPoint(7.6, 9.0), 1),
        ConflictEvent(date(2018, 11, 1), "Violence against civilians", "Attack", 1, 1, GeoPoint(8.0, 9.4), 1),
        ConflictEvent(date(2018, 11, 1), "Protests", "Peaceful protest", 0, 0, GeoPoint(8.0, 9.4), 2),
    ])
    unit = {"x_min": 0, "x_mid": 0, "x_max": 1}
    raw = {
        "name": "small",
        "domain": {"bbox": [[7.0, 8.75], [8.5, 10.0]]},
        "mesh": {"resolution_m": 25000, "buffer_m": 300000},
        "fabric": {
            "baselines": {"thickness": 2000, "youngs_modulus": 5e9, "poissons_ratio": 0.3},
            "indicators": [
                {"name": "gdp", "raster": "gdp.tif", "role": "resilience", "normalization": unit,
                 "response": {"kind": "linear", "m": 1.0}, "weight": 1.0, "target": "youngs_modulus"},
                {"name": "density", "raster": "density.tif", "role": "vulnerability", "normalization": unit,
                 "response": {"kind": "linear", "m": 2.0}, "weight": 1.0, "target": "poissons_ratio"},
            ],
            "combinations": {"youngs_modulus": {"p_base": 5e9}},
        },
        "events": {"csv": "events.csv", "analysis_date": "2018-12-31", "democracy_index": 0.4},
        "loads": [{"lon": 7.75, "lat": 9.4, "magnitude": 1e9}],
        "output": {"directory": "out"},
    }
    (tmp_path / "scenario.yaml").write_text(yaml.safe_dump(raw))
    return tmp_path


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
