import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from socialfabric.defaults import NIGERIA_BBOX
from socialfabric.geo import (
    RasterLayer,
    build_domain,
    degrees_to_metres,
    project,
    resample_to_mesh,
    sample_raster,
    unproject,
)
from socialfabric.mesh import generate_mesh
from socialfabric.types import GeoPoint, ProjectedPoint

REF = GeoPoint(8.67, 9.06)


def test_project_reference_is_origin():
    assert project(REF, REF) == (0.0, 0.0)


def test_one_degree_offsets():
    x, _ = project(GeoPoint(REF.lon + 1, REF.lat), REF)
    _, y = project(GeoPoint(REF.lon, REF.lat + 1), REF)
    assert x == pytest.approx(109_932, abs=1.0)
    assert x == pytest.approx(111_320 * math.cos(math.radians(9.06)), rel=1e-15)
    assert y == pytest.approx(111_320.0, rel=1e-15)


def test_degree_radius_is_isotropic():
    assert degrees_to_metres(0.5) == 55_660.0


@given(st.floats(2.0, 15.0), st.floats(4.0, 14.0))
def test_projection_round_trip(lon, lat):
    back = unproject(project(GeoPoint(lon, lat), REF), REF)
    assert abs(back.lon - lon) < 1e-9 and abs(back.lat - lat) < 1e-9


def test_nigeria_domain_size():
    d = build_domain(NIGERIA_BBOX, 150_000)
    assert d.width_m == pytest.approx(1_620_000, rel=0.01)
    assert d.height_m == pytest.approx(1_370_000, rel=0.01)
    assert d.ref_lat == pytest.approx((4.270 + 13.892) / 2)


def test_zero_buffer_keeps_bbox():
    (lo0, la0), (lo1, la1) = NIGERIA_BBOX
    d = build_domain(NIGERIA_BBOX, 0.0)
    kx = 111_320 * math.cos(math.radians(d.ref_lat))
    assert d.width_m == pytest.approx((lo1 - lo0) * kx, rel=1e-12)
    assert d.height_m == pytest.approx((la1 - la0) * 111_320, rel=1e-12)


def test_larger_buffer_contains_smaller():
    a, b = build_domain(NIGERIA_BBOX, 150_000), build_domain(NIGERIA_BBOX, 350_000)
    assert b.width_m - a.width_m == pytest.approx(400_000)
    assert b.height_m - a.height_m == pytest.approx(400_000)
    assert b.interior_width_m == pytest.approx(a.interior_width_m)
    assert b.origin.x < a.origin.x and b.origin.y < a.origin.y


def test_degenerate_bbox_rejected():
    with pytest.raises(ValueError):
        build_domain(((3.0, 5.0), (3.0, 9.0)), 0.0)


def test_checkerboard_centre_is_mean():
    layer = RasterLayer(np.array([[1.0, 2.0], [3.0, 4.0]]), GeoPoint(0.0, 2.0), (1.0, 1.0))
    assert sample_raster(layer, np.array(1.0), np.array(1.0)) == pytest.approx(2.5)


def test_bilinear_exact_on_affine_field():
    lon0, lat_top, cell = 2.0, 14.0, 0.1
    rows, cols = 110, 140
    clon = lon0 + (np.arange(cols) + 0.5) * cell
    clat = lat_top - (np.arange(rows) + 0.5) * cell
    LON, LAT = np.meshgrid(clon, clat)
    layer = RasterLayer(3.0 * LON - 2.0 * LAT + 7.0, GeoPoint(lon0, lat_top), (cell, cell))
    lon = np.random.default_rng(1).uniform(3.0, 15.0, 200)
    lat = np.random.default_rng(2).uniform(4.0, 13.0, 200)
    np.testing.assert_allclose(sample_raster(layer, lon, lat), 3 * lon - 2 * lat + 7, rtol=0, atol=1e-10)


def test_masked_cell_uses_nearest_valid_within_one_cell():
    values = np.arange(16.0).reshape(4, 4)
    valid = np.ones((4, 4), bool)
    valid[1, 1] = False
    layer = RasterLayer(values, GeoPoint(0.0, 4.0), (1.0, 1.0), valid)
    # exactly at the masked cell centre: the nearest valid neighbour is used
    v = sample_raster(layer, np.array(1.5), np.array(2.5))
    assert np.isfinite(v) and v in (values[0, 1], values[1, 0], values[1, 2], values[2, 1])
    # far outside the raster: missing
    assert np.isnan(sample_raster(layer, np.array(10.0), np.array(10.0)))


def test_constant_raster_resamples_without_gaps():
    d = build_domain(NIGERIA_BBOX, 0.0)
    mesh = generate_mesh(d, 50_000)
    layer = RasterLayer.constant(0.7, d.geo_extent())
    values, missing = resample_to_mesh(layer, d, mesh)
    assert not missing.any()
    np.testing.assert_allclose(values, 0.7)


def test_clipped_raster_flags_buffer_missing():
    d = build_domain(NIGERIA_BBOX, 300_000)
    mesh = generate_mesh(d, 50_000)
    layer = RasterLayer.constant(1.0, d.geo_extent(interior=True), shape=(20, 20))
    _, missing = resample_to_mesh(layer, d, mesh)
    assert missing[0].all() and missing[-1].all() and missing[:, 0].all()
    assert not missing[missing.shape[0] // 2, missing.shape[1] // 2]


def test_no_overlap_names_both_extents():
    d = build_domain(NIGERIA_BBOX, 0.0)
    mesh = generate_mesh(d, 50_000)
    layer = RasterLayer.constant(1.0, (30.0, 30.0, 31.0, 31.0))
    with pytest.raises(ValueError, match=r"raster extent.*30\.0000.*domain interior.*2\.6680"):
        resample_to_mesh(layer, d, mesh)


def test_geopoint_validation():
    with pytest.raises(ValueError):
        GeoPoint(200.0, 0.0).validate()
    assert ProjectedPoint(1.0, 2.0).x == 1.0
