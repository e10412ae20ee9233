import numpy as np
import pytest

from socialfabric.analysis import (
    DisplacementField,
    ImpactMetrics,
    compare_fields,
    compare_scenarios,
    impact_metrics,
    load_vector,
    solve_plate,
)
from socialfabric.element import distribute_force
from socialfabric.mesh import PlateMesh, assign_materials
from socialfabric.solver import solve_mesh
from socialfabric.types import ForceDescriptor, ProjectedPoint


def field(w):
    w = np.asarray(w, dtype=float)
    return DisplacementField(w, np.zeros_like(w), np.zeros_like(w), (0.0, 0.0), 1.0, 1.0)


@pytest.fixture(scope="module")
def plate():
    return assign_materials(PlateMesh(24, 20, 1000.0, 1000.0), (50.0, 5e9, 0.3))


def test_metrics_by_hand():
    w = np.array([[0.0, 0.05, 0.2], [1.0, -2.0, 0.1]])
    m = impact_metrics(field(w), np.array([[1.0, 3.0], [3.0, 2.0]]))
    assert m.max_displacement == 2.0 and m.argmax_displacement == 4
    # nodes with |w| > 0.2: 1.0 and 2.0
    assert m.affected_area == pytest.approx(100 * 2 / 6)
    assert m.max_von_mises == 3.0 and m.argmax_von_mises == 1


def test_zero_field_metrics():
    m = impact_metrics(field(np.zeros((3, 3))), np.zeros((2, 2)))
    assert (m.max_displacement, m.affected_area, m.max_von_mises) == (0.0, 0.0, 0.0)


def test_as_dict_keys():
    d = ImpactMetrics(1.0, 2.0, 3.0, 0, 0).as_dict()
    assert {"max_displacement", "affected_area", "max_von_mises"} <= d.keys()


def test_area_invariant_under_load_scaling(plate):
    f = load_vector(plate, [ForceDescriptor(ProjectedPoint(12_000, 10_000), 1e9, "gaussian", 3000)])
    a = solve_plate(plate, f).metrics
    b = solve_plate(plate, 3.7 * f).metrics
    assert a.affected_area == b.affected_area
    assert b.max_displacement == pytest.approx(3.7 * a.max_displacement, rel=1e-12)


def test_uniform_E_scaling(plate):
    f = load_vector(plate, [ForceDescriptor(ProjectedPoint(12_000, 10_000), 1e9)])
    a = solve_plate(plate, f).metrics
    b = solve_plate(assign_materials(plate, (50.0, 2.5e10, 0.3)), f).metrics
    assert b.max_displacement * 5 == pytest.approx(a.max_displacement, rel=1e-12)
    assert b.max_von_mises == pytest.approx(a.max_von_mises, rel=1e-12)
    assert b.affected_area == a.affected_area


def test_single_event_matches_direct_composition(plate):
    fd = ForceDescriptor(ProjectedPoint(8_000, 7_000), 4e8, "linear", 2500)
    via_pipeline = solve_plate(plate, load_vector(plate, [fd])).solution.u
    direct = solve_mesh(plate, "clamped_all", distribute_force(fd, plate)).u
    np.testing.assert_array_equal(via_pipeline, direct)


def test_separation_trend(plate):
    out = []
    for sep in (0, 2000, 4000, 6000):
        fds = [ForceDescriptor(ProjectedPoint(12_000 - sep / 2, 10_000), 5e8),
               ForceDescriptor(ProjectedPoint(12_000 + sep / 2, 10_000), 5e8)]
        out.append(solve_plate(plate, load_vector(plate, fds)).metrics)
    d = [m.max_displacement for m in out]
    a = [m.affected_area for m in out]
    assert all(x >= y for x, y in zip(d, d[1:]))
    assert all(x <= y for x, y in zip(a, a[1:]))


def test_compare_fields():
    w = np.arange(6.0).reshape(2, 3)
    m = {"max_displacement": 1.0, "affected_area": 2.0, "max_von_mises": 3.0}
    c = compare_fields(w, w, m, m)
    assert not c.difference.any() and all(v == 0 for v in c.deltas.values())
    with pytest.raises(ValueError, match="mesh mismatch"):
        compare_fields(w, w.T, m, m)


def test_compare_doubling_load_and_stiffness(plate):
    from socialfabric.analysis import ScenarioResult

    f = load_vector(plate, [ForceDescriptor(ProjectedPoint(12_000, 10_000), 1e9)])

    def result(mesh, loads):
        return ScenarioResult("x", None, mesh, mesh.materials, [], solve_plate(mesh, loads))

    base = result(plate, f)
    double = result(plate, 2 * f)
    stiff = result(assign_materials(plate, (50.0, 1e10, 0.3)), f)
    np.testing.assert_allclose(compare_scenarios(base, double).difference, base.field.w, rtol=1e-12, atol=1e-18)
    np.testing.assert_allclose(compare_scenarios(base, stiff).difference, -0.5 * base.field.w,
                               rtol=1e-10, atol=1e-12 * np.abs(base.field.w).max())
    other = result(assign_materials(PlateMesh(10, 10, 1.0, 1.0), (1.0, 1.0, 0.3)),
                   np.zeros(3 * 121))
    with pytest.raises(ValueError, match="mesh mismatch"):
        compare_scenarios(base, other)
