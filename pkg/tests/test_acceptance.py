"""Acceptance criteria on the reference plate; one PASS/FAIL line per criterion.

The lines are collected by conftest and shown in the terminal summary.
"""

import math
import shutil
from collections import Counter
from datetime import date

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from socialfabric.analysis import load_vector, run_scenario, solve_plate
from socialfabric.bench import PLATE_CENTRE, point_force, reference_plate, square_plate_coefficient
from socialfabric.config import load_config
from socialfabric.defaults import BASELINE_MATERIAL, default_event_params
from socialfabric.demo import shipped_demo_dir
from socialfabric.events import (
    ConflictEvent,
    ScenarioContext,
    build_force_set_report,
    decay_cutoff,
    effective_magnitude,
    expanded_radius,
    temporal_decay,
)
from socialfabric.io import read_events_csv, write_outputs
from socialfabric.mesh import assign_materials
from socialfabric.translate import CombinationSpec, combine_parameter
from socialfabric.types import GeoPoint

pytestmark = pytest.mark.slow

DEGREE_M = 111_320.0
SW_CORNER = GeoPoint(3.53, 4.92)


def report(number: int, passed: bool, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


@pytest.fixture(scope="module")
def plate():
    return reference_plate()


@pytest.fixture(scope="module")
def centre_run(plate):
    domain, mesh = plate
    return solve_plate(mesh, load_vector(mesh, [point_force(domain, 1.0e9)]))


def test_criterion_01_force_linearity(plate, centre_run):
    import time

    domain, mesh = plate
    t0 = time.perf_counter()
    base = centre_run.metrics
    worst_d = worst_s = 0.0
    same_area = True
    for mag in (1e5, 1e6, 1e7, 1e8, 1e10, 1e11):
        c = mag / 1e9
        m = solve_plate(mesh, centre_run.loads * c).metrics
        worst_d = max(worst_d, abs(m.max_displacement / (c * base.max_displacement) - 1))
        worst_s = max(worst_s, abs(m.max_von_mises / (c * base.max_von_mises) - 1))
        same_area &= m.affected_area == base.affected_area
    elapsed = time.perf_counter() - t0
    ok = worst_d <= 1e-9 and worst_s <= 1e-9 and same_area and elapsed < 60
    assert report(1, ok, f"displacement dev {worst_d:.2e}, stress dev {worst_s:.2e}, "
                         f"area identical={same_area}, {elapsed:.1f} s")


def test_criterion_02_youngs_modulus_inverse(plate, centre_run):
    domain, mesh = plate
    base = centre_run.metrics
    h, E0, nu = BASELINE_MATERIAL
    worst_d = worst_s = worst_a = 0.0
    for E in (1e7, 1e8, 1e9, 1e10, 1e11):
        m = solve_plate(assign_materials(mesh, (h, E, nu)), centre_run.loads).metrics
        worst_d = max(worst_d, abs(m.max_displacement * E / (base.max_displacement * E0) - 1))
        worst_s = max(worst_s, abs(m.max_von_mises / base.max_von_mises - 1))
        worst_a = max(worst_a, abs(m.affected_area / base.affected_area - 1))
    ok = max(worst_d, worst_s, worst_a) <= 1e-9
    assert report(2, ok, f"displacement*E dev {worst_d:.2e}, stress dev {worst_s:.2e}, area dev {worst_a:.2e}")


def test_criterion_03_thickness_cubic(plate):
    domain, mesh = plate
    f = load_vector(mesh, [point_force(domain, 1.0e9, distribution="gaussian", radius=0.5 * DEGREE_M)])
    _, E, nu = BASELINE_MATERIAL
    w1 = solve_plate(assign_materials(mesh, (2000.0, E, nu)), f).metrics.max_displacement
    w2 = solve_plate(assign_materials(mesh, (4000.0, E, nu)), f).metrics.max_displacement
    ratio = w1 / w2
    assert report(3, abs(ratio / 8 - 1) <= 1e-3, f"w(h)/w(2h) = {ratio:.10f} (target 8, 0.1 %)")


def test_criterion_04_poisson_proportionality(plate):
    domain, mesh = plate
    f = load_vector(mesh, [point_force(domain, 1.0e9)])
    h, E, _ = BASELINE_MATERIAL
    u1 = solve_plate(assign_materials(mesh, (h, E, 0.1)), f).solution.u
    u3 = solve_plate(assign_materials(mesh, (h, E, 0.3)), f).solution.u
    expected = (1 - 0.3**2) / (1 - 0.1**2)
    dev = float(np.abs(u3 - expected * u1).max() / np.abs(u3).max())
    ratio = np.abs(u3).max() / np.abs(u1).max()
    assert report(4, dev <= 1e-8, f"max|w| ratio {ratio:.8f} vs {expected:.8f}, field dev {dev:.2e} (limit 1e-8)")


def test_criterion_05_classical_benchmarks():
    cases = [("simply_supported_all", "uniform", 64, 0.00406, 0.01),
             ("clamped_all", "uniform", 64, 0.00126, 0.015),
             ("clamped_all", "point", 96, 0.00560, 0.03)]
    parts, ok = [], True
    for bc, load, n, ref, tol in cases:
        c = square_plate_coefficient(n, bc, load)
        err = abs(c - ref) / ref
        ok &= err <= tol
        parts.append(f"{bc}/{load} {c:.6f} ({err:.2%})")
    assert report(5, ok, "; ".join(parts))


def test_criterion_06_superposition_and_coalescence(plate, centre_run):
    domain, mesh = plate
    f1 = centre_run.loads
    f2 = load_vector(mesh, [point_force(domain, 6.0e8, GeoPoint(10.5, 11.0), "linear", 0.5 * DEGREE_M)])
    u1 = centre_run.solution.u
    u2 = solve_plate(mesh, f2).solution.u
    u12 = solve_plate(mesh, f1 + f2).solution.u
    dev = float(np.abs(u12 - (u1 + u2)).max() / np.abs(u12).max())

    one = point_force(domain, 1.0e9, distribution="constant", radius=0.5 * DEGREE_M)
    half = point_force(domain, 5.0e8, distribution="constant", radius=0.5 * DEGREE_M)
    f_one = load_vector(mesh, [one])
    f_two = load_vector(mesh, [half, half])
    identical = np.array_equal(f_one, f_two)
    m_one = solve_plate(mesh, f_one).metrics
    m_two = solve_plate(mesh, f_two).metrics
    same = m_one == m_two
    ok = dev <= 1e-9 and identical and same
    assert report(6, ok, f"superposition dev {dev:.2e}, load vectors bit-identical={identical}, metrics equal={same}")


def test_criterion_07_distribution_ordering(plate):
    domain, mesh = plate
    paper = {"gaussian": (4.7425, 2.77), "linear": (2.2990, 6.42), "constant": (1.8892, 7.75)}
    got = {}
    for kind in paper:
        f = load_vector(mesh, [point_force(domain, 1.0e9, distribution=kind, radius=0.5 * DEGREE_M)])
        m = solve_plate(mesh, f).metrics
        got[kind] = (m.max_displacement, m.affected_area)
    g, li, c = got["gaussian"], got["linear"], got["constant"]
    order_w = g[0] > li[0] > c[0]
    order_a = c[1] > li[1] > g[1]
    absolute = all(abs(got[k][0] / paper[k][0] - 1) <= 0.15 and abs(got[k][1] - paper[k][1]) <= 1.5 for k in paper)
    detail = ", ".join(f"{k} {v[0]:.4f} m / {v[1]:.2f} %" for k, v in got.items())
    assert report(7, order_w and order_a and absolute,
                  f"{detail}; displacement order ok={order_w}, area order ok={order_a}, absolute values ok={absolute}")


def test_criterion_08_baseline_absolute(centre_run):
    m = centre_run.metrics
    ok = abs(m.max_displacement / 5.9667 - 1) <= 0.15 and abs(m.affected_area - 2.01) <= 1.0
    assert report(8, ok, f"max displacement {m.max_displacement:.4f} m (target 5.9667 +-15 %), "
                         f"affected area {m.affected_area:.2f} % (target 2.01 +-1 pp)")


def test_criterion_09_buffer_convergence():
    errors = []
    for buffer_m in (150_000.0, 300_000.0, 500_000.0):
        domain, mesh = reference_plate(buffer_m=buffer_m)
        w = [solve_plate(mesh, load_vector(mesh, [point_force(domain, 1.0e9, where)])).metrics.max_displacement
             for where in (PLATE_CENTRE, SW_CORNER)]
        errors.append(abs(w[1] - w[0]) / w[0])
    decreasing = errors[0] > errors[1] > errors[2]
    ok = decreasing and errors[2] < 0.01
    detail = " -> ".join(f"{e:.2%}" for e in errors)
    assert report(9, ok, f"corner vs centre error {detail} at 150/300/500 km; decreasing={decreasing}, final < 1 %")


def test_criterion_10_translation_golden():
    poisson = CombinationSpec("poissons_ratio", k=2.5)
    lo = combine_parameter([(1.0, 1.0)], poisson)
    hi = combine_parameter([(-1.0, 1.0)], poisson)
    half_life = math.log(2) / 0.003
    cutoff = decay_cutoff(0.003)
    r_base, beta, mu = 10_000.0, 0.5, 0.0512
    t99 = 4 * math.log(10) / mu
    expansion = expanded_radius(r_base, beta, mu, t99) / r_base - 1
    protest = ConflictEvent(date(2018, 12, 31), "Protests", "Peaceful protest", 0, 0, GeoPoint(8.0, 9.0), 1)
    params = default_event_params()
    factor = effective_magnitude(protest, params, ScenarioContext(date(2018, 12, 31), 0.4)) / params["Protests"].f_base
    ok = (abs(lo - 0.0379) <= 1e-3 and abs(hi - 0.4621) <= 1e-3
          and abs(half_life - 231) <= 1 and abs(temporal_decay(231, 0.003) - 0.5) <= 1e-3
          and abs(cutoff - 1535) <= 1 and expansion >= 0.99 * beta
          and math.isclose(factor, 0.6, rel_tol=1e-12))
    assert report(10, ok, f"nu endpoints {lo:.4f}/{hi:.4f}, half-life {half_life:.1f} d, cutoff {cutoff:.2f} d, "
                          f"expansion {expansion / beta:.4%} of beta at {t99:.1f} d, protest factor {factor:.3f}")


def test_criterion_11_event_fixture():
    events = read_events_csv(shipped_demo_dir() / "events_2018.csv")
    expected_types = {"Protests": 404, "Violence against civilians": 333, "Battles": 270,
                      "Riots": 198, "Explosions/Remote violence": 49}
    exact = [e for e in events if e.geo_precision == 1 and e.event_type != "Strategic developments"]
    counts = dict(Counter(e.event_type for e in exact))
    forces, rep = build_force_set_report(events, default_event_params(), ScenarioContext(date(2018, 12, 31), 0.4))
    emitted_from_retained = Counter((f.event_type, f.sub_event_type) for f in forces) <= Counter(
        (e.event_type, e.sub_event_type) for e in exact)
    ok = (counts == expected_types and len(exact) == 1254 and rep.selected == 1254
          and rep.selected + rep.dropped_precision + rep.dropped_strategic == rep.total
          and emitted_from_retained)
    assert report(11, ok, f"type counts {counts}; retained {rep.selected} of {rep.total} "
                          f"(dropped {rep.dropped_precision} imprecise, {rep.dropped_strategic} strategic)")


def test_criterion_12_end_to_end_demo(tmp_path):
    work = tmp_path / "demo"
    shutil.copytree(shipped_demo_dir(), work)
    cfg = load_config(work / "nigeria_demo.yaml")
    first = run_scenario(cfg)
    bundle = write_outputs(first, cfg, tmp_path / "out")
    second = run_scenario(load_config(work / "nigeria_demo.yaml"))
    all_files = all(p.exists() and p.stat().st_size > 0 for p in bundle.files.values())
    a, b = first.metrics, second.metrics
    dev = max(abs(a.max_displacement / b.max_displacement - 1), abs(a.max_von_mises / b.max_von_mises - 1))
    ok = all_files and len(bundle.files) == 7 and dev <= 1e-10 and a.affected_area == b.affected_area
    assert report(12, ok, f"{len(bundle.files)} artifacts written, repeat metric dev {dev:.1e}, "
                          f"max displacement {a.max_displacement:.4g} m, affected area {a.affected_area:.2f} %")
