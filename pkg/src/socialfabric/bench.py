"""Classical plate benchmarks and the scaling/superposition property suite."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .analysis import load_vector, solve_plate
from .defaults import BASELINE_MATERIAL, NIGERIA_BBOX
from .element import bending_stiffness
from .geo import build_domain, project
from .mesh import PlateMesh, assign_materials, generate_mesh
from .solver import solve_mesh
from .types import ForceDescriptor, GeoPoint

PLATE_CENTRE = GeoPoint(8.67, 9.06)

# Centre deflection coefficients of square thin plates (Timoshenko & Woinowsky-Krieger).
CLASSICAL = {
    ("simply_supported_all", "uniform"): 0.00406,
    ("clamped_all", "uniform"): 0.00126,
    ("clamped_all", "point"): 0.00560,
}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def square_plate_coefficient(n: int, bc: str, load: str, nu: float = 0.3) -> float:
    """Centre deflection of a unit square plate as a multiple of qa^4/D or Pa^2/D."""
    E, h = 1.0e9, 0.01
    mesh = assign_materials(PlateMesh(n, n, 1.0 / n, 1.0 / n), (h, E, nu))
    f = np.zeros(mesh.ndof)
    centre = mesh.nearest_node(0.5, 0.5)
    if load == "uniform":
        f[mesh.w_dofs] = mesh.dx * mesh.dy
    else:
        f[mesh.w_dofs[centre]] = 1.0
    u = solve_mesh(mesh, bc, f).u
    return float(u[3 * centre] * bending_stiffness(E, h, nu))


def classical_checks() -> list[Check]:
    cases = [
        ("simply supported square, uniform load", "simply_supported_all", "uniform", 64, 0.01),
        ("clamped square, uniform load", "clamped_all", "uniform", 64, 0.015),
        ("clamped square, central point load", "clamped_all", "point", 96, 0.03),
    ]
    out = []
    for label, bc, load, n, tol in cases:
        ref = CLASSICAL[(bc, load)]
        c = square_plate_coefficient(n, bc, load)
        err = abs(c - ref) / ref
        out.append(Check(f"{label} ({n}x{n})", err <= tol, f"{c:.6f} vs {ref} (error {err:.3%}, limit {tol:.1%})"))
    return out


def reference_plate(buffer_m: float = 150_000.0, resolution_m: float = 10_000.0,
                    material=BASELINE_MATERIAL, bbox=NIGERIA_BBOX):
    """Nigeria-extent plate with uniform material; returns ``(domain, mesh)``."""
    domain = build_domain(bbox, buffer_m)
    mesh = assign_materials(generate_mesh(domain, resolution_m), material)
    return domain, mesh


def point_force(domain, magnitude: float, where: GeoPoint = PLATE_CENTRE,
                distribution: str = "point", radius: float = 0.0) -> ForceDescriptor:
    return ForceDescriptor(project(where, domain.ref), magnitude, distribution, radius)


def property_checks(resolution_m: float = 10_000.0) -> list[Check]:
    """Force linearity, E inverse law and superposition on the reference plate."""
    out = []
    domain, mesh = reference_plate(resolution_m=resolution_m)
    base_f = load_vector(mesh, [point_force(domain, 1.0e9)])
    base = solve_plate(mesh, base_f)

    worst_d = worst_s = 0.0
    same_area = True
    for mag in (1e5, 1e7, 1e11):
        r = solve_plate(mesh, base_f * (mag / 1e9))
        c = mag / 1e9
        worst_d = max(worst_d, abs(r.metrics.max_displacement / (c * base.metrics.max_displacement) - 1))
        worst_s = max(worst_s, abs(r.metrics.max_von_mises / (c * base.metrics.max_von_mises) - 1))
        same_area &= r.metrics.affected_area == base.metrics.affected_area
    ok = worst_d <= 1e-9 and worst_s <= 1e-9 and same_area
    out.append(Check("force linearity 1e5..1e11 N", ok,
                     f"max rel. dev. displacement {worst_d:.2e}, stress {worst_s:.2e}, area identical={same_area}"))

    worst_d = worst_s = worst_a = 0.0
    h, E0, nu = BASELINE_MATERIAL
    for E in (1e7, 1e9, 1e11):
        m = assign_materials(mesh, (h, E, nu))
        r = solve_plate(m, base_f)
        worst_d = max(worst_d, abs(r.metrics.max_displacement * E / (base.metrics.max_displacement * E0) - 1))
        worst_s = max(worst_s, abs(r.metrics.max_von_mises / base.metrics.max_von_mises - 1))
        worst_a = max(worst_a, abs(r.metrics.affected_area - base.metrics.affected_area))
    ok = worst_d <= 1e-9 and worst_s <= 1e-9 and worst_a <= 1e-9 * base.metrics.affected_area
    out.append(Check("Young's modulus inverse law 1e7..1e11 Pa", ok,
                     f"displacement*E dev. {worst_d:.2e}, stress dev. {worst_s:.2e}, area dev. {worst_a:.2e}"))

    f1 = load_vector(mesh, [point_force(domain, 1.0e9)])
    f2 = load_vector(mesh, [point_force(domain, 6.0e8, GeoPoint(10.5, 11.0), "linear", 0.5 * 111_320.0)])
    u1 = solve_plate(mesh, f1).solution.u
    u2 = solve_plate(mesh, f2).solution.u
    u12 = solve_plate(mesh, f1 + f2).solution.u
    dev = float(np.abs(u12 - (u1 + u2)).max() / np.abs(u12).max())
    out.append(Check("superposition u(f1+f2) = u(f1)+u(f2)", dev <= 1e-9, f"max rel. dev. {dev:.2e}"))
    return out


def run_all(quick: bool = False) -> list[Check]:
    t0 = time.perf_counter()
    checks = classical_checks() + property_checks(20_000.0 if quick else 10_000.0)
    checks.append(Check("runtime", True, f"{time.perf_counter() - t0:.1f} s"))
    return checks
