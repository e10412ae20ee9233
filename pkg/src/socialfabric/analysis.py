"""Impact measures, full scenario runs and scenario comparison."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ScenarioConfig
from .element import SurfaceStress, add_force, mesh_stresses
from .events import ConflictEvent, ScenarioContext, build_force_set_report
from .geo import DomainRect, RasterLayer, build_domain, project, resample_to_mesh
from .mesh import PlateMesh, assign_materials, generate_mesh
from .solver import Solution, solve_mesh
from .translate import build_material_field
from .types import ForceDescriptor, GeoPoint, MaterialField

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    """Failure inside one pipeline stage; the message starts with the stage name."""

    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage
        self.cause = exc


@contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass(frozen=True)
class DisplacementField:
    """Nodal results on the ``(ny+1, nx+1)`` node grid, row 0 at the south edge."""

    w: np.ndarray
    theta_x: np.ndarray
    theta_y: np.ndarray
    origin: tuple[float, float]
    dx: float
    dy: float
    buffer_m: float = 0.0

    @classmethod
    def from_solution(cls, mesh: PlateMesh, u: np.ndarray, buffer_m: float = 0.0) -> "DisplacementField":
        shape = (mesh.ny + 1, mesh.nx + 1)
        return cls(
            w=u[0::3].reshape(shape), theta_x=u[1::3].reshape(shape), theta_y=u[2::3].reshape(shape),
            origin=tuple(mesh.origin), dx=mesh.dx, dy=mesh.dy, buffer_m=buffer_m,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.w.shape


@dataclass(frozen=True)
class ImpactMetrics:
    max_displacement: float
    affected_area: float
    max_von_mises: float
    argmax_displacement: int
    argmax_von_mises: int
    threshold_frac: float = 0.10

    def as_dict(self) -> dict:
        return {
            "max_displacement": self.max_displacement,
            "affected_area": self.affected_area,
            "max_von_mises": self.max_von_mises,
            "argmax_displacement_node": self.argmax_displacement,
            "argmax_von_mises_element": self.argmax_von_mises,
            "threshold_frac": self.threshold_frac,
        }


def impact_metrics(field_: DisplacementField, stress: SurfaceStress | np.ndarray | None,
                   threshold_frac: float = 0.10) -> ImpactMetrics:
    """Peak |w|, percentage of all nodes above ``threshold_frac`` of the peak, peak von Mises.

    ``np.argmax`` returns the first maximum, so ties go to the lowest index.
    """
    aw = np.abs(np.asarray(field_.w, dtype=float)).ravel()
    i_w = int(np.argmax(aw)) if aw.size else 0
    peak = float(aw[i_w]) if aw.size else 0.0
    area = 100.0 * np.count_nonzero(aw > threshold_frac * peak) / aw.size if peak > 0 else 0.0
    if stress is None:
        vm = np.zeros(1)
    elif isinstance(stress, SurfaceStress):
        vm = stress.von_mises.ravel()
    else:
        vm = np.asarray(stress, dtype=float).ravel()
    i_s = int(np.argmax(vm)) if vm.size else 0
    return ImpactMetrics(
        max_displacement=peak,
        affected_area=float(area),
        max_von_mises=float(vm[i_s]) if vm.size else 0.0,
        argmax_displacement=i_w,
        argmax_von_mises=i_s,
        threshold_frac=threshold_frac,
    )


@dataclass
class PlateRun:
    """Loads, solution and derived fields for one mesh."""

    mesh: PlateMesh
    loads: np.ndarray
    solution: Solution
    field: DisplacementField
    stress: SurfaceStress
    metrics: ImpactMetrics


def load_vector(mesh: PlateMesh, forces: Iterable[ForceDescriptor]) -> np.ndarray:
    f = np.zeros(mesh.ndof)
    fallbacks = sum(add_force(f, fd, mesh) for fd in forces)
    if fallbacks:
        logger.warning(
            "%d distributed force(s) narrower than the mesh spacing were applied as point loads", fallbacks,
        )
    return f


def solve_plate(mesh: PlateMesh, loads: np.ndarray, bc: str = "clamped_all", tol: float = 1e-10,
                threshold_frac: float = 0.10, buffer_m: float = 0.0) -> PlateRun:
    """Solve one loaded mesh and compute its impact measures."""
    sol = solve_mesh(mesh, bc, loads, tol)
    fld = DisplacementField.from_solution(mesh, sol.u, buffer_m)
    stress = mesh_stresses(mesh, sol.u)
    return PlateRun(mesh, loads, sol, fld, stress, impact_metrics(fld, stress, threshold_frac))


@dataclass
class ScenarioResult:
    config_hash: str
    domain: DomainRect
    mesh: PlateMesh
    materials: MaterialField
    forces: list[ForceDescriptor]
    run: PlateRun
    provenance: dict = field(default_factory=dict)

    @property
    def field(self) -> DisplacementField:
        return self.run.field

    @property
    def metrics(self) -> ImpactMetrics:
        return self.run.metrics

    @property
    def stress(self) -> SurfaceStress:
        return self.run.stress


def _config_loads(cfg: ScenarioConfig, domain: DomainRect) -> list[ForceDescriptor]:
    out = []
    for ld in cfg.loads:
        loc = project(GeoPoint(ld.lon, ld.lat), domain.ref)
        if not domain.contains(loc):
            raise ValueError(f"configured load at ({ld.lon}, {ld.lat}) lies outside the domain")
        out.append(ForceDescriptor(loc, ld.magnitude, ld.distribution, ld.radius_m))
    return out


@dataclass
class PreparedScenario:
    """Everything up to (not including) the solve."""

    config_hash: str
    domain: DomainRect
    mesh: PlateMesh
    materials: MaterialField
    forces: list[ForceDescriptor]
    fabric_report: object
    event_report: object | None


def prepare_scenario(
    cfg: ScenarioConfig,
    rasters: Mapping[str, RasterLayer] | None = None,
    events: Sequence[ConflictEvent] | None = None,
) -> PreparedScenario:
    """Domain, mesh, material field and force list for a configuration.

    Rasters and events are read from the paths in ``cfg`` unless passed in.
    """
    from . import io

    with stage("geo"):
        domain = build_domain(cfg.bbox, cfg.mesh.buffer_m)
    with stage("mesh"):
        mesh = generate_mesh(domain, cfg.mesh.resolution_m)

    with stage("fabric"):
        specs = cfg.fabric.specs
        if rasters is None:
            rasters = {i.spec.name: io.read_geotiff(i.raster) for i in cfg.fabric.indicators}
        grids = {}
        for s in specs:
            values, missing = resample_to_mesh(rasters[s.name], domain, mesh)
            grids[s.name] = np.where(missing, np.nan, values)
        materials, fabric_report = build_material_field(
            grids, specs, cfg.fabric.combinations, cfg.fabric.baselines, shape=(mesh.ny, mesh.nx),
        )
        mesh = assign_materials(mesh, materials)

    with stage("events"):
        if events is None:
            events = io.read_events_csv(cfg.events.csv) if cfg.events.csv is not None else []
        event_report = None
        forces: list[ForceDescriptor] = []
        if events:
            ctx = ScenarioContext(cfg.events.analysis_date, cfg.events.democracy_index, cfg.events.civilian_gamma)
            forces, event_report = build_force_set_report(events, cfg.events.type_params, ctx, domain)
        forces = forces + _config_loads(cfg, domain)
    return PreparedScenario(cfg.config_hash, domain, mesh, materials, forces, fabric_report, event_report)


def run_scenario(
    cfg: ScenarioConfig,
    rasters: Mapping[str, RasterLayer] | None = None,
    events: Sequence[ConflictEvent] | None = None,
) -> ScenarioResult:
    """Execute geo, fabric, events, assembly, solve and metrics for one configuration."""
    prep = prepare_scenario(cfg, rasters, events)
    mesh, domain, forces = prep.mesh, prep.domain, prep.forces
    with stage("assemble"):
        loads = load_vector(mesh, forces)
    with stage("solve"):
        run = solve_plate(
            mesh, loads, cfg.mesh.boundary_condition, cfg.tolerance,
            cfg.output.threshold_frac, domain.buffer_m,
        )

    provenance = {
        "config_hash": cfg.config_hash,
        "software_version": __version__,
        "scenario": cfg.name,
        "mesh": {
            "nx": mesh.nx, "ny": mesh.ny, "dx_m": mesh.dx, "dy_m": mesh.dy,
            "nodes": mesh.n_nodes, "dofs": mesh.ndof, "boundary_condition": cfg.mesh.boundary_condition,
        },
        "domain": {
            "ref_lon": domain.ref_lon, "ref_lat": domain.ref_lat,
            "width_m": domain.width_m, "height_m": domain.height_m, "buffer_m": domain.buffer_m,
            "origin_m": list(domain.origin),
        },
        "events": prep.event_report.as_dict() if prep.event_report is not None else {"total": 0},
        "configured_loads": len(cfg.loads),
        "forces_applied": len(forces),
        "total_load_n": float(loads.sum()),
        "missing_data": {
            "elements_missing_per_indicator": prep.fabric_report.missing_elements,
            "baseline_substitutions": prep.fabric_report.baseline_substitutions,
        },
        "solver": {
            "method": run.solution.method,
            "relative_residual": run.solution.residual,
            "backward_error": run.solution.backward_error,
            "tolerance": cfg.tolerance,
        },
        "affected_area_basis": "percent of all mesh nodes, buffer included",
    }
    return ScenarioResult(cfg.config_hash, domain, mesh, prep.materials, forces, run, provenance)


@dataclass(frozen=True)
class ScenarioComparison:
    difference: np.ndarray
    deltas: dict


def compare_fields(w_a: np.ndarray, w_b: np.ndarray, metrics_a: dict, metrics_b: dict) -> ScenarioComparison:
    w_a = np.asarray(w_a)
    w_b = np.asarray(w_b)
    if w_a.shape != w_b.shape:
        raise ValueError(f"mesh mismatch: node grids {w_a.shape} and {w_b.shape}")
    keys = ("max_displacement", "affected_area", "max_von_mises")
    return ScenarioComparison(w_b - w_a, {k: metrics_b[k] - metrics_a[k] for k in keys})


def compare_scenarios(a: ScenarioResult, b: ScenarioResult) -> ScenarioComparison:
    """Field ``b - a`` and metric deltas; the meshes must coincide."""
    if not a.mesh.same_geometry(b.mesh):
        raise ValueError("mesh mismatch: scenarios were solved on different grids")
    return compare_fields(a.field.w, b.field.w, a.metrics.as_dict(), b.metrics.as_dict())
