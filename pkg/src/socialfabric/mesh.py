"""Structured rectangular plate mesh with three DOFs per node."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .types import MaterialField, ProjectedPoint

BOUNDARY_CONDITIONS = ("clamped_all", "simply_supported_all")


@dataclass(frozen=True)
class PlateMesh:
    """Uniform grid of ``nx`` by ``ny`` rectangular elements.

    Nodes are numbered row by row from the lower-left corner, so node
    ``j * (nx + 1) + i`` sits at ``(x0 + i*dx, y0 + j*dy)``. Node ``n`` owns
    DOFs ``3n`` (w), ``3n+1`` (theta_x) and ``3n+2`` (theta_y).
    """

    nx: int
    ny: int
    dx: float
    dy: float
    origin: ProjectedPoint = ProjectedPoint(0.0, 0.0)
    materials: MaterialField | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"mesh needs at least 2x2 elements, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("element sizes must be positive")

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def ndof(self) -> int:
        return 3 * self.n_nodes

    @property
    def width(self) -> float:
        return self.nx * self.dx

    @property
    def height(self) -> float:
        return self.ny * self.dy

    @cached_property
    def x_coords(self) -> np.ndarray:
        return self.origin.x + self.dx * np.arange(self.nx + 1)

    @cached_property
    def y_coords(self) -> np.ndarray:
        return self.origin.y + self.dy * np.arange(self.ny + 1)

    @cached_property
    def node_xy(self) -> np.ndarray:
        """``(n_nodes, 2)`` node coordinates in row-major order."""
        X, Y = np.meshgrid(self.x_coords, self.y_coords)
        return np.column_stack([X.ravel(), Y.ravel()])

    @cached_property
    def element_centres(self) -> np.ndarray:
        """``(ny, nx, 2)`` element centre coordinates."""
        xc = self.x_coords[:-1] + 0.5 * self.dx
        yc = self.y_coords[:-1] + 0.5 * self.dy
        X, Y = np.meshgrid(xc, yc)
        return np.stack([X, Y], axis=-1)

    @cached_property
    def connectivity(self) -> np.ndarray:
        """``(n_elements, 4)`` node ids, counter-clockwise from lower-left."""
        ex, ey = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        n1 = (ey * (self.nx + 1) + ex).ravel()
        row = self.nx + 1
        return np.column_stack([n1, n1 + 1, n1 + row + 1, n1 + row])

    @cached_property
    def element_dofs(self) -> np.ndarray:
        """``(n_elements, 12)`` global DOF ids in element order."""
        c = self.connectivity
        return (3 * c[:, :, None] + np.arange(3)).reshape(self.n_elements, 12)

    @cached_property
    def w_dofs(self) -> np.ndarray:
        return 3 * np.arange(self.n_nodes)

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        j, i = np.divmod(np.arange(self.n_nodes), self.nx + 1)
        on_edge = (i == 0) | (i == self.nx) | (j == 0) | (j == self.ny)
        return np.flatnonzero(on_edge)

    def contains(self, x: float, y: float, tol: float = 1e-9) -> bool:
        slack = tol * max(self.width, self.height)
        return (
            self.origin.x - slack <= x <= self.origin.x + self.width + slack
            and self.origin.y - slack <= y <= self.origin.y + self.height + slack
        )

    def nearest_node(self, x: float, y: float) -> int:
        """Closest node; ties resolve to the lower index."""
        i = int(np.clip(np.ceil((x - self.origin.x) / self.dx - 0.5), 0, self.nx))
        j = int(np.clip(np.ceil((y - self.origin.y) / self.dy - 0.5), 0, self.ny))
        return j * (self.nx + 1) + i

    def nodes_within(self, x: float, y: float, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Ids and distances of nodes with distance <= radius from (x, y)."""
        i0 = max(int(np.floor((x - radius - self.origin.x) / self.dx)), 0)
        i1 = min(int(np.ceil((x + radius - self.origin.x) / self.dx)), self.nx)
        j0 = max(int(np.floor((y - radius - self.origin.y) / self.dy)), 0)
        j1 = min(int(np.ceil((y + radius - self.origin.y) / self.dy)), self.ny)
        if i1 < i0 or j1 < j0:
            return np.empty(0, dtype=int), np.empty(0)
        ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
        px = self.origin.x + ii * self.dx
        py = self.origin.y + jj * self.dy
        d = np.hypot(px - x, py - y).ravel()
        ids = (jj * (self.nx + 1) + ii).ravel()
        inside = d <= radius
        return ids[inside], d[inside]

    def require_materials(self) -> MaterialField:
        if self.materials is None:
            raise ValueError("mesh has no materials assigned")
        return self.materials

    def same_geometry(self, other: "PlateMesh") -> bool:
        return (self.nx, self.ny, self.dx, self.dy, tuple(self.origin)) == (
            other.nx, other.ny, other.dx, other.dy, tuple(other.origin),
        )


def generate_mesh(domain, resolution_m: float) -> PlateMesh:
    """Cover a domain rectangle with near-square elements of the given size.

    ``domain`` needs ``origin``, ``width_m`` and ``height_m`` attributes.
    """
    if not resolution_m > 0:
        raise ValueError(f"mesh resolution must be positive, got {resolution_m}")
    limit = min(domain.width_m, domain.height_m) / 4.0
    if resolution_m > limit:
        raise ValueError(
            f"mesh resolution {resolution_m} m too coarse; must be <= min(width, height)/4 = {limit:.6g} m"
        )
    nx = max(int(round(domain.width_m / resolution_m)), 2)
    ny = max(int(round(domain.height_m / resolution_m)), 2)
    return PlateMesh(
        nx=nx, ny=ny,
        dx=domain.width_m / nx, dy=domain.height_m / ny,
        origin=ProjectedPoint(*domain.origin),
    )


def assign_materials(mesh: PlateMesh, field_or_triple) -> PlateMesh:
    """Return a copy of ``mesh`` carrying per-element materials.

    Accepts a ``MaterialField`` on the element grid or a uniform
    ``(h, E, nu)`` triple.
    """
    if isinstance(field_or_triple, MaterialField):
        mat = field_or_triple
        if mat.shape != (mesh.ny, mesh.nx):
            raise ValueError(f"material grid {mat.shape} does not match element grid {(mesh.ny, mesh.nx)}")
    else:
        h, E, nu = field_or_triple
        mat = MaterialField.uniform((mesh.ny, mesh.nx), h, E, nu)
    mat.validate()
    return replace(mesh, materials=mat)


def constrained_dofs(mesh: PlateMesh, bc: str) -> np.ndarray:
    """Sorted global DOF ids fixed by the boundary condition."""
    nodes = mesh.boundary_nodes
    if bc == "clamped_all":
        return np.sort((3 * nodes[:, None] + np.arange(3)).ravel())
    if bc == "simply_supported_all":
        return 3 * nodes
    raise ValueError(f"boundary condition must be one of {BOUNDARY_CONDITIONS}, got {bc!r}")
