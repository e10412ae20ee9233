"""Rectangular Kirchhoff plate element (12-DOF, non-conforming ACM family).

Each node carries ``(w, theta_x, theta_y)`` with ``theta_x = dw/dy`` (rotation
about the x-axis) and ``theta_y = -dw/dx`` (rotation about the y-axis). Nodes
are numbered counter-clockwise from the lower-left corner.

The element is built once in normalised coordinates ``xi, eta in [-1, 1]`` and
scaled to the physical half-sizes, so the same pair of unit matrices serves
every element of a structured mesh. The stiffness is ``D * (K1 + nu * K2)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mesh import PlateMesh
from .types import ForceDescriptor

logger = logging.getLogger(__name__)

# Monomial basis: exponents (p, q) of xi**p * eta**q.
_EXPONENTS = (
    (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3), (3, 1), (1, 3),
)
_NODE_XI = np.array([-1.0, 1.0, 1.0, -1.0])
_NODE_ETA = np.array([-1.0, -1.0, 1.0, 1.0])

# Constitutive splits: Dm = D * (C1 + nu * C2) acting on [w_xx, w_yy, 2 w_xy].
_C1 = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]])
_C2 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -0.5]])


def bending_stiffness(E, h, nu):
    """Flexural rigidity ``E h^3 / (12 (1 - nu^2))``.

    Written as ``E * (...)`` so that the result is exactly linear in ``E``.
    """
    return E * (np.asarray(h, dtype=float) ** 3 / (12.0 * (1.0 - np.asarray(nu, dtype=float) ** 2)))


def _monomial_row(xi, eta, dxi=0, deta=0):
    """Derivative ``d^(dxi+deta) / dxi^dxi deta^deta`` of each basis monomial."""
    row = np.zeros(len(_EXPONENTS))
    for k, (p, q) in enumerate(_EXPONENTS):
        if p < dxi or q < deta:
            continue
        cx = np.prod(np.arange(p, p - dxi, -1)) if dxi else 1.0
        cy = np.prod(np.arange(q, q - deta, -1)) if deta else 1.0
        row[k] = cx * cy * xi ** (p - dxi) * eta ** (q - deta)
    return row


@lru_cache(maxsize=None)
def _shape_coefficients() -> np.ndarray:
    """Coefficient matrix mapping normalised nodal DOFs (w, w_xi, w_eta) to monomials."""
    A = np.zeros((12, 12))
    for n in range(4):
        xi, eta = _NODE_XI[n], _NODE_ETA[n]
        A[3 * n] = _monomial_row(xi, eta)
        A[3 * n + 1] = _monomial_row(xi, eta, dxi=1)
        A[3 * n + 2] = _monomial_row(xi, eta, deta=1)
    return np.linalg.inv(A)


def _dof_transform(a: float, b: float) -> np.ndarray:
    """T with ``q_hat = T q``: (w, w_xi, w_eta) from (w, theta_x, theta_y)."""
    T = np.zeros((12, 12))
    for n in range(4):
        i = 3 * n
        T[i, i] = 1.0
        T[i + 1, i + 2] = -a  # w_xi = a * dw/dx = -a * theta_y
        T[i + 2, i + 1] = b  # w_eta = b * dw/dy = b * theta_x
    return T


def curvature_matrix(dx: float, dy: float, xi: float = 0.0, eta: float = 0.0) -> np.ndarray:
    """3x12 operator giving ``[w_xx, w_yy, 2 w_xy]`` at a normalised point."""
    a, b = dx / 2.0, dy / 2.0
    C = _shape_coefficients()
    rows = np.vstack([
        _monomial_row(xi, eta, dxi=2) / a**2,
        _monomial_row(xi, eta, deta=2) / b**2,
        2.0 * _monomial_row(xi, eta, dxi=1, deta=1) / (a * b),
    ])
    return rows @ C @ _dof_transform(a, b)


def shape_functions(dx: float, dy: float, xi: float, eta: float) -> np.ndarray:
    """Row vector N with ``w(xi, eta) = N @ q`` for physical nodal DOFs q."""
    a, b = dx / 2.0, dy / 2.0
    return _monomial_row(xi, eta) @ _shape_coefficients() @ _dof_transform(a, b)


@lru_cache(maxsize=64)
def unit_stiffness(dx: float, dy: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(K1, K2)`` such that ``K = D * (K1 + nu * K2)``.

    Integrated with 3x3 Gauss points, exact for the quartic integrands.
    """
    pts, wts = np.polynomial.legendre.leggauss(3)
    jac = (dx / 2.0) * (dy / 2.0)
    K1 = np.zeros((12, 12))
    K2 = np.zeros((12, 12))
    for xi, wx in zip(pts, wts):
        for eta, wy in zip(pts, wts):
            B = curvature_matrix(dx, dy, xi, eta)
            K1 += B.T @ _C1 @ B * (wx * wy * jac)
            K2 += B.T @ _C2 @ B * (wx * wy * jac)
    K1 = 0.5 * (K1 + K1.T)
    K2 = 0.5 * (K2 + K2.T)
    K1.setflags(write=False)
    K2.setflags(write=False)
    return K1, K2


def element_stiffness(dx: float, dy: float, E: float, nu: float, h: float) -> np.ndarray:
    """12x12 bending stiffness of one rectangular element.

    Args:
        dx, dy: Element side lengths in metres.
        E: Young's modulus in Pa.
        nu: Poisson's ratio, ``0 <= nu < 0.5``.
        h: Thickness in metres.
    """
    if not (E > 0 and h > 0 and 0 <= nu < 0.5):
        raise ValueError(f"invalid material (E={E}, nu={nu}, h={h})")
    K1, K2 = unit_stiffness(float(dx), float(dy))
    return E * ((h**3 / (12.0 * (1.0 - nu**2))) * (K1 + nu * K2))


# --------------------------------------------------------------------------- #
# Stress recovery
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class MomentState:
    kx: np.ndarray
    ky: np.ndarray
    kxy: np.ndarray
    Mx: np.ndarray
    My: np.ndarray
    Mxy: np.ndarray


@dataclass(frozen=True)
class SurfaceStress:
    """Bending stresses at the top surface (z = h/2), in Pa."""

    sx: np.ndarray
    sy: np.ndarray
    txy: np.ndarray

    @property
    def von_mises(self) -> np.ndarray:
        return von_mises(self.sx, self.sy, self.txy)


def von_mises(sx, sy, txy):
    return np.sqrt(np.maximum(sx * sx - sx * sy + sy * sy + 3.0 * txy * txy, 0.0))


def moments_from_curvature(kx, ky, kxy, E, nu, h) -> MomentState:
    """Moments per unit width; ``kxy`` is the tensor twist ``d2w/dxdy``."""
    D = bending_stiffness(E, h, nu)
    return MomentState(
        kx=kx, ky=ky, kxy=kxy,
        Mx=D * (kx + nu * ky),
        My=D * (ky + nu * kx),
        Mxy=D * (1.0 - nu) * kxy,
    )


def recover_stress(dx: float, dy: float, u_el: np.ndarray, E, nu, h) -> SurfaceStress:
    """Centre-point surface stress for one or many elements.

    ``u_el`` has shape ``(12,)`` or ``(n_elements, 12)``; material values are
    scalars or arrays broadcastable against the element axis.
    """
    B = curvature_matrix(dx, dy)
    curv = np.asarray(u_el, dtype=float) @ B.T
    kx, ky, kxy = curv[..., 0], curv[..., 1], 0.5 * curv[..., 2]
    m = moments_from_curvature(kx, ky, kxy, E, nu, h)
    h = np.asarray(h, dtype=float)
    scale = 6.0 / h**2
    return SurfaceStress(sx=scale * m.Mx, sy=scale * m.My, txy=scale * m.Mxy)


def mesh_stresses(mesh: PlateMesh, u: np.ndarray) -> SurfaceStress:
    """Surface stress at every element centre, shaped ``(ny, nx)``."""
    u_el = u[mesh.element_dofs]
    mat = mesh.require_materials()
    s = recover_stress(mesh.dx, mesh.dy, u_el, mat.E.ravel(), mat.nu.ravel(), mat.h.ravel())
    shape = (mesh.ny, mesh.nx)
    return SurfaceStress(sx=s.sx.reshape(shape), sy=s.sy.reshape(shape), txy=s.txy.reshape(shape))


# --------------------------------------------------------------------------- #
# Load discretisation
# --------------------------------------------------------------------------- #


def distribution_weights(distances: np.ndarray, kind: str, radius: float) -> np.ndarray:
    """Unnormalised nodal weights for a distributed load profile."""
    d = np.asarray(distances, dtype=float)
    inside = d <= radius
    if kind == "constant":
        w = inside.astype(float)
    elif kind == "linear":
        w = np.where(inside, 1.0 - d / radius, 0.0)
    elif kind == "gaussian":
        sigma = radius / 3.0
        w = np.where(inside, np.exp(-(d * d) / (2.0 * sigma * sigma)), 0.0)
    else:
        raise ValueError(f"unknown distribution {kind!r}")
    return w


def distribute_force(fd: ForceDescriptor, mesh: PlateMesh) -> np.ndarray:
    """Global load vector (length ``mesh.ndof``) with loads on w DOFs only.

    The nodal weights are renormalised so that the loads sum to the force
    magnitude. A distributed force whose radius captures no node with a
    positive weight falls back to a point load.
    """
    f = np.zeros(mesh.ndof)
    if add_force(f, fd, mesh):
        logger.warning(
            "%s force of radius %.1f m covers no node; applied as a point load", fd.distribution, fd.radius,
        )
    return f


def add_force(f: np.ndarray, fd: ForceDescriptor, mesh: PlateMesh) -> bool:
    """Accumulate one force descriptor into an existing load vector.

    Returns True when a distributed force had to fall back to a point load.
    """
    x, y = fd.location
    if not mesh.contains(x, y):
        raise ValueError(f"force location ({x:.1f}, {y:.1f}) m lies outside the mesh")
    if fd.magnitude == 0.0:
        return False
    if fd.distribution != "point":
        nodes, dist = mesh.nodes_within(x, y, fd.radius)
        w = distribution_weights(dist, fd.distribution, fd.radius)
        keep = w > 0.0
        if keep.any():
            nodes, w = nodes[keep], w[keep]
            f[mesh.w_dofs[nodes]] += fd.magnitude * (w / w.sum())
            return False
        logger.debug("%s force at (%.1f, %.1f) covers no node", fd.distribution, x, y)
    f[mesh.w_dofs[mesh.nearest_node(x, y)]] += fd.magnitude
    return fd.distribution != "point"
