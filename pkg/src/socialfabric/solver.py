"""Global assembly, constraint elimination and the sparse solve."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .element import unit_stiffness
from .mesh import PlateMesh, constrained_dofs

logger = logging.getLogger(__name__)

# Precision of the reference matrix used for residuals during refinement.
EXTENDED = np.longdouble
MAX_REFINEMENT = 6


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class GlobalSystem:
    """Reduced system ``K u_free = f`` after eliminating constrained DOFs.

    ``K_exact`` holds the same matrix in extended precision; ``K`` is its
    float64 rounding, used for the factorisation.
    """

    K: sp.csr_matrix
    f: np.ndarray
    free: np.ndarray
    ndof: int
    K_exact: sp.csr_matrix | None = None

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def reference(self) -> sp.csr_matrix:
        return self.K if self.K_exact is None else self.K_exact


@dataclass(frozen=True)
class Solution:
    """Full DOF vector plus residual diagnostics of the equilibrated system.

    Rows of ``K`` mix force and moment units (N vs N*m), so residuals are
    measured after the symmetric diagonal scaling that makes every diagonal
    entry one. ``residual`` is ``|r| / |b|``; ``backward_error`` is
    ``|r| / (|A| |y| + |b|)``, the quantity checked against the tolerance.
    """

    u: np.ndarray
    residual: float
    backward_error: float
    method: str
    refinement_steps: int = 0


def assemble_stiffness(mesh: PlateMesh, dtype=np.float64) -> sp.csr_matrix:
    """Full (unconstrained) global stiffness matrix in CSR form."""
    mat = mesh.require_materials()
    K1, K2 = (k.astype(dtype) for k in unit_stiffness(float(mesh.dx), float(mesh.dy)))
    E = mat.E.ravel().astype(dtype)
    nu = mat.nu.ravel().astype(dtype)
    geom = mat.h.ravel().astype(dtype) ** 3 / (12 * (1 - nu**2))
    ke = E[:, None, None] * (geom[:, None, None] * (K1[None] + nu[:, None, None] * K2[None]))
    dofs = mesh.element_dofs
    rows = np.repeat(dofs, 12, axis=1).ravel()
    cols = np.tile(dofs, (1, 12)).ravel()
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(mesh.ndof, mesh.ndof)).tocsr()
    K.sum_duplicates()
    return K


def assemble_and_constrain(mesh: PlateMesh, bc: str, loads: np.ndarray) -> GlobalSystem:
    loads = np.asarray(loads, dtype=float)
    if loads.shape != (mesh.ndof,):
        raise ValueError(f"load vector length {loads.shape} does not match {mesh.ndof} DOFs")
    fixed = constrained_dofs(mesh, bc)
    if fixed.size == 0:
        raise SolverError("singular system: no constrained DOFs")
    free = np.setdiff1d(np.arange(mesh.ndof), fixed)
    K = assemble_stiffness(mesh, EXTENDED)
    Kr = K[free][:, free].tocsr()
    return GlobalSystem(K=Kr.astype(np.float64), f=loads[free], free=free, ndof=mesh.ndof, K_exact=Kr)


def _equilibrate(K: sp.spmatrix) -> np.ndarray:
    diag = np.asarray(K.diagonal(), dtype=np.float64)
    if np.any(diag <= 0):
        raise SolverError("stiffness matrix has non-positive diagonal entries")
    return 1.0 / np.sqrt(diag)


def residual_norms(A: sp.spmatrix, y: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Relative residual and normwise backward error (infinity norms)."""
    r = np.abs(A @ y - b).max()
    nb = np.abs(b).max()
    nA = abs(A).sum(axis=1).max()
    denom = nA * np.abs(y).max() + nb
    return float(r / nb) if nb else float(r), float(r / denom) if denom else 0.0


def _scaled(sys: GlobalSystem, s: np.ndarray) -> sp.csr_matrix:
    A = sys.reference
    S = sp.diags(s.astype(A.dtype))
    return (S @ A @ S).tocsr()


def check_residual(sys: GlobalSystem, u_free: np.ndarray) -> tuple[float, float]:
    """Residual diagnostics of a candidate solution in the equilibrated norm."""
    s = _equilibrate(sys.K)
    A = _scaled(sys, s)
    return residual_norms(A, (u_free / s).astype(A.dtype), (s * sys.f).astype(A.dtype))


def solve(sys: GlobalSystem, tol: float = 1e-10) -> Solution:
    """Solve the reduced system and scatter back to the full DOF vector.

    The matrix is symmetrically Jacobi-scaled first because translational and
    rotational entries differ by many orders of magnitude. A sparse LU of the
    float64 matrix with a symmetric fill-reducing ordering is tried first and
    refined against the extended-precision matrix until the correction
    stalls, which removes the float64 rounding of the entries from the
    answer. Preconditioned CG is the fallback. Either way the backward error
    must meet ``tol``.
    """
    u = np.zeros(sys.ndof)
    if not np.any(sys.f):
        return Solution(u=u, residual=0.0, backward_error=0.0, method="trivial")

    s = _equilibrate(sys.K)
    A_ref = _scaled(sys, s)
    As = A_ref.astype(np.float64).tocsc()
    b_ref = s.astype(A_ref.dtype) * sys.f.astype(A_ref.dtype)
    bs = s * sys.f

    method, steps = "splu", 0
    try:
        lu = spla.splu(As, permc_spec="MMD_AT_PLUS_A")
        y = lu.solve(bs).astype(A_ref.dtype)
        for steps in range(1, MAX_REFINEMENT + 1):
            dy = lu.solve(np.asarray(b_ref - A_ref @ y, dtype=np.float64))
            y += dy
            if np.abs(dy).max() <= np.finfo(np.float64).eps * np.abs(y).max():
                break
    except (RuntimeError, MemoryError) as exc:
        logger.warning("sparse factorisation failed (%s); falling back to CG", exc)
        method = "cg"
        y, info = spla.cg(As, bs, rtol=tol * 1e-2, maxiter=20 * As.shape[0])
        if info != 0:
            raise SolverError(f"CG did not converge (info={info})") from exc
        y = y.astype(A_ref.dtype)

    res, berr = residual_norms(A_ref, y, b_ref)
    if not np.isfinite(berr) or berr > tol:
        raise SolverError(
            f"backward error {berr:.3e} exceeds tolerance {tol:.1e} "
            f"(relative residual {res:.3e}, {method})"
        )
    u[sys.free] = np.asarray(s * y, dtype=np.float64)
    return Solution(u=u, residual=res, backward_error=berr, method=method, refinement_steps=steps)


def solve_mesh(mesh: PlateMesh, bc: str, loads: np.ndarray, tol: float = 1e-10) -> Solution:
    return solve(assemble_and_constrain(mesh, bc, loads), tol)
