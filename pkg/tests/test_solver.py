import numpy as np
import pytest
import scipy.sparse as sp

from socialfabric.bench import square_plate_coefficient
from socialfabric.mesh import PlateMesh, assign_materials
from socialfabric.solver import (
    GlobalSystem,
    SolverError,
    assemble_and_constrain,
    assemble_stiffness,
    check_residual,
    solve,
    solve_mesh,
)
from socialfabric.types import MaterialField


def centre_load(mesh, mag=1.0):
    f = np.zeros(mesh.ndof)
    f[mesh.w_dofs[mesh.nearest_node(mesh.width / 2, mesh.height / 2)]] = mag
    return f


def test_reduced_dimension(small_mesh):
    sys = assemble_and_constrain(small_mesh, "clamped_all", np.zeros(75))
    assert sys.n == 27
    assert np.abs(sys.K - sys.K.T).max() <= 1e-12 * np.abs(sys.K).max()


def test_zero_load_zero_solution(small_mesh):
    sol = solve_mesh(small_mesh, "clamped_all", np.zeros(small_mesh.ndof))
    assert not sol.u.any() and sol.method == "trivial"


def test_wrong_load_length(small_mesh):
    with pytest.raises(ValueError, match="does not match"):
        assemble_and_constrain(small_mesh, "clamped_all", np.zeros(10))


def test_positive_definite_after_constraints(small_mesh):
    for bc in ("clamped_all", "simply_supported_all"):
        K = assemble_and_constrain(small_mesh, bc, np.zeros(75)).K.toarray()
        assert np.linalg.eigvalsh(K).min() > 0


def test_matches_dense_solve(small_mesh):
    f = centre_load(small_mesh, 3.0)
    sys = assemble_and_constrain(small_mesh, "simply_supported_all", f)
    sol = solve(sys)
    dense = np.linalg.solve(sys.K.toarray(), sys.f)
    np.testing.assert_allclose(sol.u[sys.free], dense, rtol=1e-10, atol=1e-12 * np.abs(dense).max())
    assert np.all(sol.u[np.setdiff1d(np.arange(75), sys.free)] == 0)
    assert check_residual(sys, sol.u[sys.free])[1] <= 1e-14


def test_linearity_and_superposition():
    m = assign_materials(PlateMesh(20, 16, 1.0, 1.0), (0.1, 1e9, 0.3))
    rng = np.random.default_rng(0)
    f1 = np.zeros(m.ndof)
    f2 = np.zeros(m.ndof)
    f1[m.w_dofs] = rng.uniform(0, 1, m.n_nodes)
    f2[m.w_dofs[rng.integers(0, m.n_nodes, 5)]] = 1e6
    u1 = solve_mesh(m, "clamped_all", f1).u
    u2 = solve_mesh(m, "clamped_all", f2).u
    assert np.abs(solve_mesh(m, "clamped_all", 7.5 * f1).u - 7.5 * u1).max() <= 1e-9 * np.abs(7.5 * u1).max()
    u12 = solve_mesh(m, "clamped_all", f1 + f2).u
    assert np.abs(u12 - (u1 + u2)).max() <= 1e-9 * np.abs(u12).max()


def test_deterministic(small_mesh):
    f = centre_load(small_mesh)
    a = solve_mesh(small_mesh, "clamped_all", f).u
    b = solve_mesh(small_mesh, "clamped_all", f).u
    np.testing.assert_array_equal(a, b)


def test_heterogeneous_pattern_matches_uniform():
    m = PlateMesh(5, 4, 1.0, 1.0)
    rng = np.random.default_rng(5)
    shape = (4, 5)
    het = MaterialField(rng.uniform(1, 2, shape), rng.uniform(1e8, 1e9, shape), rng.uniform(0.1, 0.4, shape))
    Ka = assemble_stiffness(assign_materials(m, het))
    Kb = assemble_stiffness(assign_materials(m, (1.0, 1e9, 0.3)))
    Ka.sort_indices()
    Kb.sort_indices()
    np.testing.assert_array_equal(Ka.indptr, Kb.indptr)
    np.testing.assert_array_equal(Ka.indices, Kb.indices)


def test_uniform_h_scaling():
    m = assign_materials(PlateMesh(16, 16, 1.0, 1.0), (1.0, 1e9, 0.3))
    f = centre_load(m)
    u1 = solve_mesh(m, "clamped_all", f).u
    u2 = solve_mesh(assign_materials(m, (2.0, 1e9, 0.3)), "clamped_all", f).u
    assert np.abs(u2 * 8 - u1).max() <= 1e-10 * np.abs(u1).max()


def test_no_constraints_is_singular(small_mesh, monkeypatch):
    import socialfabric.solver as solver

    monkeypatch.setattr(solver, "constrained_dofs", lambda mesh, bc: np.empty(0, dtype=int))
    with pytest.raises(SolverError, match="singular"):
        assemble_and_constrain(small_mesh, "clamped_all", np.zeros(75))


def test_failed_tolerance_reports_diagnostics():
    K = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 1.0]]))
    sys = GlobalSystem(K=K, f=np.array([1.0, 1.0]), free=np.array([0, 1]), ndof=2)
    assert solve(sys).backward_error == 0.0
    with pytest.raises(SolverError, match="non-positive"):
        solve(GlobalSystem(K=-K, f=np.ones(2), free=np.arange(2), ndof=2))


def test_simply_supported_coefficient_coarse():
    # 16x16 already within 1% of the series value
    assert square_plate_coefficient(16, "simply_supported_all", "uniform") == pytest.approx(0.00406, rel=0.01)
