from __future__ import annotations

import logging

import numpy as np
import pytest

from nonlocal_bh.core.errors import InvalidDataError, NotPositiveDefiniteError
from nonlocal_bh.experiments.problems import get_problem
from nonlocal_bh.fem.assembly import LinearSystem, assemble_system
from nonlocal_bh.fem.kernel import KernelParams
from nonlocal_bh.fem.mesh import TensorMesh
from nonlocal_bh.fem.solver import solve_spd


def _system(matrix: np.ndarray, rhs: np.ndarray) -> LinearSystem:
    return LinearSystem(matrix=matrix, rhs=rhs, constant=0.0, dim=1, n_cells=3, delta=0.1, xi=1.0)


def _assembled(dim: int, n_cells: int, delta: float, c: float) -> LinearSystem:
    problem = get_problem("poly10" if dim == 1 else "xlog")
    mesh = TensorMesh(n_cells=n_cells, dim=dim)
    return assemble_system(mesh, KernelParams(delta=delta, dim=dim), problem, xi=delta / c)


def test_zero_rhs_gives_exact_zero(rng):
    m = rng.normal(size=(10, 10))

    solution = solve_spd(_system(m.T @ m + np.eye(10), np.zeros(10)))

    assert np.all(solution.coefficients == 0.0)
    assert solution.residual_norm == 0.0


def test_recovers_known_solution(rng):
    m = rng.normal(size=(10, 10))
    matrix = m.T @ m + np.eye(10)
    expected = rng.normal(size=10)

    solution = solve_spd(_system(matrix, matrix @ expected))

    np.testing.assert_allclose(solution.coefficients, expected, atol=1e-10)
    assert solution.residual_norm <= 1e-10


def test_indefinite_matrix_is_rejected():
    matrix = np.diag([1.0, -2.0, 3.0])

    with pytest.raises(NotPositiveDefiniteError):
        solve_spd(_system(matrix, np.ones(3)))


def test_non_finite_system_is_rejected():
    matrix = np.eye(3)
    matrix[1, 1] = np.nan

    with pytest.raises(InvalidDataError):
        solve_spd(_system(matrix, np.ones(3)))


def test_shape_mismatch_is_rejected():
    with pytest.raises(InvalidDataError):
        solve_spd(_system(np.eye(3), np.ones(4)))


def test_residual_above_tolerance_is_logged(monkeypatch, caplog, rng):
    monkeypatch.setenv("NLBH_RESIDUAL_TOLERANCE", "-1")
    m = rng.normal(size=(6, 6))

    with caplog.at_level(logging.WARNING, logger="nonlocal_bh.fem.solver"):
        solve_spd(_system(m.T @ m + np.eye(6), rng.normal(size=6)))

    assert any("residual above tolerance" in r.getMessage() for r in caplog.records)


def test_refinement_steps_can_be_disabled(rng):
    m = rng.normal(size=(8, 8))
    system = _system(m.T @ m + np.eye(8), rng.normal(size=8))

    plain = solve_spd(system, refine_steps=0)
    refined = solve_spd(system, refine_steps=2)

    np.testing.assert_allclose(plain.coefficients, refined.coefficients, rtol=1e-12)


def test_assembled_one_dimensional_system_solves_accurately():
    system = _assembled(1, 20, 0.025, 1000.0)

    solution = solve_spd(system)

    assert solution.residual_norm <= 1e-10
    assert np.all(np.isfinite(solution.coefficients))


def test_solving_twice_is_bit_identical():
    system = _assembled(1, 10, 0.05, 1000.0)

    first = solve_spd(system).coefficients
    second = solve_spd(system).coefficients

    assert np.array_equal(first, second)


@pytest.mark.parametrize("dim,c", [(1, 1000.0), (2, 10.0)])
@pytest.mark.parametrize("n_cells", [10, 20])
@pytest.mark.parametrize("delta", [0.1, 0.05, 0.025])
def test_systems_are_symmetric_positive_definite(dim, c, n_cells, delta):
    system = _assembled(dim, n_cells, delta, c)

    assert np.array_equal(system.matrix, system.matrix.T)
    solution = solve_spd(system)
    assert solution.residual_norm <= 1e-10


@pytest.mark.parametrize(
    "dim,n_cells,delta,c",
    [
        (1, 20, 0.0125, 1000.0),
        (2, 4, 0.1, 10.0),
    ],
)
def test_minimizer_is_not_improved_by_perturbations(dim, n_cells, delta, c, rng):
    system = _assembled(dim, n_cells, delta, c)
    u_star = solve_spd(system).coefficients
    f_star = system.energy(u_star)
    slack = 1e-9 * max(1.0, abs(f_star))

    for _ in range(100):
        v = rng.normal(size=u_star.shape[0])
        v /= np.linalg.norm(v)
        for t in (1e-2, -1e-2):
            assert system.energy(u_star + t * v) - f_star >= -slack
