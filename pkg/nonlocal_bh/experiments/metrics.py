from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from nonlocal_bh.core.errors import InvalidArgumentError, InvalidDataError
from nonlocal_bh.experiments.problems import ManufacturedProblem
from nonlocal_bh.fem.mesh import TensorMesh, basis_deriv_matrix, evaluate_field, node_grid
from nonlocal_bh.fem.solver import SolutionField


def _rms(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(values))))


def _coefficients(solution: SolutionField, mesh: TensorMesh) -> np.ndarray:
    coeffs = np.asarray(solution.coefficients, dtype=float)
    if coeffs.shape != (mesh.n_dofs,):
        raise InvalidArgumentError(f"Solution has {coeffs.shape[0]} coefficients, mesh needs {mesh.n_dofs}")
    return coeffs


def boundary_node_indices(mesh: TensorMesh) -> tuple[np.ndarray, np.ndarray]:
    """(bd_idx, cnr_idx): 경계 노드와 모서리 노드의 선형 인덱스."""
    n = mesh.n_dofs_per_dim
    if mesh.dim == 1:
        ends = np.array([0, n - 1])
        return ends, ends
    j1, j2 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    edge1 = (j1 == 0) | (j1 == n - 1)
    edge2 = (j2 == 0) | (j2 == n - 1)
    linear = (j1 * n + j2).ravel()
    return linear[(edge1 | edge2).ravel()], linear[(edge1 & edge2).ravel()]


def compute_rmse(solution: SolutionField, problem: ManufacturedProblem, mesh: TensorMesh) -> float:
    coeffs = _coefficients(solution, mesh)
    return _rms(problem.exact(node_grid(mesh)) - coeffs)


def _discrete_normal_derivative_1d(mesh: TensorMesh, coeffs: np.ndarray) -> np.ndarray:
    left = basis_deriv_matrix(mesh, [0.0], "right")[0] @ coeffs
    right = basis_deriv_matrix(mesh, [1.0], "left")[0] @ coeffs
    return np.array([-left, right])


def _discrete_normal_derivative_2d(mesh: TensorMesh, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """모서리를 제외한 경계 노드에서의 바깥 법선 도함수와 그 좌표."""
    n = mesh.n_dofs_per_dim
    U = coeffs.reshape(n, n)
    d0 = basis_deriv_matrix(mesh, [0.0], "right")[0]
    d1 = basis_deriv_matrix(mesh, [1.0], "left")[0]
    inner = mesh.nodes[1:-1]
    zeros = np.zeros_like(inner)
    ones = np.ones_like(inner)
    values = np.concatenate(
        [
            -(d0 @ U)[1:-1],
            (d1 @ U)[1:-1],
            -(U @ d0)[1:-1],
            (U @ d1)[1:-1],
        ]
    )
    points = np.concatenate(
        [
            np.column_stack([zeros, inner]),
            np.column_stack([ones, inner]),
            np.column_stack([inner, zeros]),
            np.column_stack([inner, ones]),
        ]
    )
    return values, points


def compute_bd_errors(
    solution: SolutionField, problem: ManufacturedProblem, mesh: TensorMesh
) -> tuple[float, float]:
    coeffs = _coefficients(solution, mesh)
    nodes = node_grid(mesh)
    bd_idx, _ = boundary_node_indices(mesh)
    bd_error = _rms(coeffs[bd_idx] - problem.exact(nodes[bd_idx]))

    if mesh.dim == 1:
        discrete = _discrete_normal_derivative_1d(mesh, coeffs)
        exact = problem.b(np.array([[0.0], [1.0]]))
    else:
        discrete, points = _discrete_normal_derivative_2d(mesh, coeffs)
        exact = problem.b(points)
    return bd_error, _rms(discrete - exact)


def reference_rmse(
    mesh: TensorMesh,
    solution: SolutionField,
    reference_mesh: TensorMesh,
    reference: SolutionField,
) -> float:
    """기준(더 촘촘한) 비국소 해를 거친 메쉬 노드에서 평가해 비교한다."""
    coeffs = _coefficients(solution, mesh)
    ref_coeffs = _coefficients(reference, reference_mesh)
    ref_values = evaluate_field(reference_mesh, ref_coeffs, node_grid(mesh))
    return _rms(coeffs - ref_values)


def fit_slope(pairs: Iterable[Sequence[float]]) -> float:
    data = np.asarray(list(pairs), dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
        raise InvalidDataError("fit_slope needs at least two (delta, error) pairs")
    if not np.all(np.isfinite(data)) or np.any(data <= 0):
        raise InvalidDataError("fit_slope needs positive finite deltas and errors")
    if np.unique(data[:, 0]).shape[0] < 2:
        raise InvalidDataError("fit_slope needs at least two distinct deltas")
    slope, _ = np.polyfit(np.log(data[:, 0]), np.log(data[:, 1]), 1)
    return float(slope)
