from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal, Sequence

import numpy as np

from nonlocal_bh.core.errors import InvalidArgumentError, InvalidDataError

Side = Literal["left", "right"]

_LOCAL = np.arange(4)


@dataclass(frozen=True)
class TensorMesh:
    """[0,1]^d 위의 균등 텐서 메쉬. 축마다 3N+1 개의 cubic 노드 s_j = j·h/3."""

    n_cells: int
    dim: int = 1
    h: float = field(init=False)

    def __post_init__(self) -> None:
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise InvalidArgumentError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        if self.dim not in (1, 2):
            raise InvalidArgumentError(f"Unsupported dimension: {self.dim}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "h", 1.0 / self.n_cells)

    @property
    def n_dofs_per_dim(self) -> int:
        return 3 * self.n_cells + 1

    @property
    def n_dofs(self) -> int:
        return self.n_dofs_per_dim**self.dim

    @cached_property
    def nodes(self) -> np.ndarray:
        # j/(3N) 로 계산해 s_0 = 0, s_{3N} = 1 이 정확히 성립하게 한다.
        nodes = np.arange(self.n_dofs_per_dim, dtype=float) / (3 * self.n_cells)
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def cell_bounds(self) -> np.ndarray:
        bounds = self.nodes[::3].copy()
        bounds.setflags(write=False)
        return bounds

    def cell(self, i: int) -> tuple[float, float]:
        return float(self.cell_bounds[i]), float(self.cell_bounds[i + 1])

    def cell_index(self, s, side: Side = "left") -> np.ndarray:
        """s 를 포함하는 셀 번호. 셀 경계에서는 side 로 왼쪽/오른쪽 셀을 고른다."""
        s_arr = np.asarray(s, dtype=float)
        k = np.searchsorted(self.cell_bounds, s_arr, side=side) - 1
        return np.clip(k, 0, self.n_cells - 1)


@dataclass(frozen=True)
class DofIndex:
    indices: tuple[int, ...]

    def linear(self, mesh: TensorMesh) -> int:
        if len(self.indices) != mesh.dim:
            raise InvalidArgumentError(f"DofIndex has {len(self.indices)} entries, mesh dim is {mesh.dim}")
        n = mesh.n_dofs_per_dim
        out = 0
        for j in self.indices:
            _check_index(mesh, j)
            out = out * n + j
        return out

    @classmethod
    def from_linear(cls, mesh: TensorMesh, k: int) -> "DofIndex":
        if not 0 <= k < mesh.n_dofs:
            raise InvalidArgumentError(f"Linear dof index out of range: {k}")
        n = mesh.n_dofs_per_dim
        if mesh.dim == 1:
            return cls((k,))
        return cls((k // n, k % n))


def _check_index(mesh: TensorMesh, j: int) -> None:
    if not 0 <= j <= 3 * mesh.n_cells:
        raise InvalidArgumentError(f"Basis index out of range: {j}")


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise InvalidArgumentError(f"side must be 'left' or 'right', got {side!r}")


def _cell_nodes(mesh: TensorMesh, cells: np.ndarray) -> np.ndarray:
    return mesh.nodes[3 * cells[..., None] + _LOCAL]


def _local_values(mesh: TensorMesh, s: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """셀 안의 4개 Lagrange 함수 값, shape (M, 4).

    곱 형태 그대로 계산해야 노드에서 정확히 0/1 이 나온다.
    """
    xs = _cell_nodes(mesh, cells)
    diff = s[:, None] - xs
    out = np.empty_like(diff)
    for k in range(4):
        others = [m for m in range(4) if m != k]
        num = diff[:, others[0]] * diff[:, others[1]] * diff[:, others[2]]
        den = (
            (xs[:, k] - xs[:, others[0]])
            * (xs[:, k] - xs[:, others[1]])
            * (xs[:, k] - xs[:, others[2]])
        )
        out[:, k] = num / den
    return out


def _local_derivs(mesh: TensorMesh, s: np.ndarray, cells: np.ndarray) -> np.ndarray:
    xs = _cell_nodes(mesh, cells)
    diff = s[:, None] - xs
    out = np.empty_like(diff)
    for k in range(4):
        o0, o1, o2 = [m for m in range(4) if m != k]
        num = diff[:, o1] * diff[:, o2] + diff[:, o0] * diff[:, o2] + diff[:, o0] * diff[:, o1]
        den = (xs[:, k] - xs[:, o0]) * (xs[:, k] - xs[:, o1]) * (xs[:, k] - xs[:, o2])
        out[:, k] = num / den
    return out


def _scatter(mesh: TensorMesh, local: np.ndarray, cells: np.ndarray) -> np.ndarray:
    out = np.zeros((local.shape[0], mesh.n_dofs_per_dim))
    rows = np.arange(local.shape[0])[:, None]
    out[rows, 3 * cells[:, None] + _LOCAL] = local
    return out


def _as_coords(s) -> np.ndarray:
    s_arr = np.atleast_1d(np.asarray(s, dtype=float)).ravel()
    if np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
        raise InvalidArgumentError("Evaluation coordinates must lie in [0, 1]")
    return s_arr


def basis_matrix(mesh: TensorMesh, s) -> np.ndarray:
    """모든 1D 기저 함수의 값, shape (len(s), 3N+1)."""
    s_arr = _as_coords(s)
    cells = mesh.cell_index(s_arr, "left")
    return _scatter(mesh, _local_values(mesh, s_arr, cells), cells)


def basis_deriv_matrix(mesh: TensorMesh, s, side: Side = "left") -> np.ndarray:
    _check_side(side)
    s_arr = _as_coords(s)
    cells = mesh.cell_index(s_arr, side)
    return _scatter(mesh, _local_derivs(mesh, s_arr, cells), cells)


def basis_eval(mesh: TensorMesh, j: int, s):
    _check_index(mesh, j)
    values = basis_matrix(mesh, s)[:, j]
    return float(values[0]) if np.ndim(s) == 0 else values


def basis_deriv(mesh: TensorMesh, j: int, s, side: Side = "left"):
    _check_index(mesh, j)
    values = basis_deriv_matrix(mesh, s, side)[:, j]
    return float(values[0]) if np.ndim(s) == 0 else values


def multi_basis_eval(mesh: TensorMesh, dof: DofIndex, x: Sequence[float]) -> float:
    if len(dof.indices) != mesh.dim or len(x) != mesh.dim:
        raise InvalidArgumentError("dof and point must match the mesh dimension")
    value = 1.0
    for j, coord in zip(dof.indices, x):
        value *= basis_eval(mesh, j, float(coord))
    return value


def node_grid(mesh: TensorMesh) -> np.ndarray:
    """모든 노드 좌표, shape (n_dofs, dim). 2D 는 (j₁, j₂) row-major."""
    if mesh.dim == 1:
        return mesh.nodes[:, None].copy()
    g1, g2 = np.meshgrid(mesh.nodes, mesh.nodes, indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def interpolate(mesh: TensorMesh, values: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """V_h 로의 노드 보간. values 는 (M, dim) 좌표 배열을 받아 (M,) 을 돌려주는 함수."""
    coeffs = np.asarray(values(node_grid(mesh)), dtype=float).reshape(-1)
    if coeffs.shape[0] != mesh.n_dofs:
        raise InvalidDataError(f"Expected {mesh.n_dofs} nodal values, got {coeffs.shape[0]}")
    if not np.all(np.isfinite(coeffs)):
        bad = int(np.flatnonzero(~np.isfinite(coeffs))[0])
        raise InvalidDataError(f"Non-finite nodal value | node={tuple(node_grid(mesh)[bad])}")
    return coeffs


def evaluate_field(mesh: TensorMesh, coeffs: np.ndarray, points) -> np.ndarray:
    """V_h 원소(계수 벡터)를 임의의 점들에서 평가한다."""
    pts = np.asarray(points, dtype=float).reshape(-1, mesh.dim)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.n_dofs,):
        raise InvalidArgumentError(f"Coefficient vector must have length {mesh.n_dofs}")
    if mesh.dim == 1:
        return basis_matrix(mesh, pts[:, 0]) @ coeffs
    n = mesh.n_dofs_per_dim
    b1 = basis_matrix(mesh, pts[:, 0])
    b2 = basis_matrix(mesh, pts[:, 1])
    return np.sum((b1 @ coeffs.reshape(n, n)) * b2, axis=1)
