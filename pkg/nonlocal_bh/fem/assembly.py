from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from nonlocal_bh.core.errors import AssemblyError, InvalidArgumentError, InvalidDataError
from nonlocal_bh.fem.kernel import KernelParams, gaussian_moments, unit_interval_mass
from nonlocal_bh.fem.mesh import TensorMesh, basis_matrix, node_grid
from nonlocal_bh.fem.quadrature import composite_layered_rule, simpson38_node_weights

logger = logging.getLogger(__name__)

_LOCAL = np.arange(4)


class BoundaryProblem(Protocol):
    """조립에 필요한 문제 데이터. 모든 함수는 (M, dim) 좌표 배열을 받는다."""

    dim: int

    def f(self, x: np.ndarray) -> np.ndarray: ...

    def a(self, x: np.ndarray) -> np.ndarray: ...

    def normal_derivative(self, x: np.ndarray, normal: Sequence[float]) -> np.ndarray: ...


@dataclass(frozen=True)
class Edge:
    name: str
    axis: int  # 고정되는 좌표축
    value: float
    normal: tuple[float, float]


# 2D 경계 네 변과 바깥 법선.
EDGES: tuple[Edge, ...] = (
    Edge("x1=0", 0, 0.0, (-1.0, 0.0)),
    Edge("x1=1", 0, 1.0, (1.0, 0.0)),
    Edge("x2=0", 1, 0.0, (0.0, -1.0)),
    Edge("x2=1", 1, 1.0, (0.0, 1.0)),
)


def _others(k: int) -> list[int]:
    return [m for m in range(4) if m != k]


def basis_kernel_table(mesh: TensorMesh, s, eta: float) -> np.ndarray:
    """I[s, j] = ∫_0^1 exp(−η²(s−t)²)·ψ_j(t) dt, shape (len(s), 3N+1).

    셀마다 ψ_j 를 r = t − s 에 대한 3차식으로 전개하면 계수는 d_m = s − x_m 의
    기본 대칭식이 되고, 적분은 f₀..f₃ 의 선형 결합이 된다.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float)).ravel()
    cells = np.arange(mesh.n_cells)
    xs = mesh.nodes[3 * cells[:, None] + _LOCAL]  # (N, 4)
    d = s_arr[:, None, None] - xs[None, :, :]  # (M, N, 4)
    lo = xs[None, :, 0] - s_arr[:, None]
    hi = xs[None, :, 3] - s_arr[:, None]
    moments = gaussian_moments(eta, lo, hi)  # (4, M, N)

    table = np.zeros((s_arr.shape[0], mesh.n_dofs_per_dim))
    for k in range(4):
        o0, o1, o2 = _others(k)
        d0, d1, d2 = d[..., o0], d[..., o1], d[..., o2]
        den = (xs[:, k] - xs[:, o0]) * (xs[:, k] - xs[:, o1]) * (xs[:, k] - xs[:, o2])
        c0 = d0 * d1 * d2
        c1 = d0 * d1 + d0 * d2 + d1 * d2
        c2 = d0 + d1 + d2
        value = (c0 * moments[0] + c1 * moments[1] + c2 * moments[2] + moments[3]) / den
        table[:, 3 * cells + k] += value
    return table


def basis_kernel_integral(mesh: TensorMesh, j: int, s: float, eta: float) -> float:
    if not 0 <= j <= 3 * mesh.n_cells:
        raise InvalidArgumentError(f"Basis index out of range: {j}")
    if not 0.0 <= s <= 1.0:
        raise InvalidArgumentError(f"s must lie in [0, 1], got {s!r}")
    return float(basis_kernel_table(mesh, [s], eta)[0, j])


@dataclass(frozen=True)
class InnerTables:
    """외부 구적점 좌표(1D)별로 미리 계산한 내부 적분 테이블.

    2D 값은 모두 1D 테이블의 곱/합으로 복원된다 (Gaussian 커널의 차원 분리).
    """

    mesh: TensorMesh
    kernel: KernelParams
    points: np.ndarray
    integrals: np.ndarray
    basis: np.ndarray
    mass_1d: np.ndarray
    near_zero: np.ndarray
    near_one: np.ndarray
    boundary_normal: dict[str, float] = field(default_factory=dict)
    edge_projection: dict[str, np.ndarray] = field(default_factory=dict)
    _index: dict[float, int] = field(default_factory=dict, repr=False)

    def row(self, coord: float) -> int:
        try:
            return self._index[float(coord)]
        except KeyError:
            raise InvalidArgumentError(f"Unregistered quadrature coordinate: {coord!r}") from None

    def rows(self, coords) -> np.ndarray:
        return np.array([self.row(c) for c in np.asarray(coords, dtype=float).ravel()], dtype=int)

    def _point_rows(self, x) -> list[int]:
        point = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        if point.shape[0] != self.mesh.dim:
            raise InvalidArgumentError(f"Point dimension mismatch: {point.shape[0]} != {self.mesh.dim}")
        return [self.row(v) for v in point]

    def mass(self, x) -> float:
        rows = self._point_rows(x)
        return float(self.kernel.c_delta * np.prod(self.mass_1d[rows]))

    def source(self, x) -> float:
        rows = self._point_rows(x)
        if self.mesh.dim == 1:
            return float(self.source_grid(np.array(rows))[0])
        return float(self.source_grid(np.array(rows[:1]), np.array(rows[1:]))[0, 0])

    def source_grid(self, ia: np.ndarray, ib: np.ndarray | None = None) -> np.ndarray:
        """G_b(x) = 2∫_{∂Ω} R̄_δ(x,y)·b(y) dS(y). 1D 는 벡터, 2D 는 (ia × ib) 격자."""
        half_c = 0.5 * self.kernel.c_delta
        if self.mesh.dim == 1:
            b0 = self.boundary_normal.get("x=0", 0.0)
            b1 = self.boundary_normal.get("x=1", 0.0)
            return half_c * (self.near_zero[ia] * b0 + self.near_one[ia] * b1)
        if ib is None:
            ib = ia
        grid = np.zeros((ia.shape[0], ib.shape[0]))
        if not self.edge_projection:
            return grid
        for edge in EDGES:
            near = self.near_zero if edge.value == 0.0 else self.near_one
            proj = self.edge_projection[edge.name]
            if edge.axis == 0:
                grid += np.outer(near[ia], proj[ib])
            else:
                grid += np.outer(proj[ia], near[ib])
        return half_c * grid


def _require_finite(values: np.ndarray, points: np.ndarray, what: str, error=AssemblyError) -> None:
    values = np.asarray(values)
    if np.all(np.isfinite(values)):
        return
    bad = int(np.flatnonzero(~np.isfinite(values.ravel()))[0])
    point = np.asarray(points).reshape(values.size, -1)[bad]
    if error is AssemblyError:
        raise AssemblyError(f"Non-finite {what}", point)
    raise error(f"Non-finite {what} | point={tuple(float(v) for v in point)}")


def _edge_points(edge: Edge, free: np.ndarray) -> np.ndarray:
    pts = np.empty((free.shape[0], 2))
    pts[:, edge.axis] = edge.value
    pts[:, 1 - edge.axis] = free
    return pts


def build_inner_tables(
    mesh: TensorMesh,
    kernel: KernelParams,
    points,
    problem: BoundaryProblem | None = None,
) -> InnerTables:
    if mesh.dim != kernel.dim:
        raise InvalidArgumentError(f"Mesh dim {mesh.dim} != kernel dim {kernel.dim}")
    coords: list[float] = []
    index: dict[float, int] = {}
    # 경계 좌표 0, 1 은 penalty 항에 항상 필요하다.
    for value in [*np.asarray(points, dtype=float).ravel().tolist(), 0.0, 1.0]:
        if not 0.0 <= value <= 1.0:
            raise InvalidArgumentError(f"Outer point outside [0, 1]: {value!r}")
        if value not in index:
            index[value] = len(coords)
            coords.append(value)
    coord_arr = np.asarray(coords)
    eta = kernel.eta

    integrals = basis_kernel_table(mesh, coord_arr, eta)
    boundary_normal: dict[str, float] = {}
    edge_projection: dict[str, np.ndarray] = {}
    if problem is not None:
        if problem.dim != mesh.dim:
            raise InvalidArgumentError(f"Problem dim {problem.dim} != mesh dim {mesh.dim}")
        if mesh.dim == 1:
            ends = np.array([[0.0], [1.0]])
            b_vals = np.array(
                [
                    problem.normal_derivative(ends[:1], (-1.0,))[0],
                    problem.normal_derivative(ends[1:], (1.0,))[0],
                ],
                dtype=float,
            )
            _require_finite(b_vals, ends, "boundary datum b", InvalidDataError)
            boundary_normal = {"x=0": float(b_vals[0]), "x=1": float(b_vals[1])}
        else:
            for edge in EDGES:
                # 변 위의 b 를 piecewise-cubic 노드 보간으로 바꿔 I 테이블로 적분한다.
                pts = _edge_points(edge, mesh.nodes)
                b_vals = np.asarray(problem.normal_derivative(pts, edge.normal), dtype=float)
                _require_finite(b_vals, pts, "boundary datum b", InvalidDataError)
                edge_projection[edge.name] = integrals @ b_vals

    return InnerTables(
        mesh=mesh,
        kernel=kernel,
        points=coord_arr,
        integrals=integrals,
        basis=basis_matrix(mesh, coord_arr),
        mass_1d=unit_interval_mass(eta, coord_arr),
        near_zero=np.exp(-((eta * coord_arr) ** 2)),
        near_one=np.exp(-((eta * (1.0 - coord_arr)) ** 2)),
        boundary_normal=boundary_normal,
        edge_projection=edge_projection,
        _index=index,
    )


def eval_g_row(
    tables: InnerTables, kernel: KernelParams, mesh: TensorMesh, x
) -> tuple[np.ndarray, float]:
    """g(x) = G(x)·u − G_b(x) 의 행 벡터 G(x) 와 스칼라 G_b(x)."""
    rows = tables._point_rows(x)
    scale = kernel.c_delta / kernel.delta**2
    weighted = [tables.basis[r] * tables.mass_1d[r] for r in rows]
    inner = [tables.integrals[r] for r in rows]
    if mesh.dim == 1:
        row = scale * (weighted[0] - inner[0])
    else:
        row = scale * (np.kron(weighted[0], weighted[1]) - np.kron(inner[0], inner[1]))
    return row, tables.source(x)


def _on_boundary(x: np.ndarray) -> bool:
    return bool(np.any((x == 0.0) | (x == 1.0)))


def eval_h_row(
    tables: InnerTables, kernel: KernelParams, mesh: TensorMesh, x, a: float
) -> tuple[np.ndarray, float]:
    """h(x) = a(x)·k(x) − H(x)·u 의 행 벡터 H(x) 와 스칼라 a(x)·k(x)."""
    point = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if not _on_boundary(point):
        raise InvalidArgumentError(f"Point is not on the boundary: {tuple(point)}")
    rows = tables._point_rows(point)
    if mesh.dim == 1:
        row = kernel.c_delta * tables.integrals[rows[0]]
    else:
        row = kernel.c_delta * np.kron(tables.integrals[rows[0]], tables.integrals[rows[1]])
    return row, float(a) * tables.mass(point)


@dataclass(frozen=True)
class LinearSystem:
    """이산화된 F_n(u) = uᵀ·matrix·u − 2·rhsᵀ·u + constant."""

    matrix: np.ndarray
    rhs: np.ndarray
    constant: float
    dim: int
    n_cells: int
    delta: float
    xi: float

    @property
    def size(self) -> int:
        return int(self.rhs.shape[0])

    def energy(self, u: np.ndarray) -> float:
        u = np.asarray(u, dtype=float)
        return float(u @ (self.matrix @ u) - 2.0 * (self.rhs @ u) + self.constant)

    def dump(self, path: str | Path) -> Path:
        """디버그 덤프: "dim n", rhs, 하삼각 행렬(행 단위), 유효숫자 17자리."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"{self.dim} {self.size}\n")
            for value in self.rhs:
                fh.write(f"{value:.17g}\n")
            for i in range(self.size):
                fh.write(" ".join(f"{v:.17g}" for v in self.matrix[i, : i + 1]))
                fh.write("\n")
        logger.info("system dumped | path=%s n=%s", path, self.size)
        return path


def _check_inputs(mesh: TensorMesh, kernel: KernelParams, problem: BoundaryProblem, xi: float) -> None:
    if not math.isfinite(xi) or xi <= 0:
        raise InvalidArgumentError(f"Penalty weight xi must be positive, got {xi!r}")
    if not (mesh.dim == kernel.dim == problem.dim):
        raise InvalidArgumentError(
            f"Dimension mismatch | mesh={mesh.dim} kernel={kernel.dim} problem={problem.dim}"
        )


@dataclass(frozen=True)
class _OuterData:
    tables: InnerTables
    points: np.ndarray
    weights: np.ndarray
    rows: np.ndarray
    weighted_basis: np.ndarray  # D = diag(m)·Ψ
    inner: np.ndarray  # Q = I 테이블
    source: np.ndarray  # G_b, 1D 벡터 또는 2D 격자


def _outer_data(mesh: TensorMesh, kernel: KernelParams, problem: BoundaryProblem) -> _OuterData:
    rule = composite_layered_rule(mesh, kernel.delta)
    tables = build_inner_tables(mesh, kernel, rule.points, problem)
    rows = tables.rows(rule.points)
    if mesh.dim == 1:
        source = tables.source_grid(rows)
        _require_finite(source, rule.points, "boundary source G_b")
    else:
        source = tables.source_grid(rows, rows)
        g1, g2 = np.meshgrid(rule.points, rule.points, indexing="ij")
        _require_finite(source, np.column_stack([g1.ravel(), g2.ravel()]), "boundary source G_b")
    return _OuterData(
        tables=tables,
        points=rule.points,
        weights=rule.weights,
        rows=rows,
        weighted_basis=tables.basis[rows] * tables.mass_1d[rows][:, None],
        inner=tables.integrals[rows],
        source=source,
    )


def _load_vector(mesh: TensorMesh, problem: BoundaryProblem) -> np.ndarray:
    nodes = node_grid(mesh)
    f_vals = np.asarray(problem.f(nodes), dtype=float).reshape(-1)
    _require_finite(f_vals, nodes, "load f")
    wn = simpson38_node_weights(mesh)
    weights = wn if mesh.dim == 1 else np.kron(wn, wn)
    return weights * f_vals


def _boundary_values(problem: BoundaryProblem, pts: np.ndarray) -> np.ndarray:
    a_vals = np.asarray(problem.a(pts), dtype=float).reshape(-1)
    _require_finite(a_vals, pts, "boundary datum a")
    return a_vals


def assemble_system(
    mesh: TensorMesh,
    kernel: KernelParams,
    problem: BoundaryProblem,
    xi: float,
) -> LinearSystem:
    _check_inputs(mesh, kernel, problem, xi)
    data = _outer_data(mesh, kernel, problem)
    tables = data.tables
    c = kernel.c_delta
    scale = c / kernel.delta**2
    inv_xi = 1.0 / xi
    w = data.weights
    D, Q = data.weighted_basis, data.inner

    if mesh.dim == 1:
        G = scale * (D - Q)
        matrix = G.T @ (w[:, None] * G)
        rhs = G.T @ (w * data.source)
        constant = float(np.sum(w * data.source**2))
        for coord in (0.0, 1.0):
            r = tables.row(coord)
            H = c * tables.integrals[r]
            ak = _boundary_values(problem, np.array([[coord]]))[0] * c * tables.mass_1d[r]
            matrix += inv_xi * np.outer(H, H)
            rhs += inv_xi * ak * H
            constant += inv_xi * ak * ak
    else:
        # G = scale·(D⊗D − Q⊗Q), W = w⊗w 이므로 GᵀWG 는 1D 블록의 Kronecker 곱 네 개로 분해된다.
        DD = D.T @ (w[:, None] * D)
        DQ = D.T @ (w[:, None] * Q)
        QQ = Q.T @ (w[:, None] * Q)
        matrix = np.kron(DD, DD)
        matrix -= np.kron(DQ, DQ)
        matrix -= np.kron(DQ.T, DQ.T)
        matrix += np.kron(QQ, QQ)
        matrix *= scale * scale

        weighted_source = np.outer(w, w) * data.source
        rhs = scale * (D.T @ weighted_source @ D - Q.T @ weighted_source @ Q).ravel()
        constant = float(np.sum(weighted_source * data.source))

        for edge in EDGES:
            r = tables.row(edge.value)
            q = tables.integrals[r]
            pts = _edge_points(edge, data.points)
            ak = _boundary_values(problem, pts) * c * tables.mass_1d[data.rows] * tables.mass_1d[r]
            projected = c * (Q.T @ (w * ak))
            if edge.axis == 1:
                matrix += (inv_xi * c * c) * np.kron(QQ, np.outer(q, q))
                rhs += inv_xi * np.kron(projected, q)
            else:
                matrix += (inv_xi * c * c) * np.kron(np.outer(q, q), QQ)
                rhs += inv_xi * np.kron(q, projected)
            constant += inv_xi * float(np.sum(w * ak * ak))

    rhs = rhs + _load_vector(mesh, problem)
    # 덧셈은 교환법칙이 성립하므로 (A + Aᵀ)/2 는 비트 단위로 대칭이다.
    matrix = 0.5 * (matrix + matrix.T)
    if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs)) and math.isfinite(constant)):
        raise AssemblyError("Non-finite entries in assembled system")

    logger.info(
        "system assembled | dim=%s N=%s delta=%s xi=%s n_dofs=%s outer_points=%s",
        mesh.dim,
        mesh.n_cells,
        kernel.delta,
        xi,
        rhs.shape[0],
        data.points.shape[0] ** mesh.dim,
    )
    return LinearSystem(
        matrix=matrix,
        rhs=rhs,
        constant=constant,
        dim=mesh.dim,
        n_cells=mesh.n_cells,
        delta=kernel.delta,
        xi=float(xi),
    )


def evaluate_functional(
    mesh: TensorMesh,
    kernel: KernelParams,
    problem: BoundaryProblem,
    xi: float,
    u: np.ndarray,
) -> float:
    """행렬을 거치지 않고 g, h 를 구적점에서 직접 계산해 이산 F_n(u) 를 구한다."""
    _check_inputs(mesh, kernel, problem, xi)
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_dofs,):
        raise InvalidArgumentError(f"Coefficient vector must have length {mesh.n_dofs}")
    data = _outer_data(mesh, kernel, problem)
    tables = data.tables
    c = kernel.c_delta
    scale = c / kernel.delta**2
    w = data.weights
    D, Q = data.weighted_basis, data.inner

    if mesh.dim == 1:
        g = scale * (D @ u - Q @ u) - data.source
        interior = float(np.sum(w * g * g))
        penalty = 0.0
        for coord in (0.0, 1.0):
            r = tables.row(coord)
            ak = _boundary_values(problem, np.array([[coord]]))[0] * c * tables.mass_1d[r]
            h = ak - c * (tables.integrals[r] @ u)
            penalty += h * h
    else:
        n = mesh.n_dofs_per_dim
        U = u.reshape(n, n)
        g = scale * (D @ U @ D.T - Q @ U @ Q.T) - data.source
        interior = float(np.sum(np.outer(w, w) * g * g))
        penalty = 0.0
        for edge in EDGES:
            r = tables.row(edge.value)
            q = tables.integrals[r]
            pts = _edge_points(edge, data.points)
            ak = _boundary_values(problem, pts) * c * tables.mass_1d[data.rows] * tables.mass_1d[r]
            field_vals = Q @ U @ q if edge.axis == 1 else Q @ U.T @ q
            h = ak - c * field_vals
            penalty += float(np.sum(w * h * h))

    load = float(_load_vector(mesh, problem) @ u)
    return interior - 2.0 * load + penalty / xi
