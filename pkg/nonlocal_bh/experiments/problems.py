from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from nonlocal_bh.core.errors import InconsistentProblemError, InvalidArgumentError

logger = logging.getLogger(__name__)

PointFn = Callable[[np.ndarray], np.ndarray]

FD_STEP = 1e-2
FD_RELATIVE_TOL = 1e-2


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim <= 1:
        pts = pts.reshape(-1, dim) if dim > 1 else pts.reshape(-1, 1)
    if pts.shape[1] != dim:
        raise InvalidArgumentError(f"Expected points of dimension {dim}, got shape {pts.shape}")
    return pts


def outward_normals(points: np.ndarray) -> np.ndarray:
    """경계 점의 바깥 법선. 모서리(2D)는 법선이 정의되지 않으므로 거부한다."""
    on_low = points == 0.0
    on_high = points == 1.0
    hits = on_low.sum(axis=1) + on_high.sum(axis=1)
    if np.any(hits == 0):
        bad = points[int(np.flatnonzero(hits == 0)[0])]
        raise InvalidArgumentError(f"Point is not on the boundary: {tuple(bad)}")
    if points.shape[1] > 1 and np.any(hits > 1):
        bad = points[int(np.flatnonzero(hits > 1)[0])]
        raise InvalidArgumentError(f"Outward normal undefined at corner: {tuple(bad)}")
    return on_high.astype(float) - on_low.astype(float)


@dataclass(frozen=True)
class ManufacturedProblem:
    """해석해 u_gt 와 f = Δ²u_gt, clamped 경계 데이터 a = u_gt, b = ∂u_gt/∂n.

    모든 함수는 (M, dim) 좌표 배열을 받는다.
    """

    name: str
    dim: int
    u_gt: PointFn
    grad_u_gt: PointFn
    f: PointFn

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise InvalidArgumentError(f"Unsupported dimension: {self.dim}")
        if not self.name:
            raise InvalidArgumentError("Problem name must be non-empty")

    def exact(self, x) -> np.ndarray:
        return np.asarray(self.u_gt(_as_points(x, self.dim)), dtype=float).reshape(-1)

    def gradient(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        return np.asarray(self.grad_u_gt(pts), dtype=float).reshape(pts.shape[0], self.dim)

    def a(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        on_boundary = np.any((pts == 0.0) | (pts == 1.0), axis=1)
        if not np.all(on_boundary):
            raise InvalidArgumentError("a(x) is only defined on the boundary")
        return self.exact(pts)

    def b(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        return np.sum(self.gradient(pts) * outward_normals(pts), axis=1)

    def normal_derivative(self, x, normal: Sequence[float]) -> np.ndarray:
        n = np.asarray(normal, dtype=float).reshape(-1)
        if n.shape[0] != self.dim:
            raise InvalidArgumentError(f"Normal must have {self.dim} components")
        return self.gradient(x) @ n


def _fd_bilaplacian(u: PointFn, pts: np.ndarray, step: float) -> np.ndarray:
    dim = pts.shape[1]
    second = np.array([1.0, -2.0, 1.0])
    fourth = np.array([1.0, -4.0, 6.0, -4.0, 1.0])

    def shifted(offsets: np.ndarray) -> np.ndarray:
        return np.asarray(u(pts + step * offsets), dtype=float).reshape(-1)

    out = np.zeros(pts.shape[0])
    for axis in range(dim):
        for k, coef in zip(range(-2, 3), fourth):
            off = np.zeros(dim)
            off[axis] = k
            out += coef * shifted(off)
    if dim == 2:
        for i, ci in zip(range(-1, 2), second):
            for j, cj in zip(range(-1, 2), second):
                out += 2.0 * ci * cj * shifted(np.array([i, j], dtype=float))
    return out / step**4


def _interior_samples(dim: int) -> np.ndarray:
    line = np.linspace(0.1, 0.9, 9)
    if dim == 1:
        return line[:, None]
    g1, g2 = np.meshgrid(np.linspace(0.2, 0.8, 5), np.linspace(0.2, 0.8, 5), indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def check_consistency(problem: ManufacturedProblem, *, step: float = FD_STEP) -> float:
    """내부 표본점에서 FD Δ²u_gt 와 f 의 최대 차이를 돌려준다. 허용치를 넘으면 예외."""
    pts = _interior_samples(problem.dim)
    f_vals = np.asarray(problem.f(pts), dtype=float).reshape(-1)
    fd_vals = _fd_bilaplacian(problem.u_gt, pts, step)
    gap = float(np.max(np.abs(fd_vals - f_vals)))
    tol = FD_RELATIVE_TOL * max(1.0, float(np.max(np.abs(f_vals))))
    if not np.isfinite(gap) or gap > tol:
        raise InconsistentProblemError(
            f"f does not match the bilaplacian of u_gt | problem={problem.name} gap={gap:.3e} tol={tol:.3e}"
        )
    return gap


def builtin_poly10() -> ManufacturedProblem:
    return ManufacturedProblem(
        name="poly10",
        dim=1,
        u_gt=lambda x: x[:, 0] ** 10,
        grad_u_gt=lambda x: 10.0 * x[:, :1] ** 9,
        f=lambda x: 5040.0 * x[:, 0] ** 6,
    )


def builtin_xlog() -> ManufacturedProblem:
    # ln(1+x₂) 는 log1p 로 계산한다.
    def u_gt(x: np.ndarray) -> np.ndarray:
        return x[:, 0] * np.log1p(x[:, 1])

    def grad(x: np.ndarray) -> np.ndarray:
        return np.column_stack([np.log1p(x[:, 1]), x[:, 0] / (1.0 + x[:, 1])])

    def f(x: np.ndarray) -> np.ndarray:
        return -6.0 * x[:, 0] / (1.0 + x[:, 1]) ** 4

    return ManufacturedProblem(name="xlog", dim=2, u_gt=u_gt, grad_u_gt=grad, f=f)


_REGISTRY: dict[str, ManufacturedProblem] = {}


def register_problem(problem: ManufacturedProblem, *, replace: bool = False) -> ManufacturedProblem:
    if problem.name in _REGISTRY and not replace:
        raise InvalidArgumentError(f"Problem already registered: {problem.name}")
    _REGISTRY[problem.name] = problem
    logger.debug("problem registered | name=%s dim=%s", problem.name, problem.dim)
    return problem


def get_problem(name: str) -> ManufacturedProblem:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise InvalidArgumentError(
            f"Unknown problem: {name!r} (available: {', '.join(available_problems())})"
        ) from None


def available_problems() -> list[str]:
    return sorted(_REGISTRY)


def custom_problem(
    u_gt: PointFn,
    grad: PointFn,
    f: PointFn,
    dim: int,
    name: str = "custom",
) -> ManufacturedProblem:
    problem = ManufacturedProblem(name=name, dim=dim, u_gt=u_gt, grad_u_gt=grad, f=f)
    check_consistency(problem)
    return register_problem(problem, replace=True)


register_problem(builtin_poly10())
register_problem(builtin_xlog())
