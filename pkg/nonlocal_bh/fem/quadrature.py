from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from nonlocal_bh.core.errors import InvalidArgumentError
from nonlocal_bh.fem.mesh import TensorMesh

SUPPORTED_GL_POINTS = frozenset({2, 5, 15})
BOUNDARY_LAYER_SIGMAS = 3.0
_NEWTON_TOL = 1e-15
_NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class QuadRule:
    points: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).reshape(-1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if points.shape != weights.shape:
            raise InvalidArgumentError(
                f"points/weights length mismatch: {points.shape[0]} vs {weights.shape[0]}"
            )
        a, b = (float(v) for v in self.interval)
        if points.size and (points.min() < a or points.max() > b):
            raise InvalidArgumentError(f"Quadrature points fall outside [{a}, {b}]")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "interval", (a, b))

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.points)))


@dataclass(frozen=True)
class TensorQuadRule:
    rx: QuadRule
    ry: QuadRule

    @property
    def points(self) -> np.ndarray:
        gx, gy = np.meshgrid(self.rx.points, self.ry.points, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    @property
    def weights(self) -> np.ndarray:
        # w_ij = w_i·w_j, (i, j) row-major
        return np.kron(self.rx.weights, self.ry.weights)

    def __len__(self) -> int:
        return len(self.rx) * len(self.ry)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.points)))


def _legendre_with_derivative(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1, n * (x * p1 - p0) / (x * x - 1.0)


@lru_cache(maxsize=None)
def _reference_gauss_legendre(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """[-1,1] 위 n점 Gauss–Legendre 노드/가중치. Legendre 점화식 + Newton 반복."""
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAX_ITER):
        p, dp = _legendre_with_derivative(x, n)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) < _NEWTON_TOL:
            break
    # 최종 노드에서 도함수를 다시 계산해 가중치에 쓴다.
    _, dp = _legendre_with_derivative(x, n)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return tuple(x[order].tolist()), tuple(w[order].tolist())


def gauss_legendre(n: int, interval: Sequence[float]) -> QuadRule:
    if n not in SUPPORTED_GL_POINTS:
        raise InvalidArgumentError(f"Unsupported Gauss-Legendre order: {n}")
    a, b = (float(v) for v in interval)
    if b < a:
        raise InvalidArgumentError(f"Invalid interval [{a}, {b}]")
    ref_x, ref_w = _reference_gauss_legendre(n)
    half = (b - a) / 2.0
    mid = (a + b) / 2.0
    points = np.clip(half * np.asarray(ref_x) + mid, a, b)
    return QuadRule(points=points, weights=half * np.asarray(ref_w), interval=(a, b))


def simpson38_cell(cell: Sequence[float]) -> QuadRule:
    a, b = (float(v) for v in cell)
    if not b > a:
        raise InvalidArgumentError(f"Degenerate cell [{a}, {b}]")
    width = b - a
    points = np.array([a, a + width / 3.0, a + 2.0 * width / 3.0, b])
    weights = width / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return QuadRule(points=points, weights=weights, interval=(a, b))


def concatenate(rules: Sequence[QuadRule], interval: Sequence[float]) -> QuadRule:
    return QuadRule(
        points=np.concatenate([r.points for r in rules]),
        weights=np.concatenate([r.weights for r in rules]),
        interval=tuple(interval),
    )


def layered_cell_rule(cell: Sequence[float], delta: float) -> QuadRule:
    """셀 양 끝 3δ 경계층을 따로 적분하는 15점 규칙.

    6δ < h 이면 [a, a+3δ], [a+3δ, b−3δ], [b−3δ, b] 에 각각 5점 GL,
    그렇지 않으면 셀 전체에 15점 GL 하나.
    """
    a, b = (float(v) for v in cell)
    if not math.isfinite(delta) or delta <= 0:
        raise InvalidArgumentError(f"delta must be positive, got {delta!r}")
    if not b > a:
        raise InvalidArgumentError(f"Degenerate cell [{a}, {b}]")
    layer = BOUNDARY_LAYER_SIGMAS * delta
    if 2.0 * layer < b - a:
        panels = [(a, a + layer), (a + layer, b - layer), (b - layer, b)]
        return concatenate([gauss_legendre(5, p) for p in panels], (a, b))
    return gauss_legendre(15, (a, b))


def composite_layered_rule(mesh: TensorMesh, delta: float) -> QuadRule:
    """셀별 layered rule 을 이어 붙인 [0,1] 위의 1D 외부 적분 규칙."""
    rules = [layered_cell_rule(mesh.cell(i), delta) for i in range(mesh.n_cells)]
    return concatenate(rules, (0.0, 1.0))


def simpson38_node_weights(mesh: TensorMesh) -> np.ndarray:
    """복합 Simpson 3/8 가중치를 1D 기저 노드 위에 누적한 것. 노드가 규칙 점과 일치한다."""
    weights = np.zeros(mesh.n_dofs_per_dim)
    for i in range(mesh.n_cells):
        weights[3 * i : 3 * i + 4] += simpson38_cell(mesh.cell(i)).weights
    return weights


def tensorize(rx: QuadRule, ry: QuadRule) -> TensorQuadRule:
    return TensorQuadRule(rx=rx, ry=ry)
