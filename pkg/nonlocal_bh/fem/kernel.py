from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from nonlocal_bh.core.errors import InvalidArgumentError

_SUPPORTED_DIMS = frozenset({1, 2})
_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class KernelParams:
    """Gaussian kernel R_δ = K_δ = c_δ·exp(−|x−y|²/δ²) 와 파생 상수.

    R̄_δ 는 R(s)=C·e^{−4s} 의 꼬리 적분이라 R_δ/4 로 닫힌 형태가 된다.
    """

    delta: float
    dim: int
    c_delta: float = field(init=False)
    eta: float = field(init=False)
    rbar_ratio: float = field(init=False, default=0.25)
    kernel_mass: float = field(init=False, default=4.0)
    rbar_mass: float = field(init=False, default=1.0)

    def __post_init__(self) -> None:
        if self.dim not in _SUPPORTED_DIMS:
            raise InvalidArgumentError(f"Unsupported dimension: {self.dim}")
        if not math.isfinite(self.delta) or self.delta <= 0:
            raise InvalidArgumentError(f"delta must be positive, got {self.delta!r}")
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(
            self, "c_delta", 4.0 * math.pi ** (-self.dim / 2.0) * self.delta ** (-self.dim)
        )
        object.__setattr__(self, "eta", 1.0 / self.delta)
        if self.rbar_ratio * self.kernel_mass != self.rbar_mass:
            raise InvalidArgumentError("rbar_ratio * kernel_mass must equal rbar_mass")


def _as_point(params: KernelParams, x: float | Sequence[float] | np.ndarray) -> np.ndarray:
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if point.ndim != 1 or point.shape[0] != params.dim:
        raise InvalidArgumentError(
            f"Point dimension mismatch: expected {params.dim}, got shape {point.shape}"
        )
    return point


def kernel_eval(params: KernelParams, x, y) -> float:
    px = _as_point(params, x)
    py = _as_point(params, y)
    dist2 = float(np.sum((px - py) ** 2))
    return params.c_delta * math.exp(-dist2 / params.delta**2)


def rbar_eval(params: KernelParams, x, y) -> float:
    return params.rbar_ratio * kernel_eval(params, x, y)


def _erf_difference(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """erf(y) − erf(x). 같은 부호 꼬리에서는 erfc 차로 계산해 상쇄를 피한다."""
    both_pos = (x >= 0) & (y >= 0)
    both_neg = (x <= 0) & (y <= 0)
    plain = special.erf(y) - special.erf(x)
    pos = special.erfc(x) - special.erfc(y)
    neg = special.erfc(-y) - special.erfc(-x)
    return np.where(both_pos, pos, np.where(both_neg, neg, plain))


def _exp_difference(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """exp(−x²) − exp(−y²), expm1 기반."""
    ex = np.exp(-(x * x))
    ey = np.exp(-(y * y))
    gap = (y - x) * (y + x)
    # |x| <= |y| 이면 exp(−x²)·(1 − exp(−(y²−x²))), 아니면 대칭.
    left = ex * -np.expm1(-gap)
    right = ey * np.expm1(gap)
    return np.where(np.abs(x) <= np.abs(y), left, right)


def gaussian_moments(eta: float, a, b) -> np.ndarray:
    """∫_a^b r^k·exp(−η²r²) dr, k=0..3 를 한 번에 계산한다 (shape: (4, *broadcast)).

    f₀ 은 erf, f₁ 은 지수 함수, f₂/f₃ 는 f₀/f₁ 에 대한 점화식으로 얻는다.
    a > b 이면 부호가 뒤집힌 값이 나온다.
    """
    if not math.isfinite(eta) or eta <= 0:
        raise InvalidArgumentError(f"eta must be positive, got {eta!r}")
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    eta2 = eta * eta
    xa = eta * a_arr
    xb = eta * b_arr
    ea = np.exp(-(xa * xa))
    eb = np.exp(-(xb * xb))

    f0 = _SQRT_PI / (2.0 * eta) * _erf_difference(xa, xb)
    f1 = _exp_difference(xa, xb) / (2.0 * eta2)
    f2 = (a_arr * ea - b_arr * eb) / (2.0 * eta2) + f0 / (2.0 * eta2)
    f3 = (a_arr * a_arr * ea - b_arr * b_arr * eb) / (2.0 * eta2) + f1 / eta2
    return np.stack([f0, f1, f2, f3])


def gaussian_moment(k: int, eta: float, a, b):
    if k not in (0, 1, 2, 3):
        raise InvalidArgumentError(f"Moment order must be in 0..3, got {k!r}")
    value = gaussian_moments(eta, a, b)[k]
    return float(value) if value.ndim == 0 else value


def unit_interval_mass(eta: float, s) -> np.ndarray:
    """∫_0^1 exp(−η²(s−t)²) dt (정규화 상수 없이)."""
    s_arr = np.asarray(s, dtype=float)
    return gaussian_moments(eta, s_arr - 1.0, s_arr)[0]


def domain_mass(params: KernelParams, x) -> float:
    point = _as_point(params, x)
    return float(params.c_delta * np.prod(unit_interval_mass(params.eta, point)))
