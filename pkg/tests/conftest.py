from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

_ENV_KEYS = (
    "NLBH_LOG_LEVEL",
    "LOG_LEVEL",
    "NLBH_REFINE_STEPS",
    "NLBH_RESIDUAL_TOLERANCE",
    "NLBH_WORKERS",
    "NLBH_ERROR_WEBHOOK_URL",
    "NLBH_N_CELLS",
    "NLBH_C_1D",
    "NLBH_C_2D",
    "NLBH_SWEEP_LEVELS",
)


@pytest.fixture(autouse=True)
def _clean_solver_env(monkeypatch):
    # 로컬 .env 나 셸 환경이 테스트 결과를 바꾸지 않도록 설정을 초기화한다.
    for key in _ENV_KEYS:
        monkeypatch.delenv(key, raising=False)
    from nonlocal_bh.experiments.config import get_settings

    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def affine_problem():
    """u = α + β·x 형태의 해석해 팩토리. f ≡ 0."""
    from nonlocal_bh.experiments.problems import ManufacturedProblem

    def _make(dim: int, alpha: float = 0.3, beta=(1.5, -0.7)):
        coef = np.asarray(beta[:dim], dtype=float)
        return ManufacturedProblem(
            name=f"affine{dim}d",
            dim=dim,
            u_gt=lambda x: alpha + x @ coef,
            grad_u_gt=lambda x: np.tile(coef, (x.shape[0], 1)),
            f=lambda x: np.zeros(x.shape[0]),
        )

    return _make


@pytest.fixture
def quadratic_problem():
    """1D u = x², f ≡ 0 (Δ²u = 0)."""
    from nonlocal_bh.experiments.problems import ManufacturedProblem

    return ManufacturedProblem(
        name="quadratic1d",
        dim=1,
        u_gt=lambda x: x[:, 0] ** 2,
        grad_u_gt=lambda x: 2.0 * x[:, :1],
        f=lambda x: np.zeros(x.shape[0]),
    )
