from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, TypeVar

from dotenv import load_dotenv

PACKAGE_DIR = Path(__file__).resolve().parent.parent
ROOT_DIR = PACKAGE_DIR.parent

load_dotenv(ROOT_DIR / ".env")

T = TypeVar("T", int, float)


@dataclass(frozen=True)
class SolverSettings:
    log_level: str
    refine_steps: int
    residual_tolerance: float
    workers: int
    error_webhook_url: str


def _read_first(names: Sequence[str], default: str) -> str:
    """앞쪽 이름이 우선. 공백뿐인 값은 설정되지 않은 것으로 본다."""
    for name in names:
        value = (os.getenv(name) or "").strip()
        if value:
            return value
    return default


def _read_number(names: Sequence[str], default: T, cast: Callable[[str], T]) -> T:
    raw = _read_first(names, "")
    if not raw:
        return default
    try:
        return cast(raw)
    except ValueError:
        return default


def _normalize_level(value: str) -> str:
    return (value or "INFO").strip().upper() or "INFO"


def get_solver_settings(
    *,
    refine_steps_default: int = 1,
    residual_tolerance_default: float = 1e-10,
    workers_default: int = 1,
) -> SolverSettings:
    # 음수 refine/worker 값은 의미가 없으므로 하한을 걸어 둔다.
    return SolverSettings(
        log_level=_normalize_level(_read_first(("NLBH_LOG_LEVEL", "LOG_LEVEL"), "INFO")),
        refine_steps=max(0, _read_number(("NLBH_REFINE_STEPS",), refine_steps_default, int)),
        residual_tolerance=_read_number(("NLBH_RESIDUAL_TOLERANCE",), residual_tolerance_default, float),
        workers=max(1, _read_number(("NLBH_WORKERS",), workers_default, int)),
        error_webhook_url=_read_first(("NLBH_ERROR_WEBHOOK_URL",), ""),
    )
