from __future__ import annotations

import math
from functools import lru_cache
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from nonlocal_bh.core.settings import ROOT_DIR, get_solver_settings
from nonlocal_bh.experiments.problems import get_problem

StudyKind = Literal["delta_sweep", "c_sweep"]


class StudyDefaults(BaseSettings):
    """스윕 기본값. NLBH_* 환경 변수 또는 .env 로 덮어쓸 수 있다."""

    model_config = SettingsConfigDict(env_prefix="NLBH_", env_file=ROOT_DIR / ".env", extra="ignore")

    n_cells: int = 20
    c_1d: float = 1000.0
    c_2d: float = 10.0
    delta_base_1d: float = 0.1
    delta_base_2d: float = 0.2
    sweep_levels: int = 5
    problem_1d: str = "poly10"
    problem_2d: str = "xlog"


@lru_cache(maxsize=1)
def get_settings() -> StudyDefaults:
    return StudyDefaults()


def default_deltas(dim: int) -> list[float]:
    settings = get_settings()
    base = settings.delta_base_1d if dim == 1 else settings.delta_base_2d
    return [base * 2.0 ** (-k) for k in range(settings.sweep_levels)]


def default_c(dim: int) -> float:
    settings = get_settings()
    return settings.c_1d if dim == 1 else settings.c_2d


def default_problem(dim: int) -> str:
    settings = get_settings()
    return settings.problem_1d if dim == 1 else settings.problem_2d


def _all_positive(values: List[float]) -> bool:
    return all(math.isfinite(v) and v > 0 for v in values)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dim: Literal[1, 2]
    n_cells: int = Field(gt=0)
    deltas: List[float]
    c: float = Field(gt=0, allow_inf_nan=False)
    problem: str
    study: StudyKind = "delta_sweep"
    c_values: List[float] = Field(default_factory=list)
    output_path: Path
    dump_system: Optional[Path] = None
    reference_n: Optional[int] = Field(default=None, gt=0)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_sweep(self) -> "ExperimentConfig":
        if not self.deltas:
            raise ValueError("deltas must be non-empty.")
        if not _all_positive(self.deltas):
            raise ValueError("deltas must all be positive and finite.")
        if self.study == "c_sweep":
            if not self.c_values:
                raise ValueError("c_sweep requires c_values.")
            if not _all_positive(self.c_values):
                raise ValueError("c_values must all be positive and finite.")
        problem = get_problem(self.problem)
        if problem.dim != self.dim:
            raise ValueError(f"Problem {self.problem!r} is {problem.dim}D, config is {self.dim}D.")
        return self

    def run_parameters(self) -> list[tuple[float, float]]:
        """(delta, c) 실행 목록. c_sweep 은 deltas × c_values 순서."""
        if self.study == "c_sweep":
            return [(delta, c) for delta in self.deltas for c in self.c_values]
        return [(delta, self.c) for delta in self.deltas]


def build_config(
    *,
    dim: int,
    output_path: Path | str,
    n_cells: int | None = None,
    deltas: List[float] | None = None,
    c: float | None = None,
    c_values: List[float] | None = None,
    problem: str | None = None,
    study: str = "delta_sweep",
    dump_system: Path | str | None = None,
    reference_n: int | None = None,
    workers: int | None = None,
) -> ExperimentConfig:
    """빠진 값은 StudyDefaults 로 채워 ExperimentConfig 를 만든다."""
    settings = get_settings()
    return ExperimentConfig(
        dim=dim,
        n_cells=settings.n_cells if n_cells is None else n_cells,
        deltas=default_deltas(dim) if deltas is None else deltas,
        c=default_c(dim) if c is None else c,
        c_values=c_values or [],
        problem=default_problem(dim) if problem is None else problem,
        study=study,
        output_path=Path(output_path),
        dump_system=Path(dump_system) if dump_system is not None else None,
        reference_n=reference_n,
        workers=get_solver_settings().workers if workers is None else workers,
    )
