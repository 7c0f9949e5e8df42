from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pandas as pd

from nonlocal_bh.core.errors import NonlocalBHError, StudyRunError
from nonlocal_bh.core.logging_config import RUN_PARAMS_ATTR
from nonlocal_bh.experiments.config import ExperimentConfig
from nonlocal_bh.experiments.metrics import compute_bd_errors, compute_rmse, fit_slope, reference_rmse
from nonlocal_bh.experiments.problems import ManufacturedProblem, get_problem
from nonlocal_bh.experiments.schemas import CSV_COLUMNS, REFERENCE_COLUMN, ErrorReport, StudySummary
from nonlocal_bh.fem.assembly import assemble_system
from nonlocal_bh.fem.kernel import KernelParams
from nonlocal_bh.fem.mesh import TensorMesh
from nonlocal_bh.fem.solver import SolutionField, solve_spd

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def _solve(
    problem: ManufacturedProblem,
    n_cells: int,
    delta: float,
    c: float,
    dump_path: Path | None = None,
) -> tuple[TensorMesh, SolutionField]:
    mesh = TensorMesh(n_cells=n_cells, dim=problem.dim)
    kernel = KernelParams(delta=delta, dim=problem.dim)
    system = assemble_system(mesh, kernel, problem, xi=delta / c)
    if dump_path is not None:
        system.dump(dump_path)
    return mesh, solve_spd(system)


def run_single(
    problem: ManufacturedProblem,
    n_cells: int,
    delta: float,
    c: float,
    *,
    dump_path: Path | None = None,
    reference_n: int | None = None,
) -> ErrorReport:
    """ξ = δ/c 로 조립·풀이하고 세 가지 오차를 계산한다. 계산 실패는 StudyRunError 로 감싼다."""
    try:
        mesh, solution = _solve(problem, n_cells, delta, c, dump_path)
        rmse = compute_rmse(solution, problem, mesh)
        bd_error, bd_dn_error = compute_bd_errors(solution, problem, mesh)
        ref = None
        if reference_n is not None:
            ref_mesh, ref_solution = _solve(problem, reference_n, delta, c)
            ref = reference_rmse(mesh, solution, ref_mesh, ref_solution)
    except StudyRunError:
        raise
    except NonlocalBHError as exc:
        logger.error(
            "run failed | dim=%s N=%s delta=%s c=%s error=%s",
            problem.dim,
            n_cells,
            delta,
            c,
            exc,
            extra={RUN_PARAMS_ATTR: (problem.dim, n_cells, delta, c)},
        )
        raise StudyRunError(problem.dim, n_cells, delta, c, exc) from exc

    logger.info(
        "run done | dim=%s N=%s delta=%s c=%s rmse=%.3e bd=%.3e bd_dn=%.3e",
        problem.dim,
        n_cells,
        delta,
        c,
        rmse,
        bd_error,
        bd_dn_error,
    )
    return ErrorReport(
        dim=problem.dim,
        N=n_cells,
        delta=delta,
        c=c,
        problem=problem.name,
        rmse=rmse,
        bd_error=bd_error,
        bd_dn_error=bd_dn_error,
        ref_rmse=ref,
        residual_norm=solution.residual_norm,
    )


def _dump_path(base: Path | None, index: int, total: int) -> Path | None:
    if base is None:
        return None
    if total == 1:
        return base
    # run 이 여러 개면 실행 순번을 붙인다.
    return base.with_name(f"{base.stem}_{index}{base.suffix}")


def _ensure_writable(path: Path) -> None:
    """append 모드로 열어 쓰기 가능 여부만 본다. 기존 CSV 내용은 건드리지 않는다."""
    path.parent.mkdir(parents=True, exist_ok=True)
    existed = path.exists()
    with path.open("a", encoding="utf-8"):
        pass
    if not existed:
        path.unlink()


def write_csv(reports: list[ErrorReport], path: Path, *, with_reference: bool = False) -> Path:
    columns = list(CSV_COLUMNS) + ([REFERENCE_COLUMN] if with_reference else [])
    frame = pd.DataFrame(
        [r.csv_row(with_reference=with_reference) for r in reports],
        columns=columns,
    )
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def run_study(config: ExperimentConfig) -> StudySummary:
    problem = get_problem(config.problem)
    params = config.run_parameters()
    # 계산 전에 출력 경로부터 확인한다. 실패하면 OSError 가 그대로 올라간다.
    _ensure_writable(config.output_path)
    logger.info(
        "study start | study=%s dim=%s N=%s runs=%s workers=%s out=%s",
        config.study,
        config.dim,
        config.n_cells,
        len(params),
        config.workers,
        config.output_path,
    )

    def job(item: tuple[int, tuple[float, float]]) -> ErrorReport:
        index, (delta, c) = item
        return run_single(
            problem,
            config.n_cells,
            delta,
            c,
            dump_path=_dump_path(config.dump_system, index, len(params)),
            reference_n=config.reference_n,
        )

    items = list(enumerate(params))
    if config.workers > 1 and len(items) > 1:
        # map 은 완료 순서와 무관하게 입력 순서대로 결과를 돌려준다.
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(job, items))
    else:
        reports = [job(item) for item in items]

    write_csv(reports, config.output_path, with_reference=config.reference_n is not None)

    slope = None
    if config.study == "delta_sweep" and len(set(config.deltas)) >= 2:
        if all(r.rmse > 0 for r in reports):
            slope = fit_slope([(r.delta, r.rmse) for r in reports])
        else:
            logger.warning("slope skipped | reason=zero rmse")
    logger.info("study done | rows=%s slope=%s", len(reports), slope)
    return StudySummary(study=config.study, output_path=config.output_path, reports=reports, slope=slope)
