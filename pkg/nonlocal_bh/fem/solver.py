from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from nonlocal_bh.core.errors import InvalidDataError, NotPositiveDefiniteError
from nonlocal_bh.core.settings import get_solver_settings
from nonlocal_bh.fem.assembly import LinearSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolutionField:
    coefficients: np.ndarray
    residual_norm: float


def _relative_residual(matrix: np.ndarray, rhs: np.ndarray, u: np.ndarray) -> float:
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return float(np.linalg.norm(matrix @ u))
    return float(np.linalg.norm(matrix @ u - rhs)) / rhs_norm


def solve_spd(system: LinearSystem, *, refine_steps: int | None = None) -> SolutionField:
    """Cholesky(비피벗) 직접 해법. 같은 인수로 iterative refinement 를 refine_steps 번 돈다."""
    settings = get_solver_settings()
    steps = settings.refine_steps if refine_steps is None else max(0, int(refine_steps))
    matrix = np.asarray(system.matrix, dtype=float)
    rhs = np.asarray(system.rhs, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] != rhs.shape[0]:
        raise InvalidDataError(f"Incompatible system shapes: {matrix.shape} / {rhs.shape}")
    if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs))):
        raise InvalidDataError("System contains non-finite entries")

    try:
        factor = linalg.cho_factor(matrix, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        logger.error(
            "cholesky failed | dim=%s N=%s delta=%s n=%s error=%s",
            system.dim,
            system.n_cells,
            system.delta,
            rhs.shape[0],
            exc,
        )
        raise NotPositiveDefiniteError(f"Matrix is not positive definite: {exc}") from exc

    u = linalg.cho_solve(factor, rhs, check_finite=False)
    for _ in range(steps):
        u = u + linalg.cho_solve(factor, rhs - matrix @ u, check_finite=False)

    if not np.all(np.isfinite(u)):
        raise NotPositiveDefiniteError("Cholesky solve produced non-finite coefficients")

    residual = _relative_residual(matrix, rhs, u)
    if residual > settings.residual_tolerance:
        logger.warning(
            "residual above tolerance | dim=%s N=%s delta=%s residual=%.3e tol=%.1e",
            system.dim,
            system.n_cells,
            system.delta,
            residual,
            settings.residual_tolerance,
        )
    else:
        logger.debug("solve ok | n=%s residual=%.3e", rhs.shape[0], residual)
    return SolutionField(coefficients=u, residual_norm=residual)
