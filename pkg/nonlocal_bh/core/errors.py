from __future__ import annotations

from typing import Sequence


class NonlocalBHError(Exception):
    """패키지 공통 예외 베이스."""


class InvalidArgumentError(NonlocalBHError, ValueError):
    pass


class InvalidDataError(NonlocalBHError, ValueError):
    pass


class InconsistentProblemError(NonlocalBHError, ValueError):
    pass


class AssemblyError(NonlocalBHError, RuntimeError):
    """조립 중 비유한 값이 누적됐을 때. 문제가 된 구적점을 같이 들고 다닌다."""

    def __init__(self, message: str, point: Sequence[float] | None = None) -> None:
        self.point = tuple(float(v) for v in point) if point is not None else None
        if self.point is not None:
            message = f"{message} | point={self.point}"
        super().__init__(message)


class SolverError(NonlocalBHError, RuntimeError):
    pass


class NotPositiveDefiniteError(SolverError):
    pass


class StudyRunError(NonlocalBHError, RuntimeError):
    """스윕 중 한 run이 실패했을 때 (dim, N, delta, c) 조합을 함께 보고한다."""

    def __init__(self, dim: int, n_cells: int, delta: float, c: float, cause: Exception) -> None:
        self.params = (dim, n_cells, delta, c)
        self.cause = cause
        super().__init__(
            f"run failed | dim={dim} N={n_cells} delta={delta!r} c={c!r} "
            f"error={type(cause).__name__}: {cause}"
        )
