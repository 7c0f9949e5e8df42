from __future__ import annotations

import pytest

from nonlocal_bh.core.errors import (
    AssemblyError,
    InvalidArgumentError,
    NonlocalBHError,
    NotPositiveDefiniteError,
    SolverError,
    StudyRunError,
)


def test_assembly_error_reports_point():
    err = AssemblyError("Non-finite load f", (0.25, 1.0))

    assert err.point == (0.25, 1.0)
    assert str(err) == "Non-finite load f | point=(0.25, 1.0)"


def test_assembly_error_without_point():
    err = AssemblyError("Non-finite entries")

    assert err.point is None
    assert str(err) == "Non-finite entries"


def test_study_run_error_carries_parameters_and_cause():
    cause = NotPositiveDefiniteError("pivot 3")
    err = StudyRunError(2, 20, 0.05, 10.0, cause)

    assert err.params == (2, 20, 0.05, 10.0)
    assert err.cause is cause
    assert "N=20" in str(err) and "NotPositiveDefiniteError" in str(err)


def test_hierarchy_maps_onto_builtin_exceptions():
    assert issubclass(InvalidArgumentError, ValueError)
    assert issubclass(NotPositiveDefiniteError, SolverError)
    with pytest.raises(NonlocalBHError):
        raise NotPositiveDefiniteError("x")
