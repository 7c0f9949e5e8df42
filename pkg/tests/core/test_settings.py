from __future__ import annotations

import pytest

from nonlocal_bh.core.settings import get_solver_settings
from nonlocal_bh.experiments.config import default_c, default_deltas, get_settings


def test_solver_settings_use_defaults_when_nothing_set():
    settings = get_solver_settings()

    assert settings.log_level == "INFO"
    assert settings.refine_steps == 1
    assert settings.residual_tolerance == 1e-10
    assert settings.workers == 1
    assert settings.error_webhook_url == ""


def test_solver_settings_read_environment(monkeypatch):
    monkeypatch.setenv("NLBH_LOG_LEVEL", " debug ")
    monkeypatch.setenv("NLBH_REFINE_STEPS", "3")
    monkeypatch.setenv("NLBH_RESIDUAL_TOLERANCE", "1e-8")
    monkeypatch.setenv("NLBH_WORKERS", "4")

    settings = get_solver_settings()

    assert settings.log_level == "DEBUG"
    assert settings.refine_steps == 3
    assert settings.residual_tolerance == 1e-8
    assert settings.workers == 4


def test_generic_log_level_is_used_as_fallback(monkeypatch):
    monkeypatch.setenv("LOG_LEVEL", "warning")

    assert get_solver_settings().log_level == "WARNING"


@pytest.mark.parametrize(
    "name,value",
    [
        ("NLBH_REFINE_STEPS", "many"),
        ("NLBH_RESIDUAL_TOLERANCE", "tight"),
        ("NLBH_WORKERS", "2.5"),
    ],
)
def test_malformed_numbers_fall_back_to_defaults(monkeypatch, name, value):
    monkeypatch.setenv(name, value)

    settings = get_solver_settings(refine_steps_default=2, residual_tolerance_default=1e-9, workers_default=1)

    assert settings.refine_steps == 2
    assert settings.residual_tolerance == 1e-9
    assert settings.workers == 1


def test_negative_counts_are_clamped(monkeypatch):
    monkeypatch.setenv("NLBH_REFINE_STEPS", "-2")
    monkeypatch.setenv("NLBH_WORKERS", "0")

    settings = get_solver_settings()

    assert settings.refine_steps == 0
    assert settings.workers == 1


def test_study_defaults():
    settings = get_settings()

    assert settings.n_cells == 20
    assert default_c(1) == 1000.0
    assert default_c(2) == 10.0
    assert default_deltas(1) == pytest.approx([0.1, 0.05, 0.025, 0.0125, 0.00625], rel=1e-15)
    assert default_deltas(2) == pytest.approx([0.2, 0.1, 0.05, 0.025, 0.0125], rel=1e-15)


def test_study_defaults_can_be_overridden_from_environment(monkeypatch):
    monkeypatch.setenv("NLBH_N_CELLS", "8")
    monkeypatch.setenv("NLBH_SWEEP_LEVELS", "3")
    get_settings.cache_clear()

    assert get_settings().n_cells == 8
    assert len(default_deltas(1)) == 3
