import pytest

from config import Defaults, Settings, load_defaults
from errors import ConvergenceError, DomainError, RandomZerosError, UnsupportedFamilyError, require


def test_defaults_without_environment(monkeypatch):
    for key in ("SEED", "QUAD_TOL", "MC_SAMPLES", "LOG_DIR"):
        monkeypatch.delenv(f"RANDZ_{key}", raising=False)
    defaults = load_defaults()
    assert defaults == Defaults()
    assert defaults.seed == 20260101
    assert defaults.log_dir == ""


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("RANDZ_SEED", "42")
    monkeypatch.setenv("RANDZ_QUAD_TOL", "1e-12")
    monkeypatch.setenv("RANDZ_MC_SAMPLES", "0x10")
    defaults = load_defaults()
    assert defaults.seed == 42
    assert defaults.quad_tol == 1e-12
    assert defaults.mc_samples == 16


def test_settings_get_falls_back(monkeypatch):
    monkeypatch.delenv("RANDZ_NOT_A_SETTING", raising=False)
    assert Settings().get("not_a_setting", "fallback") == "fallback"
    assert Settings().get_float("not_a_setting", 1.5) == 1.5


def test_as_dict_lists_every_default():
    keys = set(Defaults().as_dict())
    assert {"quad_tol", "quad_budget", "logderiv_step", "series_cap", "mc_samples", "seed", "workers"} <= keys


def test_error_hierarchy():
    assert issubclass(DomainError, ValueError)
    assert issubclass(UnsupportedFamilyError, RandomZerosError)
    err = ConvergenceError("stalled", evaluations=30, residuals=(1.0,))
    assert err.evaluations == 30 and err.residuals == (1.0,)


def test_require():
    require(True, "never raised")
    with pytest.raises(DomainError, match="bad value"):
        require(False, "bad value")
    with pytest.raises(UnsupportedFamilyError):
        require(False, "no closed form", UnsupportedFamilyError)
