import pytest
from pydantic import ValidationError

from qcauchy.config import Settings, env_name, get_settings


class TestSettings:
    def test_defaults(self):
        settings = get_settings()
        assert settings.threads == 1
        assert settings.quad_nodes == 256
        assert settings.cancellation_tol == 1e-8

    def test_every_field_has_a_variable(self, monkeypatch):
        monkeypatch.setenv("QCAUCHY_QUAD_NODES", "128")
        monkeypatch.setenv("QCAUCHY_TAIL_TOL", "1e-9")
        monkeypatch.setenv("QCAUCHY_MAX_WINDOW_GROWTH", "0")
        get_settings.cache_clear()
        settings = get_settings()
        assert settings.quad_nodes == 128
        assert settings.tail_tol == 1e-9
        assert settings.max_window_growth == 0
        assert [env_name(field) for field in Settings.model_fields][:2] == ["QCAUCHY_THREADS", "QCAUCHY_LOG_LEVEL"]

    def test_invalid_value_is_rejected(self, monkeypatch):
        monkeypatch.setenv("QCAUCHY_QUAD_NODES", "4")
        get_settings.cache_clear()
        with pytest.raises(ValidationError):
            get_settings()
