import pytest

from qcauchy.config import Settings, env_name, get_settings
from qcauchy.models.params import ParamSet, TruncationPolicy, VarSpec


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Settings are cached per process; every test starts from a clean environment"""
    for field in Settings.model_fields:
        monkeypatch.delenv(env_name(field), raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def exact_a():
    return VarSpec.model_validate("1/3,1/5")


@pytest.fixture
def exact_b():
    return VarSpec.model_validate("1/4,1/7")


@pytest.fixture
def kernel_params():
    """N = M = 2 set satisfying every determinant hypothesis"""
    return ParamSet(a=VarSpec.model_validate([0.30, 0.28]), b=VarSpec.model_validate([0.25, 0.20]), q=0.15, t=1.0, k=1)


@pytest.fixture
def single_params():
    return ParamSet(a=VarSpec.model_validate([0.35]), b=VarSpec.model_validate([0.3]), q=0.2, t=1.0, k=0)


@pytest.fixture
def measure_params():
    return ParamSet(a=VarSpec.model_validate([0.2, 0.15]), b=VarSpec.model_validate([0.3, 0.25]), q=0.2, t=1.0)


@pytest.fixture
def trunc():
    return TruncationPolicy(weight_cutoff=14, series_order=6)
