import os
import logging
from functools import lru_cache

from pydantic import BaseModel, Field, field_validator


logger = logging.getLogger(__name__)

ENV_PREFIX = "QCAUCHY_"


class Settings(BaseModel):
    """Process-wide settings, read once from QCAUCHY_* environment variables"""
    threads: int = Field(1, ge=1, description="Worker cap for enumeration-and-sum operations")
    log_level: str = Field("WARNING", description="Root log level used by the CLI")
    quad_nodes: int = Field(256, ge=8, description="Initial trapezoidal nodes per contour")
    max_quad_nodes: int = Field(4096, ge=8, description="Node-doubling ceiling")
    quad_tol: float = Field(1e-10, gt=0.0, description="Node-doubling drift target")
    tail_tol: float = Field(1e-12, gt=0.0, description="Pole-sum tail target for K_inf")
    max_pole_blocks: int = Field(400, ge=1, description="Ceiling on u when summing poles of K_inf")
    cancellation_tol: float = Field(1e-8, gt=0.0, description="Largest rounding error accepted in a K_inf entry")
    max_window_growth: int = Field(3, ge=0, description="Window doublings tried when the default window is too small")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level: {value}")
        return value


def env_name(field: str) -> str:
    return f"{ENV_PREFIX}{field.upper()}"


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Build Settings from the environment, one QCAUCHY_<FIELD> variable per field"""
    values = {}
    for field in Settings.model_fields:
        name = env_name(field)
        if name in os.environ:
            values[field] = os.environ[name]
    settings = Settings(**values)
    logger.debug(f"Settings loaded: {settings}")
    return settings
