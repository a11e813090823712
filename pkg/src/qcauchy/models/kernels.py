from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator


class KernelKind(str, Enum):
    """Kernels with a windowed Fredholm determinant"""
    K = "K"
    L = "L"
    K_ELL = "K_ell"
    K_INF = "K_inf"


class ContourSpec(BaseModel):
    """Counterclockwise circle |z - center| = radius sampled by the trapezoidal rule"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    center: complex = Field(0j, description="Circle center")
    radius: float = Field(..., gt=0.0, description="Circle radius")
    points: int = Field(256, ge=8, description="Trapezoidal nodes")

    @field_validator("center", mode="before")
    @classmethod
    def _parse_center(cls, value) -> complex:
        return complex(value)

    @field_serializer("center")
    def _serialize_center(self, center: complex):
        return [center.real, center.imag]

    def angles(self) -> np.ndarray:
        # half-shifted so that no node sits on the positive real axis,
        # where all poles and zeros of the integrands live
        return 2.0 * np.pi * (np.arange(self.points) + 0.5) / self.points

    def nodes(self) -> np.ndarray:
        return self.center + self.radius * np.exp(1j * self.angles())

    def with_points(self, points: int) -> "ContourSpec":
        return self.model_copy(update={"points": points})


class PoleIndex(BaseModel):
    """r = uN + k, value a~_r = a_k q^u (k is 1-based)"""
    model_config = ConfigDict(frozen=True)

    r: int = Field(..., ge=1)
    u: int = Field(..., ge=0)
    k: int = Field(..., ge=1)
    value: float = Field(..., gt=0.0)

    @classmethod
    def from_r(cls, r: int, a: Tuple[float, ...], q: float) -> "PoleIndex":
        if r < 1:
            raise ValueError(f"Pole index must be >= 1, got {r}")
        n = len(a)
        u, k0 = divmod(r - 1, n)
        return cls(r=r, u=u, k=k0 + 1, value=a[k0] * q ** u)


class KernelMatrix(BaseModel):
    """Finite window of f(m1) * kernel(m1, m2), optionally conjugated"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: KernelKind
    window: Tuple[int, int] = Field(..., description="Inclusive index range (m_lo, m_hi)")
    entries: np.ndarray = Field(..., description="Dense complex matrix over the window")
    log_conjugator: Optional[np.ndarray] = Field(None, description="log d(m); entries hold d(m1) X d(m2)^{-1}")
    points: int = Field(256, description="Quadrature nodes used")

    @field_validator("entries")
    @classmethod
    def _finite(cls, entries: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(entries)):
            raise ValueError("kernel window has non-finite entries")
        return entries

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.window[0], self.window[1] + 1)

    def plain(self) -> np.ndarray:
        """Entries with the conjugation undone

        The ratio d(m2)/d(m1) is applied in log space; entries whose plain value
        exceeds the float range come back as inf.
        """
        if self.log_conjugator is None:
            return self.entries
        log_d = self.log_conjugator
        with np.errstate(divide="ignore", over="ignore"):
            logs = np.log(self.entries) + log_d[None, :] - log_d[:, None]
            return np.where(self.entries == 0, 0j, np.exp(logs))
