import math
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from ..core.errors import ParameterError


Scalar = Union[int, Fraction, float, complex]


def parse_scalar(value: Any) -> Scalar:
    """Parse a CLI/JSON scalar; `p/q` and decimal strings become exact Fractions"""
    if isinstance(value, (int, Fraction, float, complex)) and not isinstance(value, bool):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"cannot parse {value!r} as a rational number") from e
    raise ValueError(f"unsupported scalar {value!r}")


class VarSpec(BaseModel):
    """An ordered specialization (a_1, ..., a_N) or (b_1, ..., b_M)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: Tuple[Any, ...] = Field(..., description="Scalars; Fractions keep evaluation exact")

    @model_validator(mode="before")
    @classmethod
    def _accept_sequence(cls, data: Any) -> Any:
        if isinstance(data, str):
            return {"values": tuple(v for v in data.split(",") if v.strip())}
        if isinstance(data, (list, tuple)):
            return {"values": tuple(data)}
        return data

    @field_validator("values", mode="before")
    @classmethod
    def _parse(cls, value: Any) -> Tuple[Scalar, ...]:
        return tuple(parse_scalar(v) for v in value)

    @field_validator("values")
    @classmethod
    def _nonempty(cls, value: Tuple[Scalar, ...]) -> Tuple[Scalar, ...]:
        if not value:
            raise ValueError("a specialization needs at least one variable")
        return value

    @field_serializer("values")
    def _serialize(self, values: Tuple[Scalar, ...]) -> List[Any]:
        return [str(v) if isinstance(v, Fraction) else v for v in values]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.values)

    def as_float(self) -> Tuple[float, ...]:
        return tuple(float(v) for v in self.values)

    def scaled(self, factor: Any) -> Tuple[Any, ...]:
        return tuple(v * factor for v in self.values)


class ParamSet(BaseModel):
    """The specialization shared by all measures and kernels"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a: VarSpec = Field(..., description="a_1..a_N")
    b: VarSpec = Field(..., description="b_1..b_M")
    q: float = Field(..., gt=0.0, lt=1.0, description="Base of the q-series")
    t: float = Field(1.0, gt=0.0, description="Parameter of the shift S")
    k: int = Field(0, description="Threshold in the Fermi factor f(m)")
    zeta: Optional[complex] = Field(None, description="Spectral parameter; defaults to -t q^{1/2+k}")
    epsilon: float = Field(0.25, gt=0.0, lt=0.5, description="Conjugator exponent epsilon in (0, 1/2)")
    omega: float = Field(0.1, gt=0.0, description="Conjugator exponent omega in (0, 1/2 - epsilon)")

    @field_validator("zeta", mode="before")
    @classmethod
    def _parse_zeta(cls, value: Any) -> Optional[complex]:
        if value is None:
            return None
        if isinstance(value, (list, tuple)):
            return complex(float(value[0]), float(value[1]))
        return complex(value)

    @model_validator(mode="after")
    def _measure_invariants(self) -> "ParamSet":
        a, b = self.a.as_float(), self.b.as_float()
        if min(a) <= 0 or min(b) <= 0:
            raise ValueError("all a_i and b_j must be positive")
        if max(a) * max(b) >= 1:
            raise ValueError("a_max * b_max >= 1")
        if self.omega >= 0.5 - self.epsilon:
            raise ValueError("omega >= 1/2 - eps")
        return self

    @field_serializer("zeta")
    def _serialize_zeta(self, zeta: Optional[complex]) -> Optional[List[float]]:
        return None if zeta is None else [zeta.real, zeta.imag]

    @field_serializer("a", "b")
    def _serialize_vars(self, spec: VarSpec) -> List[Any]:
        return spec.model_dump()["values"]

    @property
    def n_a(self) -> int:
        return len(self.a)

    @property
    def n_b(self) -> int:
        return len(self.b)

    @property
    def a_float(self) -> Tuple[float, ...]:
        return self.a.as_float()

    @property
    def b_float(self) -> Tuple[float, ...]:
        return self.b.as_float()

    @property
    def fermi_zeta(self) -> complex:
        """zeta, or -t q^{1/2+k} when none was given"""
        if self.zeta is not None:
            return self.zeta
        return complex(-self.t * self.q ** (0.5 + self.k))

    def with_k(self, k: int) -> "ParamSet":
        return self.model_copy(update={"k": k})

    def hypotheses(self) -> Dict[str, bool]:
        """Which of the determinant-formula hypotheses this parameter set satisfies"""
        a, b = self.a_float, self.b_float
        ratio = max(a) / min(a)
        return {
            "measure": max(a) * max(b) < 1,
            "distinct_a": len(set(a)) == len(a),
            "sorted_a": all(a[i] > a[i + 1] for i in range(len(a) - 1)),
            "q_amax_lt_amin": self.q * max(a) < min(a),
            "ratio_lt_q_pow": ratio < self.q ** (-0.5 + self.epsilon),
            "square": len(a) == len(b),
        }

    def require_kernel_hypotheses(self) -> None:
        """Raise ParameterError unless K and L are defined: N = M and simple poles"""
        checks = self.hypotheses()
        if not checks["square"]:
            raise ParameterError("kernels need as many b's as a's (N = M)")
        if not checks["distinct_a"]:
            raise ParameterError("coincident a's give non-simple poles")

    def require_expansion_hypotheses(self) -> None:
        """Raise ParameterError naming the first violated hypothesis of the K_ell / K_inf / W expansion"""
        self.require_kernel_hypotheses()
        checks = self.hypotheses()
        if not checks["sorted_a"]:
            raise ParameterError("a's must be sorted strictly descending: a1 > ... > aN")
        if not checks["ratio_lt_q_pow"]:
            raise ParameterError("a1/aN >= q^{-1/2+eps}")

    def sorted_a(self) -> "ParamSet":
        """The same measure with a relabelled descending"""
        order = sorted(range(self.n_a), key=lambda i: -self.a_float[i])
        values = tuple(self.a.values[i] for i in order)
        return self.model_copy(update={"a": VarSpec(values=values)})


class TruncationPolicy(BaseModel):
    """How far brute-force sums and series are carried"""
    weight_cutoff: int = Field(16, ge=0, description="Max |mu| or |lambda| summed")
    series_order: int = Field(8, ge=0, description="Series are exact mod q^{order+1}")
    float_tail_tol: float = Field(1e-8, gt=0.0, description="Residual above which results are flagged")

    def doubled(self) -> "TruncationPolicy":
        return self.model_copy(update={"weight_cutoff": 2 * self.weight_cutoff})


def default_window(p: ParamSet, tol: float) -> Tuple[int, int]:
    """[-8N, 8N + ceil(log_q tol)]"""
    n = p.n_a
    return (-8 * n, 8 * n + math.ceil(math.log(tol) / math.log(p.q)))


class OutputFormat(str, Enum):
    """Report serialization"""
    JSON = "json"
    CSV = "csv"


class RunConfig(BaseModel):
    """One CLI invocation, validated before dispatch"""
    model_config = ConfigDict(frozen=True)

    command: str = Field(..., description="Subcommand name")
    params: Optional[ParamSet] = Field(None, description="Float specialization for measures and kernels")
    trunc: TruncationPolicy = Field(default_factory=TruncationPolicy)
    tol: float = Field(1e-6, gt=0.0, description="Pass/fail tolerance")
    n_min: int = Field(0, description="First threshold tabulated")
    n_max: int = Field(3, ge=0, description="Last threshold tabulated")
    window: Optional[Tuple[int, int]] = Field(None, description="Determinant window (m_lo, m_hi)")
    quad_nodes: int = Field(256, ge=8, description="Trapezoidal nodes per contour")
    ell_max: int = Field(3, ge=0, description="Largest ell of the finite-rank table")
    radii: Tuple[Optional[float], Optional[float]] = Field((None, None), description="(r', r) of the L contours")
    out: Optional[str] = Field(None, description="Report path; stdout when absent")
    format: OutputFormat = OutputFormat.JSON

    @model_validator(mode="after")
    def _ranges(self) -> "RunConfig":
        if self.window is not None and self.window[0] > self.window[1]:
            raise ValueError(f"window {self.window} is empty")
        if self.n_min > self.n_max:
            raise ValueError(f"n_min {self.n_min} > n_max {self.n_max}")
        return self
