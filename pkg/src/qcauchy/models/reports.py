from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..core.qseries import QSeries
from .params import ParamSet


class SeriesComparison(BaseModel):
    """Coefficientwise comparison of two exact q-series"""
    model_config = ConfigDict(populate_by_name=True)

    name: str = Field(..., description="Which identity was checked")
    order: int = Field(..., description="Series compared mod q^{order+1}")
    lhs_coeffs: List[str] = Field(..., description="Exact rational strings")
    rhs_coeffs: List[str] = Field(..., description="Exact rational strings")
    equal: bool
    first_mismatch: Optional[int] = Field(None, description="Lowest differing coefficient index")

    @classmethod
    def compare(cls, name: str, lhs: QSeries, rhs: QSeries, **extra) -> "SeriesComparison":
        order = min(lhs.order, rhs.order)
        mismatch = lhs.first_mismatch(rhs)
        return cls(
            name=name,
            order=order,
            lhs_coeffs=[str(c) for c in lhs.coeffs[: order + 1]],
            rhs_coeffs=[str(c) for c in rhs.coeffs[: order + 1]],
            equal=mismatch is None,
            first_mismatch=mismatch,
            **extra,
        )


class Theorem1Report(SeriesComparison):
    """Restricted Cauchy identity at one threshold n"""
    n: int = Field(..., ge=0, description="Bound on the first rows")
    a: List[str]
    b: List[str]
    residuals: Dict[str, float] = Field(default_factory=dict, description="Always empty: both sides are exact")


class IdentityRunReport(BaseModel):
    """verify-identity over n = 0..n_max"""
    model_config = ConfigDict(populate_by_name=True)

    order: int
    n_max: int
    reports: List[Theorem1Report]
    passed: bool = Field(..., serialization_alias="pass")


class Estimate(BaseModel):
    """A truncated float sum with its truncation residual"""
    value: float
    residual: float = Field(..., ge=0.0, description="Bound on the neglected mass times the integrand sup")
    terms: int = Field(0, description="Number of summands")
    flagged: bool = Field(False, description="residual exceeded float_tail_tol")


class DistributionRow(BaseModel):
    n: int
    mu1_chi: float = Field(..., description="P(mu1 + chi <= n)")
    lambda1: float = Field(..., description="P(lambda1 <= n)")
    qlaplace: float = Field(..., description="E[1/(-t q^{1/2+n-mu1};q)_inf]")
    lambda1_shift: float = Field(..., description="P(lambda1 + S <= n)")
    mu1_chi_shift: float = Field(..., description="P(mu1 + chi + S <= n)")
    gap: float = Field(..., description="Largest disagreement between matching columns")
    residual: float


class DistributionReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    params: ParamSet
    hypotheses: Dict[str, bool]
    cutoff: int
    tol: float
    rows: List[DistributionRow]
    max_gap: float
    worst_n: Optional[int] = Field(None, description="Row holding max_gap")
    passed: bool = Field(..., serialization_alias="pass")


class DeterminantEstimate(BaseModel):
    """Windowed or finite-rank determinant with its error estimates"""
    kind: str
    value: float = Field(..., description="Real part")
    imag: float = Field(0.0, description="Imaginary part, quadrature noise for real kernels")
    window: Optional[Tuple[int, int]] = None
    rank: Optional[int] = Field(None, description="Matrix size of the finite-rank route")
    points: int = 256
    window_drift: float = Field(0.0, description="Change under window doubling")
    quad_drift: float = Field(0.0, description="Change under node doubling")

    @property
    def error(self) -> float:
        return max(self.window_drift, self.quad_drift)


class ConvergenceRow(BaseModel):
    ell: int
    F_ell: float
    det_gap: float = Field(..., description="|F_ell - F_inf|")
    kernel_gap: float = Field(..., description="max |K_ell - K_inf| on the test window")


class Theorem31Report(BaseModel):
    """Both Fredholm determinant routes and their agreement"""
    model_config = ConfigDict(populate_by_name=True)

    params: ParamSet
    hypotheses: Dict[str, bool]
    window: Tuple[int, int]
    points: int
    tol: float
    F_window_K: DeterminantEstimate
    F_rank: List[DeterminantEstimate]
    F_K_inf: DeterminantEstimate
    F_L: DeterminantEstimate
    gaps: Dict[str, float]
    convergence: List[ConvergenceRow]
    passed: bool = Field(..., serialization_alias="pass")


class EvalResult(BaseModel):
    target: str
    arguments: Dict[str, str]
    value: str = Field(..., description="Exact rational, series or float rendering")
    real: Optional[float] = None
    imag: Optional[float] = None
