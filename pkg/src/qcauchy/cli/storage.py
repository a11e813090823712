import os
import sys
import tempfile
import logging
from pathlib import Path
from typing import List, Optional, Union

from ..models.reports import DistributionReport, EvalResult, IdentityRunReport, Theorem31Report


logger = logging.getLogger(__name__)

Report = Union[IdentityRunReport, DistributionReport, Theorem31Report, EvalResult]

CSV_COLUMNS = {
    IdentityRunReport: "n,index,lhs,rhs,equal",
    DistributionReport: "n,mu1_chi,lambda1,qlaplace,lambda1_shift,mu1_chi_shift,gap,residual",
    Theorem31Report: "quantity,ell,value,imag,window_drift,quad_drift",
    EvalResult: "target,value,real,imag",
}


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


class ReportStorage:
    """Serializes reports and writes them atomically, or to stdout without a path"""

    def __init__(self, out_path: Optional[str] = None):
        self.out_path = Path(out_path) if out_path else None

    def export(self, report: Report, format: str = "json") -> str:
        """Render a report in the requested format"""
        if format == "json":
            return report.model_dump_json(indent=2, by_alias=True) + "\n"

        elif format == "csv":
            lines = [CSV_COLUMNS[type(report)]]
            lines.extend(self._csv_rows(report))
            return "\n".join(lines) + "\n"

        else:
            raise ValueError(f"Unsupported format: {format}")

    def _csv_rows(self, report: Report) -> List[str]:
        if isinstance(report, IdentityRunReport):
            return [
                f"{r.n},{i},{lhs},{rhs},{str(lhs == rhs).lower()}"
                for r in report.reports
                for i, (lhs, rhs) in enumerate(zip(r.lhs_coeffs, r.rhs_coeffs))
            ]
        if isinstance(report, DistributionReport):
            return [
                ",".join([str(row.n)] + [_fmt(getattr(row, c)) for c in CSV_COLUMNS[DistributionReport].split(",")[1:]])
                for row in report.rows
            ]
        if isinstance(report, Theorem31Report):
            named = [("F_window_K", None, report.F_window_K), ("F_K_inf", None, report.F_K_inf), ("F_L", None, report.F_L)]
            named.extend(("F_rank", ell, det) for ell, det in enumerate(report.F_rank))
            return [
                f"{name},{'' if ell is None else ell},{_fmt(d.value)},{_fmt(d.imag)},{_fmt(d.window_drift)},{_fmt(d.quad_drift)}"
                for name, ell, d in named
            ]
        return [f"{report.target},{report.value},{_fmt(report.real)},{_fmt(report.imag)}"]

    def write(self, report: Report, format: str = "json") -> None:
        """Write to out_path via a temp file in the same directory and os.replace"""
        payload = self.export(report, format)
        if self.out_path is None:
            sys.stdout.write(payload)
            return
        directory = self.out_path.parent if str(self.out_path.parent) else Path(".")
        directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{self.out_path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp, self.out_path)
        except OSError as e:
            logger.error(f"Writing report to {self.out_path} failed: {e}")
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        logger.info(f"Report written to {self.out_path}")
