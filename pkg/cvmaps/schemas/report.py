from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, computed_field

from cvmaps.quantum.measures import MeasureReport


class CovarianceReport(BaseModel):
    """One (time, grid size, sigma element) estimate against the quadrature oracle."""

    model_config = ConfigDict(frozen=True)

    t: float
    grid_n: int
    element: str
    numeric: float
    analytic: float
    abs_error: float


class SummaryRow(BaseModel):
    grid_n: int
    measure: str
    max_abs_error: float
    island_converged: bool


class SweepResult(BaseModel):
    output_dir: Optional[Path] = None
    files: List[Path] = []
    summary: List[SummaryRow] = []
    reports: List[MeasureReport] = []


class CovarianceResult(BaseModel):
    output_dir: Optional[Path] = None
    files: List[Path] = []
    summary: List[SummaryRow] = []
    reports: List[CovarianceReport] = []
    oracle_converged: bool = True


class CheckResult(BaseModel):
    module: str
    property: str
    passed: bool
    observed: str = ""
    expected: str = ""
    required: bool = True


class ValidationReport(BaseModel):
    checks: List[CheckResult] = []

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if check.required)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if check.required and not check.passed]


class QutritCase(BaseModel):
    name: str
    removed_index: int
    result: List[List[complex]]
    matches_closed_form: bool


class QutritDemoReport(BaseModel):
    cases: List[QutritCase] = []

    @property
    def passed(self) -> bool:
        return all(case.matches_closed_form for case in self.cases)
