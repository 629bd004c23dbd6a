"""
Compliance Pipeline Schemas
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel

from app.schemas.fit import FitReport
from app.schemas.verdict import PassivityVerdict, PropernessReport


class ClusterReport(BaseModel):
    """Schema for the slow/fast eigenvalue separation test"""
    slow: List[List[float]] = []
    fast: List[List[float]] = []
    gap_violations: List[List[float]] = []
    slow_max: float
    fast_min: float
    passed: bool


class KqvMarginReport(BaseModel):
    """Schema for the available Q-V contribution over the low range"""
    curve: List[List[float]]
    margin: float
    required: float
    passed: bool


class FreqRegulationReport(BaseModel):
    """Schema for the frequency-regulation test over the low range"""
    curve: List[List[float]]
    minimum: float
    passed: bool


class StepOutcome(BaseModel):
    """Schema for one step of the consolidated criteria"""
    step: int
    name: str
    passed: bool
    error_code: Optional[str] = None
    message: Optional[str] = None
    diagnostics: Dict[str, Any] = {}


class ComplianceReport(BaseModel):
    """Schema for the consolidated compliance report"""
    overall: bool
    tau: float
    k_qv_c: float
    series_r: float
    steps: List[StepOutcome]
    fit: Optional[FitReport] = None
    cluster: Optional[ClusterReport] = None
    high_frequency: Optional[PassivityVerdict] = None
    kqv_margin: Optional[KqvMarginReport] = None
    frequency_regulation: Optional[FreqRegulationReport] = None
    properness: Optional[PropernessReport] = None
    low_frequency: Optional[PassivityVerdict] = None
    nsd_full: Optional[PassivityVerdict] = None

    def step(self, number: int) -> StepOutcome:
        return next(outcome for outcome in self.steps if outcome.step == number)
