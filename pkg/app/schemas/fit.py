"""
Vector Fitting Schemas
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field

from app.config import get_settings


class Weighting(str, Enum):
    """Least-squares sample weighting"""
    UNIFORM = "uniform"
    INVERSE_MAGNITUDE = "inverse-magnitude"


class FitConfig(BaseModel):
    """Schema for vector fitting options"""
    order: int = Field(default=10, ge=1)
    max_iters: int = Field(default_factory=lambda: get_settings().fit_max_iters, ge=1)
    pole_relocation_tol: float = Field(default_factory=lambda: get_settings().fit_pole_tol, gt=0)
    weighting: Weighting = Weighting.INVERSE_MAGNITUDE
    enforce_stability: bool = True
    auto_order: bool = False
    auto_target: float = Field(default_factory=lambda: get_settings().fit_auto_target, gt=0)
    max_order: int = Field(default_factory=lambda: get_settings().fit_max_order, ge=1)


class OrderAttempt(BaseModel):
    """Schema for one order of an automatic order sweep"""
    order: int
    max_rel_error: float


class FitReport(BaseModel):
    """Schema for vector fitting diagnostics"""
    order: int
    n_states: int
    max_rel_error: float
    rms_rel_error: float
    iterations: int
    converged: bool
    pole_movement: List[float] = []
    condition_numbers: List[float] = []
    rank_deficiency: int = 0
    final_poles: List[List[float]] = []
    order_history: List[OrderAttempt] = []
    note: Optional[str] = None
