"""
Load-Flow Jacobian Schemas
"""
from typing import Dict, List

import numpy as np
from pydantic import BaseModel

from app.schemas.verdict import AxisPoleResult


class JacobianReport(BaseModel):
    """Schema for the unreduced load-flow Jacobian and its symmetric-part spectrum"""
    bus_ids: List[int]
    jlf: List[List[float]]
    eigenvalues: List[float]
    symmetry_defect: float
    min_eig: float
    min_nonzero_eig: float
    zero_count: int
    negative_count: int
    psd: bool
    contributions: Dict[str, float] = {}

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.jlf, dtype=float)

    @property
    def n_buses(self) -> int:
        return len(self.bus_ids)


class JndPoleReport(BaseModel):
    """Schema for the origin pole of the wide-band network derivative model"""
    tau: float
    pole: AxisPoleResult
    symmetry_defect: float
    judged_on_symmetric_part: bool
    passed: bool
