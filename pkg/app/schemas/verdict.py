"""
Passivity Verdict Schemas
"""
from typing import List, Optional

from pydantic import BaseModel

from app.models.lti import FreqRange, RangeTag


class ViolationBand(BaseModel):
    """Schema for a contiguous band with a negative Hermitian-part eigenvalue"""
    f_lo: float
    f_hi: float
    worst: float
    ranges: List[RangeTag] = []


class PsdCurve(BaseModel):
    """Schema for Hermitian-part eigenvalues over a grid"""
    f_hz: List[float]
    eigenvalues: List[List[float]]
    min_eig: float
    violations: List[ViolationBand] = []
    ok: bool

    def rows(self) -> List[List[float]]:
        """[[f_hz, eig1, eig2, ...], ...]"""
        return [[f, *eigs] for f, eigs in zip(self.f_hz, self.eigenvalues)]

    def ok_where(self, mask: List[bool], tol: float) -> Optional[bool]:
        """PSD verdict restricted to masked grid points (None when no point is selected)"""
        selected = [eigs[0] for eigs, keep in zip(self.eigenvalues, mask) if keep]
        if not selected:
            return None
        return min(selected) >= -tol


class AxisPoleResult(BaseModel):
    """Schema for an imaginary-axis pole and its residue test"""
    omega: float
    f_hz: float
    multiplicity: int = 1
    simple: bool
    residue_psd: bool
    residue_hermitian: bool = True
    residue_eigs: List[float] = []

    @property
    def ok(self) -> bool:
        return self.simple and self.residue_psd


class RhpResult(BaseModel):
    """Schema for the right-half-plane pole test"""
    ok: bool
    poles: List[List[float]] = []


class PassivityVerdict(BaseModel):
    """Schema for the combined frequency-domain passivity verdict"""
    range: FreqRange
    overall: bool
    rhp_pole_free: Optional[bool] = None
    rhp_poles: List[List[float]] = []
    min_eig_curve: List[List[float]] = []
    psd_ok: bool
    psd_ok_low: Optional[bool] = None
    psd_ok_high: Optional[bool] = None
    axis_poles: List[AxisPoleResult] = []
    violations: List[ViolationBand] = []
    rational: bool = True


class PropernessReport(BaseModel):
    """Schema for the feedthrough determinants of both current-sign conventions"""
    det_device: float
    det_network: float
    proper_device: bool
    proper_network: bool


class PoleIdentityReport(BaseModel):
    """Schema for closed-loop pole comparison across formulations"""
    tau: float
    g1_poles: List[List[float]]
    g2_poles: List[List[float]]
    g3_poles: List[List[float]]
    hausdorff_distance: float
    poles_match: bool
    g3_extra_poles: List[List[float]]
    g3_extra_ok: bool
    g2_axis_poles: List[AxisPoleResult] = []
    non_simple_at_origin: bool = False


class FeedthroughReport(BaseModel):
    """Schema for the structural trace test of wide-band network feedthroughs"""
    n_buses: int
    tau: float
    d_j: List[List[float]]
    d_jd: List[List[float]]
    trace_dj: float
    trace_djd: float
    trace_zero: bool
    bus_blocks: List[List[List[float]]]
    symmetric_part_zero: bool
    min_eig: float
    indefinite: bool
    passive_model_ii: bool
    passive_model_iii: bool
