"""
Input/Output Document Schemas
"""
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError as PydanticValidationError

from app.config import get_settings
from app.core.exceptions import ValidationError
from app.models.device import PARAMS_BY_KIND, DeviceKind, DeviceParams, VsgParams
from app.models.lti import FreqRange, ModelKind, RationalModel, Spacing
from app.models.network import NetworkSpec
from app.models.operating_point import OperatingPoint, Side
from app.schemas.fit import FitConfig, FitReport


class DeviceDocument(BaseModel):
    """Schema for a device parameter file"""
    kind: DeviceKind
    params: Dict[str, float]
    operating_point: OperatingPoint

    def build_params(self) -> DeviceParams:
        """Instantiate the parameter model for this device kind"""
        try:
            if self.kind == DeviceKind.VSG:
                return self._vsg_params()
            return PARAMS_BY_KIND[self.kind](**self.params)
        except PydanticValidationError as e:
            raise ValidationError(f"Invalid {self.kind.value} parameters", details=e.errors(include_url=False))
        except (TypeError, KeyError) as e:
            raise ValidationError(f"Invalid {self.kind.value} parameters: {e}")

    def _vsg_params(self) -> VsgParams:
        p = self.params
        if "E_g" not in p:
            return VsgParams.at_operating_point(p["M"], p["D_m"], p["x_g"], self.operating_point)
        if "zeta_o" in p:
            return VsgParams(**p)
        return VsgParams.with_operating_point(
            p["M"], p["D_m"], p["E_g"], p["x_g"], p.get("delta_o", 0.0), self.operating_point
        )


class ModelDocument(BaseModel):
    """Schema for a state-space model file"""
    order: int = Field(ge=0)
    A: List[List[float]] = []
    B: List[List[float]] = []
    C: List[List[float]] = []
    D: List[List[float]]
    kind: ModelKind = ModelKind.I

    @classmethod
    def from_model(cls, model: RationalModel) -> "ModelDocument":
        return cls(
            order=model.n_states,
            A=model.A.tolist(),
            B=model.B.tolist(),
            C=model.C.tolist(),
            D=model.D.tolist(),
            kind=model.kind
        )

    def to_model(self) -> RationalModel:
        model = RationalModel(
            A=np.array(self.A, dtype=float).reshape(self.order, self.order),
            B=np.array(self.B, dtype=float).reshape(self.order, -1) if self.order else np.zeros((0, len(self.D[0]))),
            C=np.array(self.C, dtype=float).reshape(len(self.D), self.order),
            D=self.D,
            kind=self.kind
        )
        return model


class ScanRequest(BaseModel):
    """Schema for synthetic scan generation"""
    device: DeviceDocument
    fmin: float = Field(default=0.2, gt=0)
    fmax: float = Field(default=200.0, gt=0)
    points: int = Field(default=400, ge=2)
    spacing: Spacing = Spacing.LOG


class ScanResponse(BaseModel):
    """Schema for scan rows in CSV column order"""
    columns: List[str]
    rows: List[List[float]]


class FitRequest(BaseModel):
    """Schema for a fit request"""
    rows: List[List[float]]
    config: FitConfig = Field(default_factory=FitConfig)


class FitResponse(BaseModel):
    """Schema for a fitted model with diagnostics"""
    model: ModelDocument
    report: FitReport


class CheckRequest(BaseModel):
    """Schema for a passivity check request"""
    model: ModelDocument
    range: FreqRange = FreqRange.FULL


class TransformRequest(BaseModel):
    """Schema for an interface transform request"""
    model: ModelDocument
    to: ModelKind
    operating_point: Optional[OperatingPoint] = None
    tau: float = Field(default_factory=lambda: get_settings().default_tau, gt=0)
    kqvc: float = Field(default=0.0, ge=0)
    side: Side = Side.DEVICE


class JacobianRequest(BaseModel):
    """Schema for a load-flow Jacobian request"""
    network: NetworkSpec
    contributions: Dict[str, float] = {}


class ComplyRequest(BaseModel):
    """Schema for a full compliance run"""
    rows: Optional[List[List[float]]] = None
    model: Optional[ModelDocument] = None
    operating_point: OperatingPoint
    tau: float = Field(default_factory=lambda: get_settings().default_tau, gt=0)
    kqvc: float = Field(default=0.0, ge=0)
    order: int = Field(default=10, ge=1)
    auto_order: bool = False
    series_r: float = Field(default=0.0, ge=0)
    high_limit_hz: Optional[float] = Field(default=None, gt=0)


class PoleIdentityRequest(BaseModel):
    """Schema for a closed-loop pole comparison across formulations"""
    network: ModelDocument
    device: ModelDocument
    operating_point: OperatingPoint
    tau: float = Field(default_factory=lambda: get_settings().default_tau, gt=0)


class FeedthroughRequest(BaseModel):
    """Schema for the wide-band network feedthrough test"""
    d1: List[List[float]]
    operating_points: List[OperatingPoint] = Field(min_length=1)
    tau: float = Field(default_factory=lambda: get_settings().default_tau, gt=0)
