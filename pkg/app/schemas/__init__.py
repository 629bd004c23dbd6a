"""
GridComply Pydantic Schemas
"""
from app.schemas.verdict import (
    ViolationBand,
    PsdCurve,
    AxisPoleResult,
    RhpResult,
    PassivityVerdict,
    PropernessReport,
    PoleIdentityReport,
    FeedthroughReport
)

from app.schemas.fit import (
    Weighting,
    FitConfig,
    OrderAttempt,
    FitReport
)

from app.schemas.jacobian import (
    JacobianReport,
    JndPoleReport
)

from app.schemas.compliance import (
    ClusterReport,
    KqvMarginReport,
    FreqRegulationReport,
    StepOutcome,
    ComplianceReport
)

from app.schemas.documents import (
    DeviceDocument,
    ModelDocument,
    ScanRequest,
    ScanResponse,
    FitRequest,
    FitResponse,
    CheckRequest,
    TransformRequest,
    JacobianRequest,
    ComplyRequest,
    PoleIdentityRequest,
    FeedthroughRequest
)

__all__ = [
    # Verdict schemas
    "ViolationBand",
    "PsdCurve",
    "AxisPoleResult",
    "RhpResult",
    "PassivityVerdict",
    "PropernessReport",
    "PoleIdentityReport",
    "FeedthroughReport",

    # Fit schemas
    "Weighting",
    "FitConfig",
    "OrderAttempt",
    "FitReport",

    # Jacobian schemas
    "JacobianReport",
    "JndPoleReport",

    # Compliance schemas
    "ClusterReport",
    "KqvMarginReport",
    "FreqRegulationReport",
    "StepOutcome",
    "ComplianceReport",

    # File and request documents
    "DeviceDocument",
    "ModelDocument",
    "ScanRequest",
    "ScanResponse",
    "FitRequest",
    "FitResponse",
    "CheckRequest",
    "TransformRequest",
    "JacobianRequest",
    "ComplyRequest",
    "PoleIdentityRequest",
    "FeedthroughRequest",
]
