"""
Compliance API Endpoints
"""
import logging

from fastapi import APIRouter, Depends

from app.core.dependencies import get_compliance_service, get_storage_service
from app.core.exceptions import GridComplyException, ValidationError
from app.models.operating_point import TransformSpec
from app.schemas.compliance import ComplianceReport
from app.schemas.documents import ComplyRequest
from app.schemas.fit import FitConfig
from app.services.compliance_service import ComplianceService
from app.services.storage_service import StorageService

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/run", response_model=ComplianceReport)
def run_compliance(
    request: ComplyRequest,
    compliance: ComplianceService = Depends(get_compliance_service),
    storage: StorageService = Depends(get_storage_service)
):
    """
    Run the eight-step device criteria on a scan or a fitted model.

    A failed criterion is part of the report, not an HTTP error.
    """
    if (request.rows is None) == (request.model is None):
        raise ValidationError("Provide exactly one of 'rows' or 'model'")
    scan = storage.response_from_rows(request.rows) if request.rows is not None else request.model.to_model()

    spec = TransformSpec(tau=request.tau, k_qv_c=request.kqvc)
    cfg = FitConfig(order=request.order, auto_order=request.auto_order)
    try:
        return compliance.run_pipeline(
            scan,
            request.operating_point,
            spec,
            cfg,
            series_r=request.series_r,
            high_limit_hz=request.high_limit_hz
        )
    except GridComplyException as e:
        logger.warning(f"Compliance run rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Compliance run failed: {e}", exc_info=True)
        raise
