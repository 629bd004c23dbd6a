"""
Models API Endpoints - fitting, passivity checks and interface transforms
"""
import logging

from fastapi import APIRouter, Depends

from app.core.dependencies import (
    get_fit_service,
    get_passivity_service,
    get_storage_service,
    get_transform_service,
)
from app.core.exceptions import GridComplyException
from app.models.operating_point import TransformSpec
from app.schemas.documents import (
    CheckRequest,
    FitRequest,
    FitResponse,
    ModelDocument,
    PoleIdentityRequest,
    TransformRequest,
)
from app.schemas.verdict import PassivityVerdict, PoleIdentityReport
from app.services.passivity_service import PassivityService
from app.services.storage_service import StorageService
from app.services.transform_service import TransformService
from app.services.vector_fit_service import VectorFitService

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/fit", response_model=FitResponse)
def fit_model(
    request: FitRequest,
    fitter: VectorFitService = Depends(get_fit_service),
    storage: StorageService = Depends(get_storage_service)
):
    """Rational state-space fit of scan rows"""
    try:
        response = storage.response_from_rows(request.rows)
        model, report = fitter.vector_fit(response, request.config)
    except GridComplyException as e:
        logger.warning(f"Fit rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Fit failed: {e}", exc_info=True)
        raise
    return FitResponse(model=ModelDocument.from_model(model), report=report)


@router.post("/check", response_model=PassivityVerdict)
def check_model(
    request: CheckRequest,
    passivity: PassivityService = Depends(get_passivity_service)
):
    """Passivity verdict of a state-space model over a frequency range"""
    try:
        return passivity.passivity_verdict(request.model.to_model(), request.range)
    except GridComplyException as e:
        logger.warning(f"Passivity check rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Passivity check failed: {e}", exc_info=True)
        raise


@router.post("/transform", response_model=ModelDocument)
def transform_model(
    request: TransformRequest,
    transforms: TransformService = Depends(get_transform_service)
):
    """Convert a model between the interface formulations"""
    try:
        spec = TransformSpec(tau=request.tau, k_qv_c=request.kqvc, side=request.side)
        model = transforms.convert(request.model.to_model(), request.to, request.operating_point, spec)
    except GridComplyException as e:
        logger.warning(f"Transform to Model {request.to.value} rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Transform to Model {request.to.value} failed: {e}", exc_info=True)
        raise
    logger.info(f"Transformed model to Model {model.kind.value} ({model.n_states} states)")
    return ModelDocument.from_model(model)


@router.post("/pole-identity", response_model=PoleIdentityReport)
def pole_identity(
    request: PoleIdentityRequest,
    transforms: TransformService = Depends(get_transform_service)
):
    """Closed-loop poles of the device-network interconnection in each formulation"""
    try:
        return transforms.pole_identity_check(
            request.network.to_model(),
            request.device.to_model(),
            request.operating_point,
            request.tau
        )
    except GridComplyException as e:
        logger.warning(f"Pole identity check rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Pole identity check failed: {e}", exc_info=True)
        raise
