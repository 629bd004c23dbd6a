"""
Devices API Endpoints
"""
import logging
from typing import List

from fastapi import APIRouter, Depends

from app.config import DEVICE_KINDS, SCAN_CSV_COLUMNS
from app.core.exceptions import GridComplyException, ValidationError
from app.core.dependencies import get_device_service, get_lti_service, get_storage_service
from app.models.lti import ModelKind
from app.schemas.documents import DeviceDocument, ModelDocument, ScanRequest, ScanResponse
from app.services.device_service import DeviceModelService
from app.services.lti_service import LTIService
from app.services.storage_service import StorageService

logger = logging.getLogger(__name__)

router = APIRouter()


@router.get("/kinds", response_model=List[str])
async def list_device_kinds():
    """Supported device archetypes"""
    return DEVICE_KINDS


@router.post("/scan", response_model=ScanResponse)
def scan_device(
    request: ScanRequest,
    devices: DeviceModelService = Depends(get_device_service),
    lti: LTIService = Depends(get_lti_service),
    storage: StorageService = Depends(get_storage_service)
):
    """Synthetic admittance scan of a device archetype"""
    device = request.device
    try:
        grid = lti.make_grid(request.fmin, request.fmax, request.points, request.spacing)
        response = devices.scan(device.kind, device.build_params(), device.operating_point, grid)
        return ScanResponse(columns=SCAN_CSV_COLUMNS, rows=storage.rows_from_response(response))
    except GridComplyException as e:
        logger.warning(f"Scan of {device.kind.value} rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Scan of {device.kind.value} failed: {e}", exc_info=True)
        raise


@router.post("/model", response_model=ModelDocument)
def device_model(
    device: DeviceDocument,
    kind: ModelKind = ModelKind.I,
    devices: DeviceModelService = Depends(get_device_service)
):
    """State-space model of a device in Model I or Model II form"""
    if kind == ModelKind.III:
        raise ValidationError("Device models are available as Model I or Model II")
    try:
        params = device.build_params()
        if kind == ModelKind.II:
            model = devices.device_js(device.kind, params, device.operating_point)
        else:
            model = devices.device_ys(device.kind, params, device.operating_point)
    except GridComplyException as e:
        logger.warning(f"Model of {device.kind.value} rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Model of {device.kind.value} failed: {e}", exc_info=True)
        raise
    logger.info(f"Built {device.kind.value} Model-{model.kind.value} with {model.n_states} states")
    return ModelDocument.from_model(model)
