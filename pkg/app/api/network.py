"""
Network API Endpoints
"""
import logging

from fastapi import APIRouter, Depends, Query

from app.core.dependencies import get_jacobian_service, get_storage_service
from app.core.exceptions import GridComplyException
from app.schemas.documents import FeedthroughRequest, JacobianRequest
from app.schemas.jacobian import JacobianReport, JndPoleReport
from app.schemas.verdict import FeedthroughReport
from app.services.jacobian_service import JacobianService
from app.services.storage_service import StorageService

logger = logging.getLogger(__name__)

router = APIRouter()


def _jacobian(request: JacobianRequest, jacobians: JacobianService) -> JacobianReport:
    report = jacobians.build_jlf(request.network)
    if request.contributions:
        report = jacobians.apply_kqvc(report, request.contributions)
    return report


@router.post("/jacobian", response_model=JacobianReport)
def network_jacobian(
    request: JacobianRequest,
    jacobians: JacobianService = Depends(get_jacobian_service)
):
    """Unreduced load-flow Jacobian with optional device Q-V contributions"""
    try:
        return _jacobian(request, jacobians)
    except GridComplyException as e:
        logger.warning(f"Jacobian rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Jacobian failed: {e}", exc_info=True)
        raise


@router.get("/wscc9", response_model=JacobianReport)
def wscc9_jacobian(
    jacobians: JacobianService = Depends(get_jacobian_service),
    storage: StorageService = Depends(get_storage_service)
):
    """Load-flow Jacobian of the shipped 9-bus network"""
    try:
        return jacobians.build_jlf(storage.load_wscc9())
    except Exception as e:
        logger.error(f"9-bus Jacobian failed: {e}", exc_info=True)
        raise


@router.post("/jnd-pole", response_model=JndPoleReport)
def jnd_pole(
    request: JacobianRequest,
    tau: float = Query(None, gt=0),
    jacobians: JacobianService = Depends(get_jacobian_service)
):
    """Origin pole of the network Model-III derivative matrix"""
    try:
        return jacobians.jnd_axis_pole(_jacobian(request, jacobians), tau)
    except GridComplyException as e:
        logger.warning(f"Origin pole check rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Origin pole check failed: {e}", exc_info=True)
        raise


@router.post("/feedthrough", response_model=FeedthroughReport)
def feedthrough_check(
    request: FeedthroughRequest,
    jacobians: JacobianService = Depends(get_jacobian_service)
):
    """Trace test of a wide-band network's high-frequency feedthrough"""
    ops = request.operating_points
    try:
        return jacobians.feedthrough_trace_check(request.d1, ops[0] if len(ops) == 1 else ops, request.tau)
    except GridComplyException as e:
        logger.warning(f"Feedthrough check rejected: [{e.error_code}] {e.message}")
        raise
    except Exception as e:
        logger.error(f"Feedthrough check failed: {e}", exc_info=True)
        raise
