"""
GridComply FastAPI Dependencies
"""
from functools import lru_cache

from app.services.compliance_service import ComplianceService
from app.services.device_service import DeviceModelService
from app.services.jacobian_service import JacobianService
from app.services.lti_service import LTIService
from app.services.passivity_service import PassivityService
from app.services.storage_service import StorageService
from app.services.transform_service import TransformService
from app.services.vector_fit_service import VectorFitService


@lru_cache()
def get_lti_service() -> LTIService:
    return LTIService()


@lru_cache()
def get_device_service() -> DeviceModelService:
    return DeviceModelService()


@lru_cache()
def get_transform_service() -> TransformService:
    return TransformService()


@lru_cache()
def get_passivity_service() -> PassivityService:
    return PassivityService()


@lru_cache()
def get_fit_service() -> VectorFitService:
    return VectorFitService()


@lru_cache()
def get_jacobian_service() -> JacobianService:
    return JacobianService()


@lru_cache()
def get_compliance_service() -> ComplianceService:
    return ComplianceService()


@lru_cache()
def get_storage_service() -> StorageService:
    """Stateless; shared by every request"""
    return StorageService()
