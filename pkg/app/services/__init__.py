"""
GridComply Services
"""
from app.services.lti_service import LTIService
from app.services.transform_service import TransformService
from app.services.device_service import DeviceModelService
from app.services.passivity_service import PassivityService
from app.services.vector_fit_service import VectorFitService
from app.services.jacobian_service import JacobianService
from app.services.compliance_service import ComplianceService
from app.services.storage_service import StorageService

__all__ = [
    "LTIService",
    "TransformService",
    "DeviceModelService",
    "PassivityService",
    "VectorFitService",
    "JacobianService",
    "ComplianceService",
    "StorageService"
]
