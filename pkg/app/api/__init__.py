"""
GridComply API Routes
"""
from app.api.devices import router as devices_router
from app.api.models import router as models_router
from app.api.network import router as network_router
from app.api.compliance import router as compliance_router

__all__ = [
    "devices_router",
    "models_router",
    "network_router",
    "compliance_router"
]
