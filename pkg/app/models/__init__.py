"""
GridComply Domain Models
"""
from app.models.lti import (
    ModelKind,
    Spacing,
    RangeTag,
    FreqRange,
    FreqGrid,
    RationalModel,
    FreqResponse,
    Spectrum
)
from app.models.operating_point import OperatingPoint, TransformSpec, Side
from app.models.device import DeviceKind, DroopParams, VsgParams, LoadParams, DeviceParams, PARAMS_BY_KIND
from app.models.network import Bus, Branch, NetworkSpec

__all__ = [
    "ModelKind",
    "Spacing",
    "RangeTag",
    "FreqRange",
    "FreqGrid",
    "RationalModel",
    "FreqResponse",
    "Spectrum",
    "OperatingPoint",
    "TransformSpec",
    "Side",
    "DeviceKind",
    "DroopParams",
    "VsgParams",
    "LoadParams",
    "DeviceParams",
    "PARAMS_BY_KIND",
    "Bus",
    "Branch",
    "NetworkSpec"
]
