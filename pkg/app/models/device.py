"""
Device Models - parameters of the droop, VSG and load archetypes
"""
import logging
from enum import Enum
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import get_settings
from app.core.exceptions import SingularLoad, SingularOperatingPoint
from app.models.operating_point import OperatingPoint

logger = logging.getLogger(__name__)


class DeviceKind(str, Enum):
    """Device archetype"""
    DROOP = "droop"
    VSG = "vsg"
    LOAD = "load"


def _warn_large_tau(tau: float, owner: str) -> None:
    if tau > get_settings().tau_warn_limit:
        logger.warning(f"{owner}: derivative filter tau = {tau} s is not small")


class DroopParams(BaseModel):
    """P-frequency and Q-voltage droop gains (pu)"""

    model_config = ConfigDict(frozen=True)

    k_pf: float = Field(gt=0)
    k_qv: float = Field(gt=0)
    tau: float = Field(default=0.01, gt=0)

    @model_validator(mode="after")
    def _check_tau(self) -> "DroopParams":
        _warn_large_tau(self.tau, "DroopParams")
        return self


class VsgParams(BaseModel):
    """
    Classical-machine emulation: swing equation behind a transient reactance.

    zeta_o is the rotor angle measured from the terminal voltage angle.
    """

    model_config = ConfigDict(frozen=True)

    M: float = Field(gt=0)
    D_m: float = Field(ge=0)
    E_g: float = Field(gt=0)
    x_g: float = Field(gt=0)
    delta_o: float = 0.0
    zeta_o: float = 0.0

    @classmethod
    def with_operating_point(
        cls, M: float, D_m: float, E_g: float, x_g: float, delta_o: float, op: OperatingPoint
    ) -> "VsgParams":
        """Build parameters for a given rotor angle, deriving zeta_o from the terminal angle"""
        return cls(M=M, D_m=D_m, E_g=E_g, x_g=x_g, delta_o=delta_o, zeta_o=delta_o - op.phi)

    @classmethod
    def at_operating_point(cls, M: float, D_m: float, x_g: float, op: OperatingPoint) -> "VsgParams":
        """
        Derive E_g and delta_o from the terminal voltage and injected current.

        E_g exp(j delta_o) = V exp(j phi) + j x_g I, phasors written as Q + jD.
        """
        v = complex(op.v_q, op.v_d)
        i = complex(op.i_q, op.i_d)
        e = v + 1j * x_g * i
        return cls.with_operating_point(M, D_m, float(abs(e)), x_g, float(np.angle(e)), op)

    def coefficients(self, op: OperatingPoint) -> tuple:
        """
        Linearization coefficients (a, b, c) of the absorbed power.

        P = -V E sin(zeta) / x, Q = (V^2 - V E cos(zeta)) / x, with V = V_o V_n.
        a = -dP/dzeta, b = -dP/dV_n = dQ/dzeta, c = dQ/dV_n.
        """
        v = op.v_o
        a = v * self.E_g * np.cos(self.zeta_o) / self.x_g
        b = v * self.E_g * np.sin(self.zeta_o) / self.x_g
        c = v * (2 * v - self.E_g * np.cos(self.zeta_o)) / self.x_g
        return float(a), float(b), float(c)

    def static_matrix(self, op: OperatingPoint) -> np.ndarray:
        """Frequency-independent part K of the inverse Model-II matrix"""
        a, b, c = self.coefficients(op)
        det = a * c - b * b
        denominator = 2 * op.v_o * np.cos(self.zeta_o) - self.E_g
        if abs(denominator) <= 1e-12 * max(1.0, self.E_g) or det == 0.0:
            raise SingularOperatingPoint(
                "2 V_o cos(zeta_o) equals E_g at the operating point",
                details={"v_o": op.v_o, "zeta_o": self.zeta_o, "E_g": self.E_g}
            )
        return np.array([[c, b], [b, a]]) / det


class LoadParams(BaseModel):
    """Sensitivities of load P and Q to frequency and voltage (pu/pu)"""

    model_config = ConfigDict(frozen=True)

    k_pf: float
    k_pv: float
    k_qf: float
    k_qv: float
    tau: float = Field(default=0.01, gt=0)

    @model_validator(mode="after")
    def _check_determinant(self) -> "LoadParams":
        if self.determinant == 0.0:
            raise SingularLoad(self.determinant)
        _warn_large_tau(self.tau, "LoadParams")
        return self

    @property
    def determinant(self) -> float:
        return self.k_pf * self.k_qv - self.k_pv * self.k_qf


DeviceParams = Union[DroopParams, VsgParams, LoadParams]

PARAMS_BY_KIND = {
    DeviceKind.DROOP: DroopParams,
    DeviceKind.VSG: VsgParams,
    DeviceKind.LOAD: LoadParams,
}
