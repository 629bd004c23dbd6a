"""
Operating Point Models - quiescent D-Q quantities and interface matrices
"""
import logging
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import get_settings
from app.core.exceptions import DegenerateVoltage

logger = logging.getLogger(__name__)


class Side(str, Enum):
    """Which side of the point of connection a transfer matrix describes"""
    DEVICE = "device"
    NETWORK = "network"


class OperatingPoint(BaseModel):
    """
    Quiescent D-Q voltage and current at a device terminal (pu).

    Currents are the currents the device injects into the network.
    The voltage phasor is vQ + j*vD, so the terminal angle is atan2(vD, vQ).
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    v_d: float = Field(alias="vD0")
    v_q: float = Field(alias="vQ0")
    i_d: float = Field(default=0.0, alias="iD0")
    i_q: float = Field(default=0.0, alias="iQ0")

    @model_validator(mode="after")
    def _check_voltage(self) -> "OperatingPoint":
        if not np.isfinite([self.v_d, self.v_q, self.i_d, self.i_q]).all():
            raise DegenerateVoltage()
        if np.hypot(self.v_d, self.v_q) == 0.0:
            raise DegenerateVoltage()
        return self

    @property
    def v_o(self) -> float:
        return float(np.hypot(self.v_d, self.v_q))

    @property
    def phi(self) -> float:
        return float(np.arctan2(self.v_d, self.v_q))

    @property
    def E(self) -> np.ndarray:
        """Current-to-power map"""
        return np.array([[self.v_d, self.v_q], [-self.v_q, self.v_d]])

    @property
    def C(self) -> np.ndarray:
        """Voltage-to-power map at fixed current"""
        return np.array([[self.i_d, self.i_q], [self.i_q, -self.i_d]])

    @property
    def F(self) -> np.ndarray:
        """(phi, V_n) to (vD, vQ) linearization"""
        return np.array([[self.v_q, self.v_d], [-self.v_d, self.v_q]])

    @property
    def E_inv(self) -> np.ndarray:
        return self.E.T / self.v_o ** 2

    @property
    def F_inv(self) -> np.ndarray:
        return self.F.T / self.v_o ** 2

    @property
    def power(self) -> complex:
        """Injected complex power P + jQ"""
        p = self.v_d * self.i_d + self.v_q * self.i_q
        q = self.v_d * self.i_q - self.v_q * self.i_d
        return complex(p, q)

    def reversed(self) -> "OperatingPoint":
        """Same voltage, opposite power flow"""
        return OperatingPoint(vD0=self.v_d, vQ0=self.v_q, iD0=-self.i_d, iQ0=-self.i_q)

    def to_document(self) -> dict:
        return {"vD0": self.v_d, "vQ0": self.v_q, "iD0": self.i_d, "iQ0": self.i_q}


class TransformSpec(BaseModel):
    """Operator-side transform options"""

    model_config = ConfigDict(frozen=True)

    tau: float = Field(default_factory=lambda: get_settings().default_tau, gt=0)
    k_qv_c: float = Field(default=0.0, ge=0)
    side: Side = Side.DEVICE

    @model_validator(mode="after")
    def _warn_tau(self) -> "TransformSpec":
        if self.tau > get_settings().tau_warn_limit:
            logger.warning(f"Derivative filter tau = {self.tau} s is not small")
        return self
