"""
Network Models - buses, branches and the operating voltages of a network
"""
from typing import Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.exceptions import ValidationError


class Bus(BaseModel):
    """Bus with its solved operating voltage and shunt admittance (pu)"""

    model_config = ConfigDict(frozen=True)

    id: int
    vm: float = Field(gt=0)
    va_rad: float = 0.0
    gs: float = 0.0
    bs: float = 0.0
    p: float = 0.0
    q: float = 0.0


class Branch(BaseModel):
    """Pi-model line or transformer branch (pu)"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    from_bus: int = Field(alias="from")
    to_bus: int = Field(alias="to")
    r: float = 0.0
    x: float
    b: float = 0.0

    @model_validator(mode="after")
    def _check_impedance(self) -> "Branch":
        if self.r == 0.0 and self.x == 0.0:
            raise ValidationError(f"Branch {self.from_bus}-{self.to_bus} has zero impedance")
        if self.from_bus == self.to_bus:
            raise ValidationError(f"Branch {self.from_bus}-{self.to_bus} is a self loop")
        return self


class NetworkSpec(BaseModel):
    """Network topology plus operating voltages"""

    model_config = ConfigDict(frozen=True)

    base_mva: float = Field(default=100.0, gt=0)
    buses: List[Bus]
    branches: List[Branch] = []
    name: str = ""

    @field_validator("buses")
    @classmethod
    def _unique_ids(cls, buses: List[Bus]) -> List[Bus]:
        if not buses:
            raise ValidationError("Network has no buses")
        ids = [bus.id for bus in buses]
        if len(set(ids)) != len(ids):
            raise ValidationError("Bus ids must be unique")
        return buses

    @model_validator(mode="after")
    def _check_branch_ends(self) -> "NetworkSpec":
        known = set(self.bus_ids)
        for branch in self.branches:
            if branch.from_bus not in known or branch.to_bus not in known:
                raise ValidationError(
                    f"Branch {branch.from_bus}-{branch.to_bus} references an unknown bus"
                )
        return self

    @property
    def bus_ids(self) -> List[int]:
        return [bus.id for bus in self.buses]

    @property
    def index(self) -> Dict[int, int]:
        """Bus id to row index"""
        return {bus.id: k for k, bus in enumerate(self.buses)}

    @property
    def voltages(self) -> np.ndarray:
        """Complex bus voltages vm * exp(j va)"""
        vm = np.array([bus.vm for bus in self.buses])
        va = np.array([bus.va_rad for bus in self.buses])
        return vm * np.exp(1j * va)

    def lossless(self) -> "NetworkSpec":
        """Same network with branch and shunt conductances removed"""
        return NetworkSpec(
            base_mva=self.base_mva,
            name=self.name,
            buses=[bus.model_copy(update={"gs": 0.0}) for bus in self.buses],
            branches=[branch.model_copy(update={"r": 0.0}) for branch in self.branches],
        )
