"""
LTI Models - frequency grids, state-space models, sampled responses and spectra
"""
from enum import Enum
from typing import Any, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.config import get_settings
from app.core.exceptions import BadRange, ValidationError


def frozen_array(value: Any, dtype: Any = float) -> np.ndarray:
    """Copy into a read-only numpy array"""
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


class ModelKind(str, Enum):
    """Interface-variable formulation of a transfer matrix"""
    I = "I"  # noqa: E741  (currents, voltages)
    II = "II"  # (P, Q), (phi, V_n)
    III = "III"  # (P, Q), (filtered frequency, filtered voltage derivative)


class Spacing(str, Enum):
    """Frequency grid spacing"""
    LOG = "log"
    LINEAR = "linear"
    CUSTOM = "custom"


class RangeTag(str, Enum):
    """Frequency range a grid point belongs to"""
    LOW = "low"
    MID = "mid"
    HIGH = "high"


class FreqRange(str, Enum):
    """Range requested for a passivity verdict"""
    LOW = "low"
    HIGH = "high"
    FULL = "full"


DEFAULT_LABELS = {
    ModelKind.I: (("vD", "vQ"), ("iD", "iQ")),
    ModelKind.II: (("phi", "Vn"), ("P", "Q")),
    ModelKind.III: (("omega_f", "Vn_d"), ("P", "Q")),
}


class FreqGrid(BaseModel):
    """Strictly increasing grid of angular frequencies (rad/s)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    points: np.ndarray
    spacing: Spacing = Spacing.LOG

    @field_validator("points", mode="before")
    @classmethod
    def _validate_points(cls, value: Any) -> np.ndarray:
        arr = np.asarray(value, dtype=float).ravel()
        if arr.size == 0:
            raise BadRange("Frequency grid is empty")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise BadRange("Frequency grid must contain finite, non-negative values")
        if np.any(np.diff(arr) <= 0):
            raise BadRange("Frequency grid must be strictly increasing")
        return frozen_array(arr)

    @classmethod
    def from_hz(cls, f_hz: Any, spacing: Spacing = Spacing.CUSTOM) -> "FreqGrid":
        return cls(points=2 * np.pi * np.asarray(f_hz, dtype=float), spacing=spacing)

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def f_hz(self) -> np.ndarray:
        return self.points / (2 * np.pi)

    @property
    def low_mask(self) -> np.ndarray:
        limit = 2 * np.pi * get_settings().low_band_hz
        return self.points <= limit * (1 + 1e-12)

    @property
    def high_mask(self) -> np.ndarray:
        limit = 2 * np.pi * get_settings().high_band_hz
        return self.points >= limit * (1 - 1e-12)

    @property
    def tags(self) -> Tuple[RangeTag, ...]:
        low, high = self.low_mask, self.high_mask
        return tuple(
            RangeTag.LOW if lo else RangeTag.HIGH if hi else RangeTag.MID
            for lo, hi in zip(low, high)
        )


class RationalModel(BaseModel):
    """
    Real state-space realization G(s) = C (sI - A)^-1 B + D.

    Port labels default to the interface variables of the model kind.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    kind: ModelKind = ModelKind.I
    input_labels: Optional[Tuple[str, ...]] = None
    output_labels: Optional[Tuple[str, ...]] = None

    @model_validator(mode="before")
    @classmethod
    def _coerce_matrices(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for name in ("A", "B", "C", "D"):
            if name in data and np.iscomplexobj(np.asarray(data[name])):
                raise ValidationError(f"State-space matrix {name} must be real")

        D = np.atleast_2d(np.array(data.get("D", np.zeros((2, 2))), dtype=float))
        p, m = D.shape
        A = np.array(data.get("A", []), dtype=float)
        A = np.zeros((0, 0)) if A.size == 0 else np.atleast_2d(A)
        n = A.shape[0]
        B = np.array(data.get("B", []), dtype=float)
        C = np.array(data.get("C", []), dtype=float)
        data["A"] = A
        data["B"] = B.reshape(n, m) if B.size == n * m else np.atleast_2d(B)
        data["C"] = C.reshape(p, n) if C.size == p * n else np.atleast_2d(C)
        data["D"] = D
        return data

    @model_validator(mode="after")
    def _check_shapes(self) -> "RationalModel":
        n = self.A.shape[0]
        p, m = self.D.shape
        if self.A.shape != (n, n):
            raise ValidationError(f"A must be square, got {self.A.shape}")
        if self.B.shape != (n, m):
            raise ValidationError(f"B must be {n}x{m}, got {self.B.shape}")
        if self.C.shape != (p, n):
            raise ValidationError(f"C must be {p}x{n}, got {self.C.shape}")
        for name in ("A", "B", "C", "D"):
            mat = getattr(self, name)
            if not np.all(np.isfinite(mat)):
                raise ValidationError(f"State-space matrix {name} has non-finite entries")
            mat.setflags(write=False)
        return self

    @classmethod
    def static(cls, D: Any, kind: ModelKind = ModelKind.I) -> "RationalModel":
        """Feedthrough-only model"""
        D = np.atleast_2d(np.asarray(D, dtype=float))
        return cls(A=np.zeros((0, 0)), B=np.zeros((0, D.shape[1])), C=np.zeros((D.shape[0], 0)), D=D, kind=kind)

    @property
    def n_states(self) -> int:
        return int(self.A.shape[0])

    @property
    def n_inputs(self) -> int:
        return int(self.D.shape[1])

    @property
    def n_outputs(self) -> int:
        return int(self.D.shape[0])

    @property
    def ports(self) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
        """(input labels, output labels)"""
        default_in, default_out = DEFAULT_LABELS[self.kind]
        if self.n_inputs != 2 or self.n_outputs != 2:
            default_in = tuple(f"u{k + 1}" for k in range(self.n_inputs))
            default_out = tuple(f"y{k + 1}" for k in range(self.n_outputs))
        return (self.input_labels or default_in, self.output_labels or default_out)

    def with_matrices(self, **changes: Any) -> "RationalModel":
        """Return a validated copy with some matrices or metadata replaced"""
        data = {
            "A": self.A, "B": self.B, "C": self.C, "D": self.D,
            "kind": self.kind,
            "input_labels": self.input_labels,
            "output_labels": self.output_labels,
        }
        data.update(changes)
        return RationalModel(**data)


class FreqResponse(BaseModel):
    """One complex transfer matrix per grid point"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: FreqGrid
    samples: np.ndarray
    kind: ModelKind = ModelKind.I

    @field_validator("samples", mode="before")
    @classmethod
    def _validate_samples(cls, value: Any) -> np.ndarray:
        arr = np.asarray(value, dtype=complex)
        if arr.ndim != 3:
            raise ValidationError(f"Samples must have shape (points, outputs, inputs), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("Frequency response contains non-finite entries")
        return frozen_array(arr, complex)

    @model_validator(mode="after")
    def _check_length(self) -> "FreqResponse":
        if self.samples.shape[0] != len(self.grid):
            raise ValidationError(
                f"Expected one sample per grid point ({len(self.grid)}), got {self.samples.shape[0]}"
            )
        return self

    def __len__(self) -> int:
        return len(self.grid)


class Spectrum(BaseModel):
    """Eigenvalues with repetitions"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _validate_values(cls, value: Any) -> np.ndarray:
        arr = np.asarray(value, dtype=complex).ravel()
        order = np.lexsort((arr.imag, arr.real))
        return frozen_array(arr[order], complex)

    def __len__(self) -> int:
        return int(self.values.size)

    def is_conjugate_closed(self, tol: float = 1e-8) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values)))) if self.values.size else 1.0
        for lam in self.values:
            if np.min(np.abs(self.values - np.conj(lam))) > tol * scale:
                return False
        return True

    def as_pairs(self) -> List[List[float]]:
        """[[re, im], ...] for JSON output"""
        return [[float(v.real), float(v.imag)] for v in self.values]
