"""
Shared fixtures
"""
from typing import Callable

import numpy as np
import pytest

from app.models.device import DroopParams
from app.models.lti import ModelKind, RationalModel
from app.models.network import NetworkSpec
from app.models.operating_point import OperatingPoint
from app.services.storage_service import StorageService


def stable_model(
    rng: np.random.Generator,
    n_pairs: int,
    n_real: int = 0,
    omega_range: tuple = (2 * np.pi * 1.0, 2 * np.pi * 200.0),
    feedthrough: float = 1.0,
    kind: ModelKind = ModelKind.I
) -> RationalModel:
    """Random real 2x2 model with lightly damped pairs and real poles"""
    blocks, rows_b, cols_c = [], [], []
    lo, hi = np.log(omega_range[0]), np.log(omega_range[1])
    for _ in range(n_pairs):
        w = float(np.exp(rng.uniform(lo, hi)))
        a = -rng.uniform(0.05, 0.3) * w
        blocks.append(np.array([[a, -w], [w, a]]))
        rows_b.append(rng.standard_normal((2, 2)))
        cols_c.append(w * rng.standard_normal((2, 2)) / 10)
    for _ in range(n_real):
        p = -float(np.exp(rng.uniform(lo, hi)))
        blocks.append(np.array([[p]]))
        rows_b.append(rng.standard_normal((1, 2)))
        cols_c.append(abs(p) * rng.standard_normal((2, 1)) / 10)
    n = sum(block.shape[0] for block in blocks)
    A = np.zeros((n, n))
    k = 0
    for block in blocks:
        size = block.shape[0]
        A[k:k + size, k:k + size] = block
        k += size
    D = feedthrough * (np.eye(2) + 0.1 * rng.standard_normal((2, 2)))
    return RationalModel(A=A, B=np.vstack(rows_b), C=np.hstack(cols_c), D=D, kind=kind)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def random_model(rng) -> Callable[..., RationalModel]:
    def _make(n_pairs: int = 2, n_real: int = 0, **kwargs) -> RationalModel:
        return stable_model(rng, n_pairs, n_real, **kwargs)
    return _make


@pytest.fixture
def flat_op() -> OperatingPoint:
    """Unit voltage on the Q axis, no current"""
    return OperatingPoint(vD0=0.0, vQ0=1.0)


@pytest.fixture
def loaded_op() -> OperatingPoint:
    return OperatingPoint(vD0=0.2, vQ0=0.98, iD0=0.3, iQ0=0.6)


@pytest.fixture
def droop() -> DroopParams:
    return DroopParams(k_pf=10.0, k_qv=5.0, tau=0.01)


@pytest.fixture
def storage() -> StorageService:
    return StorageService()


@pytest.fixture
def wscc9(storage) -> NetworkSpec:
    return storage.load_wscc9()
