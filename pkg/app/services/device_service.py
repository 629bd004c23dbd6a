"""
Device Model Service - closed-form small-signal models of the device archetypes
"""
import logging
from typing import Optional

import numpy as np

from app.config import get_settings
from app.core.exceptions import InvalidParameterError
from app.models.device import DeviceKind, DeviceParams, DroopParams, LoadParams, VsgParams
from app.models.lti import DEFAULT_LABELS, FreqGrid, FreqResponse, ModelKind, RationalModel
from app.models.operating_point import OperatingPoint, Side
from app.services.lti_service import LTIService
from app.services.transform_service import TransformService

logger = logging.getLogger(__name__)

settings = get_settings()


def _inverse_labels(kind: ModelKind) -> dict:
    inputs, outputs = DEFAULT_LABELS[kind]
    return {"input_labels": outputs, "output_labels": inputs}


class DeviceModelService:
    """Service building device transfer matrices in each interface formulation"""

    def __init__(self):
        self.lti = LTIService()
        self.transforms = TransformService()

    # Droop

    def droop_js(self, p: DroopParams) -> RationalModel:
        """J_s = diag(k_pf s / (1 + s tau), k_qv)"""
        tau = p.tau
        return RationalModel(
            A=[[-1 / tau]],
            B=[[1 / tau, 0.0]],
            C=[[-p.k_pf / tau], [0.0]],
            D=[[p.k_pf / tau, 0.0], [0.0, p.k_qv]],
            kind=ModelKind.II
        )

    def droop_ns(self, p: DroopParams) -> RationalModel:
        """N_s = diag((1 + s tau) / (s k_pf), 1 / k_qv); simple pole at s = 0"""
        return RationalModel(
            A=[[0.0]],
            B=[[1.0, 0.0]],
            C=[[1 / p.k_pf], [0.0]],
            D=[[p.tau / p.k_pf, 0.0], [0.0, 1 / p.k_qv]],
            kind=ModelKind.II,
            **_inverse_labels(ModelKind.II)
        )

    def droop_nsd(self, p: DroopParams) -> RationalModel:
        """N_sd = diag(1 / k_pf, s / (k_qv (1 + s tau)))"""
        tau = p.tau
        return RationalModel(
            A=[[-1 / tau]],
            B=[[0.0, 1 / tau]],
            C=[[0.0], [-1 / (p.k_qv * tau)]],
            D=[[1 / p.k_pf, 0.0], [0.0, 1 / (p.k_qv * tau)]],
            kind=ModelKind.III,
            **_inverse_labels(ModelKind.III)
        )

    # Virtual synchronous generator

    def vsg_ns(self, p: VsgParams, op: OperatingPoint) -> RationalModel:
        """
        N_s = h(s) e1 e1^T + K with h = 1 / (M s^2 + D_m s).

        Swing equation M d2delta/dt2 + D_m ddelta/dt = -dP_e with the
        machine behind x_g. States (delta, omega_r); D_m = 0 leaves a
        Jordan block at s = 0.
        """
        K = p.static_matrix(op)
        return RationalModel(
            A=[[0.0, 1.0], [0.0, -p.D_m / p.M]],
            B=[[0.0, 0.0], [1 / p.M, 0.0]],
            C=[[1.0, 0.0], [0.0, 0.0]],
            D=K,
            kind=ModelKind.II,
            **_inverse_labels(ModelKind.II)
        )

    def vsg_js(self, p: VsgParams, op: OperatingPoint) -> RationalModel:
        """J_s = 1/(1 + a h) [[a, -b], [-b, c (1 + a h) - h b^2]]"""
        js = self.transforms.invert_tf(self.vsg_ns(p, op))
        return js.with_matrices(input_labels=None, output_labels=None)

    def vsg_nsd(self, p: VsgParams, op: OperatingPoint, tau: Optional[float] = None) -> RationalModel:
        """
        N_sd = J_d / (1 + s tau) with J_d = e1 e1^T / (M s + D_m) + s K.

        Needs D_m > 0; poles at -D_m/M and -1/tau.
        """
        tau = tau or settings.default_tau
        if p.D_m <= 0:
            raise InvalidParameterError("D_m", p.D_m, "the derivative model needs positive damping")
        K = p.static_matrix(op)
        A = np.array([
            [-p.D_m / p.M, 0.0, 0.0, 0.0],
            [1 / tau, -1 / tau, 0.0, 0.0],
            [0.0, 0.0, -1 / tau, 0.0],
            [0.0, 0.0, 0.0, -1 / tau]
        ])
        B = np.array([
            [1 / p.M, 0.0],
            [0.0, 0.0],
            [1 / tau, 0.0],
            [0.0, 1 / tau]
        ])
        C = np.hstack([np.array([[0.0, 1.0], [0.0, 0.0]]), -K / tau])
        return RationalModel(A=A, B=B, C=C, D=K / tau, kind=ModelKind.III, **_inverse_labels(ModelKind.III))

    def vsg_jd(self, p: VsgParams, op: OperatingPoint, omega: np.ndarray) -> np.ndarray:
        """Pointwise J_d(jΩ); improper, so it has no state-space form"""
        K = p.static_matrix(op)
        s = 1j * np.atleast_1d(np.asarray(omega, dtype=float))
        jd = s[:, None, None] * K[None, :, :]
        jd[:, 0, 0] += 1 / (p.M * s + p.D_m)
        return jd

    # Loads

    def load_js(self, p: LoadParams) -> RationalModel:
        """J_s = [[k_pf g, k_pv], [k_qf g, k_qv]] with g = s / (1 + s tau)"""
        tau = p.tau
        return RationalModel(
            A=[[-1 / tau]],
            B=[[1 / tau, 0.0]],
            C=[[-p.k_pf / tau], [-p.k_qf / tau]],
            D=[[p.k_pf / tau, p.k_pv], [p.k_qf / tau, p.k_qv]],
            kind=ModelKind.II
        )

    def load_nsd(self, p: LoadParams, tau: Optional[float] = None) -> RationalModel:
        """N_sd = 1/det [[k_qv, -k_pv], [-k_qf g, k_pf g]]; passivity is not implied"""
        tau = tau or p.tau
        det = p.determinant
        row = np.array([-p.k_qf, p.k_pf]) / det
        return RationalModel(
            A=[[-1 / tau]],
            B=(row / tau)[None, :],
            C=[[0.0], [-1 / tau]],
            D=np.vstack([[p.k_qv / det, -p.k_pv / det], row / tau]),
            kind=ModelKind.III,
            **_inverse_labels(ModelKind.III)
        )

    # Dispatch

    def device_js(self, kind: DeviceKind, params: DeviceParams, op: OperatingPoint) -> RationalModel:
        """Model-II matrix of any archetype"""
        kind = DeviceKind(kind)
        if kind == DeviceKind.DROOP:
            return self.droop_js(params)
        if kind == DeviceKind.VSG:
            return self.vsg_js(params, op)
        return self.load_js(params)

    def device_ys(self, kind: DeviceKind, params: DeviceParams, op: OperatingPoint) -> RationalModel:
        """
        Model-I admittance obtained by inverting the Model-II relation.

        Args:
            kind: droop, vsg or load
            params: Parameters matching the kind
            op: Operating point (injected currents)

        Returns:
            RationalModel of kind I
        """
        js = self.device_js(kind, params, op)
        ys = self.transforms.model_ii_to_i(js, op, Side.DEVICE)
        logger.debug(f"Built {DeviceKind(kind).value} admittance with {ys.n_states} states")
        return ys

    def scan(self, kind: DeviceKind, params: DeviceParams, op: OperatingPoint, grid: FreqGrid) -> FreqResponse:
        """Synthetic frequency scan of the device admittance"""
        response = self.lti.freq_response(self.device_ys(kind, params, op), grid)
        logger.info(f"Scanned {DeviceKind(kind).value} admittance at {len(grid)} points")
        return response
