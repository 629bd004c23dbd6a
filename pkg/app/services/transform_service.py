"""
Transform Service - conversions among Model I, II and III and the properness tests
"""
import logging
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import directed_hausdorff

from app.config import get_settings
from app.core.exceptions import ImproperInverse, InsufficientKqv, ValidationError
from app.models.lti import DEFAULT_LABELS, FreqGrid, ModelKind, RationalModel
from app.models.operating_point import OperatingPoint, Side, TransformSpec
from app.schemas.verdict import PoleIdentityReport, PropernessReport
from app.services.lti_service import LTIService

logger = logging.getLogger(__name__)


def _pairs(values: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in values]


def _current_sign(side: Side) -> float:
    """Device side subtracts the current term, network side adds it"""
    return -1.0 if Side(side) == Side.DEVICE else 1.0


class TransformService:
    """Service for interface-variable transforms"""

    def __init__(self):
        self.settings = get_settings()
        self.lti = LTIService()

    def _require_two_port(self, model: RationalModel) -> None:
        if model.n_inputs != 2 or model.n_outputs != 2:
            raise ValidationError("Interface transforms apply to 2x2 transfer matrices")

    def model_i_to_ii(self, model: RationalModel, op: OperatingPoint, side: Side = Side.DEVICE) -> RationalModel:
        """
        (E Y ∓ C) F: the state matrix is untouched, so poles are preserved.

        Args:
            model: Model-I admittance
            op: Operating point
            side: device (-C) or network (+C)

        Returns:
            Model-II transfer matrix
        """
        self._require_two_port(model)
        sign = _current_sign(side)
        return RationalModel(
            A=model.A,
            B=model.B @ op.F,
            C=op.E @ model.C,
            D=(op.E @ model.D + sign * op.C) @ op.F,
            kind=ModelKind.II
        )

    def model_ii_to_i(self, model: RationalModel, op: OperatingPoint, side: Side = Side.DEVICE) -> RationalModel:
        """Y = E^-1 (J F^-1 ± C), the inverse of model_i_to_ii"""
        self._require_two_port(model)
        sign = _current_sign(side)
        return RationalModel(
            A=model.A,
            B=model.B @ op.F_inv,
            C=op.E_inv @ model.C,
            D=op.E_inv @ (model.D @ op.F_inv - sign * op.C),
            kind=ModelKind.I
        )

    def model_ii_to_iii(self, model: RationalModel, tau: float) -> RationalModel:
        """
        J_sd(s) = J_s(s) (1 + s tau) / s, one integrator per input channel.

        The input factor tau + 1/s is realized as z' = u, w = z + tau u.
        """
        if tau <= 0:
            raise ValidationError(f"tau must be positive, got {tau}")
        n, m, p = model.n_states, model.n_inputs, model.n_outputs
        A = np.block([
            [model.A, model.B],
            [np.zeros((m, n)), np.zeros((m, m))]
        ])
        B = np.vstack([tau * model.B, np.eye(m)])
        C = np.hstack([model.C, model.D])
        inputs, outputs = DEFAULT_LABELS[ModelKind.III]
        return RationalModel(
            A=A, B=B, C=C, D=tau * model.D,
            kind=ModelKind.III,
            input_labels=inputs if m == 2 else None,
            output_labels=outputs if p == 2 else None
        )

    def invert_tf(self, model: RationalModel) -> RationalModel:
        """
        Inverse system (A - B D^-1 C, B D^-1, -D^-1 C, D^-1).

        Raises:
            ImproperInverse: feedthrough singular or condition number above the limit
        """
        D = model.D
        if D.shape[0] != D.shape[1]:
            raise ImproperInverse(float("inf"))
        condition = float(np.linalg.cond(D)) if D.size else 1.0
        if not np.isfinite(condition) or condition > self.settings.inverse_cond_limit:
            raise ImproperInverse(condition)
        d_inv = np.linalg.inv(D)
        inputs, outputs = model.ports
        return RationalModel(
            A=model.A - model.B @ d_inv @ model.C,
            B=model.B @ d_inv,
            C=-d_inv @ model.C,
            D=d_inv,
            kind=model.kind,
            input_labels=outputs,
            output_labels=inputs
        )

    def extract_kqvc(self, model: RationalModel, k_qv_c: float, grid: Optional[FreqGrid] = None) -> RationalModel:
        """
        Subtract a constant Q-V contribution from the (2,2) feedthrough.

        Raises:
            InsufficientKqv: low-frequency Re J_s(2,2) falls below k_qv_c somewhere
        """
        if k_qv_c < 0:
            raise ValidationError(f"k_qv_c must be non-negative, got {k_qv_c}")
        if k_qv_c == 0:
            return model
        available = self.available_kqv(model, grid)
        if available < k_qv_c:
            raise InsufficientKqv(k_qv_c, available)
        D = model.D.copy()
        D[1, 1] -= k_qv_c
        logger.info(f"Extracted k_qv^c = {k_qv_c} pu (available {available:.4g} pu)")
        return model.with_matrices(D=D)

    def available_kqv(self, model: RationalModel, grid: Optional[FreqGrid] = None) -> float:
        """min Re J_s(2,2)(jΩ) over the low range"""
        response = self.lti.freq_response(model, grid or self.lti.low_grid())
        return float(np.min(response.samples[:, 1, 1].real))

    def properness(self, feedthrough: np.ndarray, op: OperatingPoint) -> PropernessReport:
        """Determinants of (E D - C) F and (E D + C) F"""
        D = np.asarray(feedthrough, dtype=float)
        tol = self.settings.properness_tol

        def _check(sign: float) -> tuple:
            matrix = (op.E @ D + sign * op.C) @ op.F
            det = float(np.linalg.det(matrix))
            scale = float(np.linalg.norm(matrix, 2)) ** 2
            return det, abs(det) > tol * scale

        det_device, proper_device = _check(-1.0)
        det_network, proper_network = _check(1.0)
        return PropernessReport(
            det_device=det_device,
            det_network=det_network,
            proper_device=proper_device,
            proper_network=proper_network
        )

    def check_properness(self, feedthrough: np.ndarray, op: OperatingPoint) -> bool:
        """|det((E D + C) F)| > tol * ||(E D + C) F||^2"""
        return self.properness(feedthrough, op).proper_network

    def convert(
        self,
        model: RationalModel,
        to: ModelKind,
        op: Optional[OperatingPoint] = None,
        spec: Optional[TransformSpec] = None
    ) -> RationalModel:
        """
        Route a model to another formulation.

        I -> II and II -> I need the operating point. Reaching Model III
        extracts spec.k_qv_c from the Model-II feedthrough before the
        derivative filter is applied. Model III has no way back.

        Raises:
            ValidationError: unsupported direction or missing operating point
        """
        to = ModelKind(to)
        spec = spec or TransformSpec()
        source = model.kind
        if source == to:
            return model
        if source == ModelKind.III:
            raise ValidationError(f"Model III cannot be converted to Model {to.value}")
        if op is None and ModelKind.I in (source, to):
            raise ValidationError("Operating point required for Model I conversions")

        if source == ModelKind.I:
            model = self.model_i_to_ii(model, op, spec.side)
            if to == ModelKind.II:
                return model
        elif to == ModelKind.I:
            return self.model_ii_to_i(model, op, spec.side)

        model = self.extract_kqvc(model, spec.k_qv_c)
        return self.model_ii_to_iii(model, spec.tau)

    def pole_identity_check(
        self,
        y_n: RationalModel,
        y_s: RationalModel,
        op: OperatingPoint,
        tau: Optional[float] = None
    ) -> PoleIdentityReport:
        """
        Compare closed-loop poles of (Y_n + Y_s)^-1, (J_s + J_n)^-1 and the Model-III loop.

        Args:
            y_n: Network admittance (Model I)
            y_s: Device admittance (Model I)
            op: Shared operating point
            tau: Derivative filter time constant

        Returns:
            PoleIdentityReport with the Hausdorff distance between G1 and G2 poles
            and the poles G3 adds relative to G2
        """
        from app.services.passivity_service import PassivityService

        tau = tau or self.settings.default_tau
        g1 = self.invert_tf(self.lti.parallel(y_n, y_s))

        j_sum = self.lti.parallel(
            self.model_i_to_ii(y_s, op, Side.DEVICE),
            self.model_i_to_ii(y_n, op, Side.NETWORK)
        )
        g2 = self.invert_tf(j_sum)
        g3 = self.invert_tf(self.model_ii_to_iii(j_sum, tau))

        p1 = self.lti.eig_general(g1.A).values
        p2 = self.lti.eig_general(g2.A).values
        p3 = self.lti.eig_general(g3.A).values

        distance = self._hausdorff(p1, p2)
        extra = self._unmatched(p3, p2)
        target = -1.0 / tau
        extra_ok = extra.size == j_sum.n_inputs and bool(
            np.all(np.abs(extra - target) <= 1e-6 * max(1.0, abs(target)))
        )

        axis = PassivityService().check_axis_poles(g2)
        non_simple_origin = any(abs(pole.omega) <= self.settings.axis_pole_tol and not pole.simple for pole in axis)
        if non_simple_origin:
            logger.warning("Closed loop has a repeated pole at s = 0")

        return PoleIdentityReport(
            tau=tau,
            g1_poles=_pairs(p1),
            g2_poles=_pairs(p2),
            g3_poles=_pairs(p3),
            hausdorff_distance=distance,
            poles_match=distance <= 1e-6 * max(1.0, float(np.max(np.abs(p1), initial=0.0))),
            g3_extra_poles=_pairs(extra),
            g3_extra_ok=extra_ok,
            g2_axis_poles=axis,
            non_simple_at_origin=non_simple_origin
        )

    @staticmethod
    def _hausdorff(first: np.ndarray, second: np.ndarray) -> float:
        if first.size == 0 and second.size == 0:
            return 0.0
        if first.size == 0 or second.size == 0:
            return float("inf")
        u = np.column_stack([first.real, first.imag])
        v = np.column_stack([second.real, second.imag])
        return float(max(directed_hausdorff(u, v)[0], directed_hausdorff(v, u)[0]))

    @staticmethod
    def _unmatched(larger: np.ndarray, smaller: np.ndarray) -> np.ndarray:
        """Entries of `larger` left over after a minimum-distance one-to-one matching"""
        if smaller.size == 0:
            return larger
        cost = np.abs(larger[:, None] - smaller[None, :])
        rows, _ = linear_sum_assignment(cost)
        mask = np.ones(larger.size, dtype=bool)
        mask[rows] = False
        return larger[mask]
