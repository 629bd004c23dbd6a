"""
Jacobian Service - unreduced load-flow Jacobian, Q-V passivation and network feedthrough structure
"""
import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from app.config import get_settings
from app.core.exceptions import DisconnectedNetwork, InvalidParameterError, NotSymmetric, UnknownBus, ValidationError
from app.models.lti import FreqRange, ModelKind, RationalModel
from app.models.network import NetworkSpec
from app.models.operating_point import OperatingPoint
from app.schemas.jacobian import JacobianReport, JndPoleReport
from app.schemas.verdict import FeedthroughReport
from app.services.lti_service import LTIService
from app.services.passivity_service import PassivityService
from app.services.transform_service import TransformService

logger = logging.getLogger(__name__)

FD_STEP = 1e-7


class JacobianService:
    """Service for network-side passivity of the load-flow Jacobian"""

    def __init__(self):
        self.settings = get_settings()
        self.lti = LTIService()
        self.passivity = PassivityService()
        self.transforms = TransformService()

    # Admittance and injections

    def build_ybus(self, net: NetworkSpec) -> sp.csr_matrix:
        """
        Bus admittance matrix of pi-model branches plus bus shunts.

        Raises:
            DisconnectedNetwork: branches do not connect every bus
        """
        n = len(net.buses)
        index = net.index
        rows, cols, vals = [], [], []
        for branch in net.branches:
            f, t = index[branch.from_bus], index[branch.to_bus]
            y = 1 / complex(branch.r, branch.x)
            half = 1j * branch.b / 2
            rows += [f, t, f, t]
            cols += [f, t, t, f]
            vals += [y + half, y + half, -y, -y]
        for k, bus in enumerate(net.buses):
            rows.append(k)
            cols.append(k)
            vals.append(complex(bus.gs, bus.bs))
        ybus = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)

        adjacency = sp.csr_matrix(
            (np.ones(len(net.branches)), ([index[b.from_bus] for b in net.branches], [index[b.to_bus] for b in net.branches])),
            shape=(n, n)
        )
        islands, _ = connected_components(adjacency, directed=False)
        if islands > 1:
            raise DisconnectedNetwork(int(islands))
        return ybus

    def injections(self, net: NetworkSpec, voltages: Optional[np.ndarray] = None) -> np.ndarray:
        """Complex power injected at each bus, S = V conj(Ybus V)"""
        ybus = self.build_ybus(net)
        v = net.voltages if voltages is None else voltages
        return v * np.conj(ybus @ v)

    # Jacobian

    def jlf_matrix(self, net: NetworkSpec) -> np.ndarray:
        """
        d(P, Q)/d(phi, V_n) at the operating voltages, all buses kept.

        V_n is each magnitude normalized by its operating value, so the
        voltage columns are the magnitude derivatives scaled by vm.
        """
        ybus = self.build_ybus(net)
        v = net.voltages
        vm = np.abs(v)
        current = ybus @ v

        diag_v = sp.diags(v)
        diag_i = sp.diags(current)
        diag_vnorm = sp.diags(v / vm)

        ds_dva = 1j * diag_v @ (diag_i - ybus @ diag_v).conj()
        ds_dvm = diag_v @ (ybus @ diag_vnorm).conj() + diag_i.conj() @ diag_vnorm
        ds_dvn = ds_dvm @ sp.diags(vm)

        ds_dva = ds_dva.toarray()
        ds_dvn = ds_dvn.toarray()
        return np.block([
            [ds_dva.real, ds_dvn.real],
            [ds_dva.imag, ds_dvn.imag]
        ])

    def finite_difference_jlf(self, net: NetworkSpec, step: float = FD_STEP) -> np.ndarray:
        """Central differences of the injection equations in (phi, V_n)"""
        ybus = self.build_ybus(net)
        vm0 = np.array([bus.vm for bus in net.buses])
        va0 = np.array([bus.va_rad for bus in net.buses])
        n = vm0.size

        def _pq(va: np.ndarray, vn: np.ndarray) -> np.ndarray:
            v = vm0 * vn * np.exp(1j * va)
            s = v * np.conj(ybus @ v)
            return np.concatenate([s.real, s.imag])

        jac = np.empty((2 * n, 2 * n))
        ones = np.ones(n)
        for k in range(n):
            delta = np.zeros(n)
            delta[k] = step
            jac[:, k] = (_pq(va0 + delta, ones) - _pq(va0 - delta, ones)) / (2 * step)
            jac[:, n + k] = (_pq(va0, ones + delta) - _pq(va0, ones - delta)) / (2 * step)
        return jac

    def build_jlf(self, net: NetworkSpec) -> JacobianReport:
        """
        Unreduced load-flow Jacobian with the spectrum of J_LF + J_LF^T.

        Args:
            net: Network with solved operating voltages

        Returns:
            JacobianReport
        """
        jlf = self.jlf_matrix(net)
        logger.info(f"Built load-flow Jacobian for {len(net.buses)} buses")
        return self._report(net.bus_ids, jlf, {})

    def _report(self, bus_ids: List[int], jlf: np.ndarray, contributions: Dict[str, float]) -> JacobianReport:
        symmetric = jlf + jlf.T
        eigs = np.linalg.eigvalsh(symmetric)
        tol = self.settings.zero_eig_tol * max(1.0, float(np.max(np.abs(eigs))))
        zero = np.abs(eigs) <= tol
        nonzero = eigs[~zero]
        defect = float(np.linalg.norm(jlf - jlf.T))
        if defect > self.settings.trace_tol * max(1.0, float(np.linalg.norm(jlf))):
            logger.warning(f"Lossy network: ||J_LF - J_LF^T|| = {defect:.3e}, judged on the symmetric part")
        negative = int(np.sum(eigs < -tol))
        return JacobianReport(
            bus_ids=list(bus_ids),
            jlf=jlf.tolist(),
            eigenvalues=eigs.tolist(),
            symmetry_defect=defect,
            min_eig=float(eigs[0]),
            min_nonzero_eig=float(np.min(nonzero)) if nonzero.size else 0.0,
            zero_count=int(np.sum(zero)),
            negative_count=negative,
            psd=negative == 0,
            contributions=contributions
        )

    def apply_kqvc(self, report: JacobianReport, contributions: Mapping[Any, float]) -> JacobianReport:
        """
        Add device Q-V contributions to the diagonal of dQ/dV_n.

        Args:
            report: Jacobian report to update
            contributions: bus id -> k_qv^c (pu)

        Raises:
            UnknownBus: a key is not a bus of the network
            InvalidParameterError: a contribution is negative
        """
        ids = {str(bus_id): k for k, bus_id in enumerate(report.bus_ids)}
        jlf = report.matrix
        n = report.n_buses
        merged = dict(report.contributions)
        for key, value in contributions.items():
            key = str(key)
            if key not in ids:
                raise UnknownBus(key)
            if value < 0:
                raise InvalidParameterError(f"k_qv_c[{key}]", value, "contributions must be non-negative")
            k = ids[key]
            jlf[n + k, n + k] += value
            merged[key] = merged.get(key, 0.0) + float(value)
        if contributions:
            logger.info(f"Applied Q-V contributions at {len(contributions)} bus(es)")
        return self._report(report.bus_ids, jlf, merged)

    # Wide-band network structure

    def _interface_blocks(self, ops: Sequence[OperatingPoint]) -> tuple:
        """Bus-stacked E, C and F in (D axis, Q axis) ordering"""
        def _stack(mats: List[np.ndarray]) -> np.ndarray:
            return np.block([
                [np.diag([m[0, 0] for m in mats]), np.diag([m[0, 1] for m in mats])],
                [np.diag([m[1, 0] for m in mats]), np.diag([m[1, 1] for m in mats])]
            ])
        return _stack([op.E for op in ops]), _stack([op.C for op in ops]), _stack([op.F for op in ops])

    def feedthrough_trace_check(
        self,
        d1: np.ndarray,
        op: Union[OperatingPoint, Sequence[OperatingPoint]],
        tau: Optional[float] = None
    ) -> FeedthroughReport:
        """
        Trace test of the Model-II and Model-III feedthroughs of a wide-band network.

        With D_n = diag(D1, D1), D_j = (E D_n + C) F has a traceless symmetric
        part at every bus, so D_j + D_j^T is indefinite unless it vanishes.

        Args:
            d1: Symmetric N x N high-frequency admittance block
            op: One operating point for all buses or one per bus
            tau: Derivative filter time constant

        Raises:
            NotSymmetric: d1 is not symmetric
        """
        tau = tau or self.settings.default_tau
        d1 = np.atleast_2d(np.asarray(d1, dtype=float))
        if d1.ndim != 2 or d1.shape[0] != d1.shape[1]:
            raise ValidationError(f"D1 must be square, got shape {d1.shape}")
        defect = float(np.linalg.norm(d1 - d1.T))
        if defect > self.settings.hermitian_tol * max(1.0, float(np.linalg.norm(d1))):
            raise NotSymmetric(defect)

        n = d1.shape[0]
        ops = [op] * n if isinstance(op, OperatingPoint) else list(op)
        if len(ops) != n:
            raise ValidationError(f"Expected {n} operating points, got {len(ops)}")

        E, C, F = self._interface_blocks(ops)
        d_n = np.kron(np.eye(2), d1)
        d_j = (E @ d_n + C) @ F
        d_jd = tau * d_j
        sym = d_j + d_j.T
        sym_d = d_jd + d_jd.T

        scale = max(1.0, float(np.linalg.norm(d_j)))
        trace_dj = float(np.trace(sym))
        trace_djd = float(np.trace(sym_d))
        tol = self.settings.trace_tol * scale
        trace_zero = abs(trace_dj) <= tol and abs(trace_djd) <= tol
        blocks = [sym[np.ix_([k, n + k], [k, n + k])].tolist() for k in range(n)]
        eigs = np.linalg.eigvalsh(sym)
        symmetric_zero = float(np.linalg.norm(sym)) <= self.settings.trace_tol * scale

        grid = self.lti.high_grid(n_points=8)
        passive_ii = self.passivity.passivity_verdict(
            RationalModel.static(d_j, kind=ModelKind.II), FreqRange.HIGH, grid=grid
        ).overall
        passive_iii = self.passivity.passivity_verdict(
            RationalModel.static(d_jd, kind=ModelKind.III), FreqRange.HIGH, grid=grid
        ).overall

        return FeedthroughReport(
            n_buses=n,
            tau=tau,
            d_j=d_j.tolist(),
            d_jd=d_jd.tolist(),
            trace_dj=trace_dj,
            trace_djd=trace_djd,
            trace_zero=trace_zero,
            bus_blocks=blocks,
            symmetric_part_zero=symmetric_zero,
            min_eig=float(eigs[0]),
            indefinite=not symmetric_zero and eigs[0] < 0 < eigs[-1],
            passive_model_ii=passive_ii,
            passive_model_iii=passive_iii
        )

    # Network Model III

    def jnd_model(self, jlf: np.ndarray, tau: Optional[float] = None) -> RationalModel:
        """J_nd(s) = J_LF (1 + s tau) / s"""
        tau = tau or self.settings.default_tau
        static = RationalModel.static(np.asarray(jlf, dtype=float), kind=ModelKind.II)
        return self.transforms.model_ii_to_iii(static, tau)

    def jnd_axis_pole(self, report: JacobianReport, tau: Optional[float] = None) -> JndPoleReport:
        """
        Origin pole of J_nd with residue J_LF.

        Lossy Jacobians are judged on their symmetric part and the
        asymmetry norm is reported.
        """
        tau = tau or self.settings.default_tau
        jlf = report.matrix
        lossy = report.symmetry_defect > self.settings.trace_tol * max(1.0, float(np.linalg.norm(jlf)))
        if lossy:
            jlf = (jlf + jlf.T) / 2

        poles = self.passivity.check_axis_poles(self.jnd_model(jlf, tau))
        origin = next(pole for pole in poles if abs(pole.omega) <= self.settings.axis_pole_tol)
        return JndPoleReport(
            tau=tau,
            pole=origin,
            symmetry_defect=report.symmetry_defect,
            judged_on_symmetric_part=lossy,
            passed=origin.ok
        )
