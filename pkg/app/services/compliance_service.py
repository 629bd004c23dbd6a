"""
Compliance Service - the consolidated eight-step device criteria
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import CLUSTER_BOUNDS, COMPLIANCE_STEPS, get_settings
from app.core.exceptions import ComplianceError, GridComplyException, InsufficientKqv, ValidationError
from app.models.lti import FreqGrid, FreqRange, FreqResponse, ModelKind, RationalModel, Spectrum
from app.models.operating_point import OperatingPoint, Side, TransformSpec
from app.schemas.compliance import (
    ClusterReport,
    ComplianceReport,
    FreqRegulationReport,
    KqvMarginReport,
    StepOutcome,
)
from app.schemas.fit import FitConfig
from app.schemas.verdict import PassivityVerdict, PropernessReport
from app.services.lti_service import LTIService
from app.services.passivity_service import PassivityService
from app.services.transform_service import TransformService
from app.services.vector_fit_service import VectorFitService

logger = logging.getLogger(__name__)

# Minimum scan coverage (Hz)
SCAN_MIN_HZ = 0.2
SCAN_MAX_HZ = 200.0

Scan = Union[FreqResponse, RationalModel]


def _pairs(values: Sequence[complex]) -> List[List[float]]:
    return [[float(v.real), float(v.imag)] for v in values]


@dataclass
class _PipelineState:
    """Intermediate results shared between steps"""
    scan: Scan
    op: OperatingPoint
    spec: TransformSpec
    high_limit_hz: float
    model: Optional[RationalModel] = None
    js: Optional[RationalModel] = None
    jsd: Optional[RationalModel] = None
    nsd: Optional[RationalModel] = None
    parts: Dict[str, Any] = field(default_factory=dict)

    def require(self, name: str, step: int) -> Any:
        value = getattr(self, name)
        if value is None:
            raise ComplianceError(
                f"Not evaluated: needs the result of step {step} ({COMPLIANCE_STEPS[step]})",
                error_code="missing_input"
            )
        return value


class ComplianceService:
    """Service orchestrating the decentralized compliance criteria"""

    def __init__(self):
        self.settings = get_settings()
        self.lti = LTIService()
        self.transforms = TransformService()
        self.passivity = PassivityService()
        self.fitter = VectorFitService()

    # Individual criteria

    def cluster_check(self, source: Union[RationalModel, Spectrum, Sequence[complex]]) -> ClusterReport:
        """
        Partition eigenvalues by magnitude into slow, gap and fast sets.

        Args:
            source: Model (eigenvalues of A), spectrum or eigenvalue list

        Returns:
            ClusterReport; passes when the gap set is empty
        """
        if isinstance(source, RationalModel):
            values = self.lti.eig_general(source.A).values
        elif isinstance(source, Spectrum):
            values = source.values
        else:
            values = np.asarray(list(source), dtype=complex)

        slow_max, fast_min = CLUSTER_BOUNDS["slow_max"], CLUSTER_BOUNDS["fast_min"]
        magnitude = np.abs(values)
        slow = values[magnitude <= slow_max]
        fast = values[magnitude >= fast_min]
        gap = values[(magnitude > slow_max) & (magnitude < fast_min)]
        return ClusterReport(
            slow=_pairs(slow),
            fast=_pairs(fast),
            gap_violations=_pairs(gap),
            slow_max=slow_max,
            fast_min=fast_min,
            passed=gap.size == 0
        )

    def kqv_margin(
        self,
        js: RationalModel,
        k_qv_c: float = 0.0,
        grid: Optional[FreqGrid] = None
    ) -> KqvMarginReport:
        """min over the low range of Re J_s(2,2), compared with k_qv^c"""
        grid = grid or self.lti.low_grid()
        response = self.lti.freq_response(js, grid)
        curve = response.samples[:, 1, 1].real
        margin = float(np.min(curve))
        return KqvMarginReport(
            curve=np.column_stack([grid.f_hz, curve]).tolist(),
            margin=margin,
            required=k_qv_c,
            passed=margin >= k_qv_c
        )

    def freq_regulation_check(self, jsd: RationalModel, grid: Optional[FreqGrid] = None) -> FreqRegulationReport:
        """Re J_sd(1,1) must stay positive over the low range"""
        grid = grid or self.lti.low_grid()
        response = self.lti.freq_response(jsd, grid)
        curve = response.samples[:, 0, 0].real
        minimum = float(np.min(curve))
        return FreqRegulationReport(
            curve=np.column_stack([grid.f_hz, curve]).tolist(),
            minimum=minimum,
            passed=minimum > self.settings.psd_tol
        )

    def low_frequency_check(self, nsd: RationalModel, grid: Optional[FreqGrid] = None) -> PassivityVerdict:
        """
        Low-range passivity of N_sd.

        The verdict's overall flag is the criterion: no right half-plane
        pole, a positive semi-definite Hermitian part and admissible axis
        poles. Modes cancelled by a zero should be removed beforehand.
        """
        return self.passivity.passivity_verdict(nsd, FreqRange.LOW, grid=grid)

    # Pipeline

    def run_pipeline(
        self,
        scan: Scan,
        op: OperatingPoint,
        spec: TransformSpec,
        cfg: FitConfig,
        series_r: float = 0.0,
        high_limit_hz: Optional[float] = None
    ) -> ComplianceReport:
        """
        Run all eight steps and gather every diagnostic that can be computed.

        A step that raises is recorded as failed with its error code; later
        steps run whenever their inputs exist.

        Args:
            scan: Sampled Model-I admittance or an already rational model
            op: Operating point of the device terminal
            spec: tau and k_qv^c set by the operator
            cfg: Fit options for step 2
            series_r: Series resistance absorbed into the device for step 4
            high_limit_hz: Upper limit of the high range (defaults to the scan maximum)

        Returns:
            ComplianceReport
        """
        if series_r < 0:
            raise ValidationError(f"series_r must be non-negative, got {series_r}")
        if high_limit_hz is None:
            high_limit_hz = (
                float(scan.grid.f_hz[-1]) if isinstance(scan, FreqResponse) else self.settings.high_range_max_hz
            )
        state = _PipelineState(scan=scan, op=op, spec=spec, high_limit_hz=high_limit_hz)
        logger.info(f"Compliance run: tau={spec.tau}, k_qv_c={spec.k_qv_c}, series_r={series_r}")

        steps: List[StepOutcome] = []
        actions: List[Callable[[], Tuple[bool, Dict[str, Any]]]] = [
            lambda: self._step_scan(state),
            lambda: self._step_fit(state, cfg),
            lambda: self._step_cluster(state),
            lambda: self._step_high_frequency(state, series_r),
            lambda: self._step_kqv(state),
            lambda: self._step_frequency_regulation(state),
            lambda: self._step_properness(state),
            lambda: self._step_low_frequency(state),
        ]
        for number, action in enumerate(actions, start=1):
            steps.append(self._guard(number, action))

        overall = all(step.passed for step in steps)
        logger.info(f"Compliance verdict: {'pass' if overall else 'fail'}")
        return ComplianceReport(
            overall=overall,
            tau=spec.tau,
            k_qv_c=spec.k_qv_c,
            series_r=series_r,
            steps=steps,
            **state.parts
        )

    def _guard(self, number: int, action: Callable[[], Tuple[bool, Dict[str, Any]]]) -> StepOutcome:
        name = COMPLIANCE_STEPS[number]
        try:
            passed, diagnostics = action()
            outcome = StepOutcome(step=number, name=name, passed=passed, diagnostics=diagnostics)
        except GridComplyException as e:
            outcome = StepOutcome(
                step=number,
                name=name,
                passed=False,
                error_code=e.error_code,
                message=e.message,
                diagnostics=e.details if isinstance(e.details, dict) else {}
            )
        logger.info(f"Step {number} ({name}): {'pass' if outcome.passed else 'fail'}"
                    + (f" [{outcome.error_code}] {outcome.message}" if outcome.error_code else ""))
        return outcome

    def _step_scan(self, state: _PipelineState) -> Tuple[bool, Dict[str, Any]]:
        scan = state.scan
        if scan.kind != ModelKind.I:
            raise ValidationError(f"Expected a Model-I admittance, got Model {scan.kind.value}")
        if isinstance(scan, RationalModel):
            return True, {"rational_input": True, "n_states": scan.n_states}
        f_hz = scan.grid.f_hz
        covered = f_hz[0] <= SCAN_MIN_HZ * (1 + 1e-9) and f_hz[-1] >= SCAN_MAX_HZ * (1 - 1e-9)
        return covered, {"f_min_hz": float(f_hz[0]), "f_max_hz": float(f_hz[-1]), "points": len(scan)}

    def _step_fit(self, state: _PipelineState, cfg: FitConfig) -> Tuple[bool, Dict[str, Any]]:
        if isinstance(state.scan, RationalModel):
            state.model = state.scan
            return True, {"note": "rational model supplied, no fit needed", "n_states": state.model.n_states}
        if state.scan.kind != ModelKind.I:
            raise ValidationError("Scan is not a Model-I admittance")
        model, report = self.fitter.vector_fit(state.scan, cfg)
        state.model = model
        state.parts["fit"] = report
        passed = report.max_rel_error <= self.settings.fit_accept_error
        return passed, {"max_rel_error": report.max_rel_error, "order": report.order, "n_states": report.n_states}

    def _step_cluster(self, state: _PipelineState) -> Tuple[bool, Dict[str, Any]]:
        report = self.cluster_check(state.require("model", 2))
        state.parts["cluster"] = report
        return report.passed, {"gap_violations": report.gap_violations}

    def _step_high_frequency(self, state: _PipelineState, series_r: float) -> Tuple[bool, Dict[str, Any]]:
        model = state.require("model", 2)
        grid = self.lti.high_grid(state.high_limit_hz)
        response = self.lti.freq_response(model, grid)
        if series_r > 0:
            response = self.lti.augment_series_resistance(response, series_r)
        verdict = self.passivity.passivity_verdict(response, FreqRange.HIGH)
        state.parts["high_frequency"] = verdict
        worst = min((row[1] for row in verdict.min_eig_curve), default=0.0)
        return verdict.overall, {"min_eig": worst, "series_r": series_r, "f_max_hz": state.high_limit_hz}

    def _step_kqv(self, state: _PipelineState) -> Tuple[bool, Dict[str, Any]]:
        model = state.require("model", 2)
        state.js = self.transforms.model_i_to_ii(model, state.op, Side.DEVICE)
        report = self.kqv_margin(state.js, state.spec.k_qv_c)
        state.parts["kqv_margin"] = report
        return report.passed, {"margin": report.margin, "required": report.required}

    def _step_frequency_regulation(self, state: _PipelineState) -> Tuple[bool, Dict[str, Any]]:
        js = state.require("js", 5)
        try:
            js = self.transforms.extract_kqvc(js, state.spec.k_qv_c, self.lti.low_grid())
        except InsufficientKqv as e:
            raise ComplianceError(
                f"Not evaluated: {e.message}",
                error_code="missing_input",
                details={**e.details, "kqvc_extracted": False}
            )
        state.jsd = self.transforms.model_ii_to_iii(js, state.spec.tau)
        report = self.freq_regulation_check(state.jsd)
        state.parts["frequency_regulation"] = report
        return report.passed, {"kqvc_extracted": state.spec.k_qv_c > 0, "minimum": report.minimum}

    def _step_properness(self, state: _PipelineState) -> Tuple[bool, Dict[str, Any]]:
        model = state.require("model", 2)
        jsd = state.require("jsd", 6)
        report: PropernessReport = self.transforms.properness(model.D, state.op)
        state.parts["properness"] = report
        nsd = self.transforms.invert_tf(jsd)
        state.nsd = self.passivity.drop_cancelled_modes(nsd)
        return report.proper_device and report.proper_network, {
            "det_device": report.det_device,
            "det_network": report.det_network,
            "proper_device": report.proper_device,
            "proper_network": report.proper_network,
            "feedthrough_cond": float(np.linalg.cond(jsd.D)),
            "dropped_modes": nsd.n_states - state.nsd.n_states
        }

    def _step_low_frequency(self, state: _PipelineState) -> Tuple[bool, Dict[str, Any]]:
        nsd = state.require("nsd", 7)
        verdict = self.low_frequency_check(nsd)
        state.parts["low_frequency"] = verdict
        try:
            state.parts["nsd_full"] = self.passivity.passivity_verdict(
                nsd, FreqRange.FULL, high_limit_hz=state.high_limit_hz
            )
        except GridComplyException as e:
            logger.warning(f"Full-range verdict of N_sd unavailable: {e.message}")
        worst = min((row[1] for row in verdict.min_eig_curve), default=0.0)
        return verdict.overall, {
            "min_eig": worst,
            "rhp_pole_free": verdict.rhp_pole_free,
            "axis_poles_ok": all(pole.ok for pole in verdict.axis_poles),
            "violations": [band.model_dump(mode="json") for band in verdict.violations]
        }
