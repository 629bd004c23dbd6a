"""
Device compliance criteria and the eight-step pipeline
"""
import numpy as np
import pytest
import scipy.signal
from numpy.testing import assert_allclose

from app.models.device import DeviceKind, DroopParams, LoadParams
from app.models.lti import ModelKind, RationalModel
from app.models.operating_point import TransformSpec
from app.schemas.fit import FitConfig
from app.services.compliance_service import ComplianceService
from app.services.device_service import DeviceModelService
from app.services.lti_service import LTIService
from app.services.transform_service import TransformService
from app.services.vector_fit_service import VectorFitService

FAST_DROOP = DroopParams(k_pf=10.0, k_qv=20.0, tau=0.002)


@pytest.fixture
def compliance() -> ComplianceService:
    return ComplianceService()


@pytest.fixture
def devices() -> DeviceModelService:
    return DeviceModelService()


@pytest.fixture
def lti() -> LTIService:
    return LTIService()


def droop_scan(devices, lti, params, op, points=400):
    return devices.scan(DeviceKind.DROOP, params, op, lti.make_grid(0.2, 200.0, points))


class TestClusters:
    def test_well_separated_device(self, compliance):
        poles = [
            -0.99, -14.76,
            complex(-3.61, 23.41), complex(-3.61, -23.41),
            complex(-48.28, 27.99), complex(-48.28, -27.99),
            complex(-450.27, 60.69), complex(-450.27, -60.69),
            complex(-575.78, 756.66), complex(-575.78, -756.66),
        ]
        report = compliance.cluster_check(poles)
        assert report.passed
        assert len(report.slow) == 6
        assert len(report.fast) == 4

    def test_second_separated_device(self, compliance):
        slow = [-0.89, complex(-0.81, 5.58), complex(-0.81, -5.58), complex(-0.23, 9.57),
                complex(-0.23, -9.57), -14.36, complex(-35.37, 31.06), complex(-35.37, -31.06)]
        fast = [-317.44, -541.11, complex(-593.69, 753.59), complex(-593.69, -753.59)]
        report = compliance.cluster_check(slow + fast)
        assert report.passed
        assert len(report.slow) == len(slow)

    def test_pole_in_the_gap(self, compliance):
        report = compliance.cluster_check([-1.0, -100.0, -500.0])
        assert not report.passed
        assert report.gap_violations == [[-100.0, 0.0]]

    def test_static_model(self, compliance):
        assert compliance.cluster_check(RationalModel.static(np.eye(2))).passed


class TestCriteria:
    def test_kqv_margin(self, compliance, devices, droop):
        js = devices.droop_js(droop)
        report = compliance.kqv_margin(js, 0.4)
        assert report.margin == pytest.approx(5.0)
        assert report.passed
        assert not compliance.kqv_margin(js, 6.0).passed

    def test_frequency_regulation(self, compliance, devices, droop):
        jsd = TransformService().model_ii_to_iii(devices.droop_js(droop), 0.01)
        report = compliance.freq_regulation_check(jsd)
        assert report.passed
        assert report.minimum == pytest.approx(10.0, rel=1e-9)

    def test_load_drawing_more_power_at_higher_frequency_fails(self, compliance, devices):
        load = LoadParams(k_pf=-0.5, k_pv=0.0, k_qf=0.0, k_qv=1.0, tau=0.01)
        jsd = TransformService().model_ii_to_iii(devices.load_js(load), 0.01)
        report = compliance.freq_regulation_check(jsd)
        assert not report.passed
        assert report.minimum == pytest.approx(-0.5, rel=1e-9)

    def test_unstable_derivative_model_fails_low_frequency_passivity(self, compliance):
        # (2 - s) / (1 - s) on both channels: positive Hermitian part, pole at +1
        nsd = RationalModel(A=np.eye(2), B=np.eye(2), C=-np.eye(2), D=np.eye(2), kind=ModelKind.III)
        verdict = compliance.low_frequency_check(nsd)
        assert verdict.psd_ok
        assert verdict.rhp_pole_free is False
        assert verdict.rhp_poles == [[1.0, 0.0], [1.0, 0.0]]
        assert not verdict.overall

    def test_stable_derivative_model_passes_low_frequency_passivity(self, compliance, devices, droop):
        verdict = compliance.low_frequency_check(devices.droop_nsd(droop))
        assert verdict.overall
        assert verdict.rhp_pole_free


class TestPipeline:
    def test_compliant_droop_device(self, compliance, devices, lti, flat_op):
        scan = droop_scan(devices, lti, FAST_DROOP, flat_op)
        report = compliance.run_pipeline(
            scan, flat_op, TransformSpec(tau=0.01, k_qv_c=0.4), FitConfig(order=1), series_r=0.05
        )
        failed = [(step.step, step.error_code, step.message) for step in report.steps if not step.passed]
        assert report.overall, failed
        assert [step.step for step in report.steps] == list(range(1, 9))
        assert report.fit.max_rel_error <= 1e-6
        assert report.kqv_margin.margin == pytest.approx(20.0, rel=1e-6)
        assert report.step(6).diagnostics["kqvc_extracted"]
        assert report.step(7).diagnostics["proper_device"]
        assert report.step(8).diagnostics["rhp_pole_free"]

    def test_without_series_resistance_the_high_band_fails(self, compliance, devices, lti, flat_op):
        scan = droop_scan(devices, lti, FAST_DROOP, flat_op)
        report = compliance.run_pipeline(scan, flat_op, TransformSpec(tau=0.01, k_qv_c=0.4), FitConfig(order=1))
        assert not report.step(4).passed
        assert not report.overall

    def test_fitted_chain_matches_the_derivative_model(self, devices, lti, droop, flat_op):
        transforms = TransformService()
        scan = droop_scan(devices, lti, droop, flat_op)
        model, _ = VectorFitService().vector_fit(scan, FitConfig(order=1))
        nsd = transforms.invert_tf(
            transforms.model_ii_to_iii(transforms.model_i_to_ii(model, flat_op), 0.01)
        )
        grid = lti.make_grid(0.01, 10.0, 200)
        assert_allclose(
            lti.freq_response(nsd, grid).samples,
            lti.freq_response(devices.droop_nsd(droop), grid).samples,
            rtol=1e-6, atol=1e-9
        )

    def test_mid_band_pole_fails_the_cluster_step_only(self, compliance, devices, lti, droop, flat_op):
        report = compliance.run_pipeline(
            droop_scan(devices, lti, droop, flat_op), flat_op, TransformSpec(tau=0.01, k_qv_c=0.4), FitConfig(order=1)
        )
        assert not report.step(3).passed
        assert report.cluster.gap_violations[0][0] == pytest.approx(-100.0, rel=1e-6)
        assert report.step(5).passed
        assert report.step(8).error_code is None
        assert report.low_frequency is not None

    def test_motor_load_fails_low_frequency_passivity(self, compliance, devices, lti, flat_op):
        motor = LoadParams(k_pf=0.006, k_pv=0.07, k_qf=0.003, k_qv=0.5, tau=0.002)
        scan = devices.scan(DeviceKind.LOAD, motor, flat_op, lti.make_grid(0.2, 200.0, 200))
        report = compliance.run_pipeline(scan, flat_op, TransformSpec(tau=0.01), FitConfig(order=1))
        assert not report.step(8).passed
        assert report.low_frequency.violations
        assert not report.overall

    def test_rational_input_skips_the_fit(self, compliance, devices, flat_op):
        ys = devices.device_ys(DeviceKind.DROOP, FAST_DROOP, flat_op)
        report = compliance.run_pipeline(
            ys, flat_op, TransformSpec(tau=0.01, k_qv_c=0.4), FitConfig(), series_r=0.05
        )
        assert report.overall
        assert report.fit is None
        assert report.step(2).diagnostics["n_states"] == 1

    def test_later_steps_report_missing_input(self, compliance, devices, lti, droop, flat_op):
        scan = droop_scan(devices, lti, droop, flat_op, points=3)
        report = compliance.run_pipeline(scan, flat_op, TransformSpec(), FitConfig(order=10))
        assert report.step(1).passed
        assert report.step(2).error_code == "bad_range"
        for number in range(3, 9):
            assert report.step(number).error_code == "missing_input"
        assert not report.overall

    def test_wrong_formulation(self, compliance, flat_op):
        model = RationalModel.static(np.eye(2), kind=ModelKind.II)
        report = compliance.run_pipeline(model, flat_op, TransformSpec(), FitConfig())
        assert report.step(1).error_code == "validation_error"
        assert not report.overall

    def test_short_scan(self, compliance, devices, flat_op):
        lti = LTIService()
        scan = devices.scan(DeviceKind.DROOP, FAST_DROOP, flat_op, lti.make_grid(1.0, 200.0, 100))
        report = compliance.run_pipeline(scan, flat_op, TransformSpec(), FitConfig(order=1))
        assert not report.step(1).passed
        assert report.step(1).diagnostics["f_min_hz"] == pytest.approx(1.0)

    def test_right_half_plane_zero_fails_step_eight(self, compliance, flat_op):
        # J_s(1,1) = k s (2 - s) / ((1 + s tau_d)(s + 2)) gives N_sd a pole at s = +2
        k, tau_d = 10.0, 0.002
        a, b, c, d = scipy.signal.tf2ss([-k, 2 * k, 0.0], np.polymul([tau_d, 1.0], [1.0, 2.0]))
        n = a.shape[0]
        js = RationalModel(
            A=a,
            B=np.hstack([b, np.zeros((n, 1))]),
            C=np.vstack([c, np.zeros((1, n))]),
            D=np.diag([float(d[0, 0]), 20.0]),
            kind=ModelKind.II
        )
        ys = TransformService().model_ii_to_i(js, flat_op)
        report = compliance.run_pipeline(ys, flat_op, TransformSpec(tau=0.01, k_qv_c=0.4), FitConfig(), series_r=0.05)
        step = report.step(8)
        assert step.error_code is None
        assert not step.passed
        assert step.diagnostics["rhp_pole_free"] is False
        assert any(pole[0] == pytest.approx(2.0, rel=1e-6) for pole in report.low_frequency.rhp_poles)
        assert not report.overall

    def test_singular_device_feedthrough_fails_properness(self, compliance, flat_op):
        w = 2 * np.pi * 1000.0
        js = RationalModel(A=[[-w]], B=[[0.0, 1.0]], C=[[0.0], [w]], D=np.diag([1.0, 0.0]), kind=ModelKind.II)
        ys = TransformService().model_ii_to_i(js, flat_op)
        report = compliance.run_pipeline(ys, flat_op, TransformSpec(tau=0.01, k_qv_c=0.5), FitConfig())
        step = report.step(7)
        assert step.error_code is None
        assert not step.passed
        assert not step.diagnostics["proper_device"]
        assert report.properness.det_device == pytest.approx(0.0, abs=1e-12)
        assert report.step(8).error_code is None
        assert not report.overall

    def test_unavailable_kqv_leaves_later_steps_unevaluated(self, compliance, devices, flat_op):
        ys = devices.device_ys(DeviceKind.DROOP, FAST_DROOP, flat_op)
        report = compliance.run_pipeline(
            ys, flat_op, TransformSpec(tau=0.01, k_qv_c=50.0), FitConfig(), series_r=0.05
        )
        assert not report.step(5).passed
        assert report.step(5).error_code is None
        step = report.step(6)
        assert step.error_code == "missing_input"
        assert step.diagnostics["available"] == pytest.approx(20.0, rel=1e-6)
        assert not step.diagnostics["kqvc_extracted"]
        for number in (7, 8):
            assert report.step(number).error_code == "missing_input"
        assert report.frequency_regulation is None
        assert not report.overall
