"""
LTI core: grids, eigenvalues, evaluation and interconnections
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import BadRange, NotHermitian, SingularResolvent, ValidationError
from app.models.lti import FreqGrid, ModelKind, RangeTag, RationalModel, Spacing
from app.services.device_service import DeviceModelService
from app.services.lti_service import LTIService


@pytest.fixture
def lti() -> LTIService:
    return LTIService()


class TestGrids:
    def test_scan_grid_starts_at_two_pi_times_fmin(self, lti):
        grid = lti.make_grid(0.2, 200.0, 400, Spacing.LOG)
        assert len(grid) == 400
        assert grid.points[0] == pytest.approx(1.2566, abs=1e-4)
        assert grid.f_hz[-1] == pytest.approx(200.0)
        assert_allclose(np.diff(np.log(grid.points)), np.log(1000.0) / 399, rtol=1e-9)

    def test_empty_span_is_rejected(self, lti):
        with pytest.raises(BadRange):
            lti.make_grid(1.0, 1.0, 10)

    def test_single_point_is_rejected(self, lti):
        with pytest.raises(BadRange):
            lti.make_grid(1.0, 2.0, 1)

    def test_ten_hertz_boundary_is_low(self, lti):
        grid = lti.make_grid(0.1, 10.0, 3, Spacing.LINEAR)
        assert grid.tags == (RangeTag.LOW, RangeTag.LOW, RangeTag.LOW)

    def test_tags_cover_three_ranges(self, lti):
        grid = FreqGrid.from_hz([1.0, 20.0, 35.0, 100.0])
        assert grid.tags == (RangeTag.LOW, RangeTag.MID, RangeTag.HIGH, RangeTag.HIGH)

    def test_grid_must_increase(self):
        with pytest.raises(BadRange):
            FreqGrid(points=[1.0, 3.0, 2.0])


class TestEigenvalues:
    def test_diagonal(self, lti):
        assert_allclose(lti.eig_general(np.diag([-1.0, -2.0])).values, [-2.0, -1.0])

    def test_harmonic_oscillator(self, lti):
        values = lti.eig_general(np.array([[0.0, 1.0], [-25.0, 0.0]])).values
        assert_allclose(sorted(values, key=lambda v: v.imag), [-5j, 5j], atol=1e-12)

    def test_companion_matrix_matches_polynomial_roots(self, lti, rng):
        coefficients = np.concatenate([[1.0], rng.standard_normal(6)])
        companion = np.zeros((6, 6))
        companion[0, :] = -coefficients[1:]
        companion[1:, :-1] = np.eye(5)
        values = lti.eig_general(companion).values
        roots = np.roots(coefficients)
        for root in roots:
            assert np.min(np.abs(values - root)) <= 1e-8 * max(1.0, abs(root))

    def test_spectrum_is_conjugate_closed(self, lti, rng):
        spectrum = lti.eig_general(rng.standard_normal((7, 7)))
        assert len(spectrum) == 7
        assert spectrum.is_conjugate_closed()

    def test_empty_matrix(self, lti):
        assert len(lti.eig_general(np.zeros((0, 0)))) == 0

    def test_hermitian_closed_forms(self, lti):
        assert_allclose(lti.eig_hermitian(np.diag([2.0, 3.0])), [2.0, 3.0])
        assert_allclose(lti.eig_hermitian(np.array([[0, 1j], [-1j, 0]])), [-1.0, 1.0])

    def test_hermitian_batch_matches_lapack(self, lti, rng):
        raw = rng.standard_normal((5, 3, 3)) + 1j * rng.standard_normal((5, 3, 3))
        stack = raw + np.conj(np.swapaxes(raw, 1, 2))
        assert_allclose(lti.eig_hermitian_batch(stack), np.linalg.eigvalsh(stack), atol=1e-12)

    def test_non_hermitian_input_is_rejected(self, lti):
        with pytest.raises(NotHermitian):
            lti.eig_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestEvaluation:
    def test_feedthrough_only(self, lti):
        model = RationalModel.static(np.eye(2))
        assert_allclose(lti.eval_tf(model, 123.0), np.eye(2))

    def test_dc_gain(self, lti):
        model = RationalModel(A=[[-1.0]], B=[[1.0, 0.0]], C=[[1.0], [0.0]], D=np.zeros((2, 2)))
        assert_allclose(lti.eval_tf(model, 0.0), [[1.0, 0.0], [0.0, 0.0]])

    def test_droop_model_matches_closed_form(self, lti, droop):
        js = DeviceModelService().droop_js(droop)
        s = 1j
        expected = np.diag([droop.k_pf * s / (1 + s * droop.tau), droop.k_qv])
        assert_allclose(lti.eval_tf(js, 1.0), expected, rtol=1e-10)

    def test_batched_response_matches_pointwise(self, lti, random_model):
        model = random_model(3, 1)
        grid = lti.make_grid(0.1, 100.0, 25)
        response = lti.freq_response(model, grid)
        for k, omega in enumerate(grid.points):
            assert_allclose(response.samples[k], lti.eval_tf(model, omega), rtol=1e-10, atol=1e-12)

    def test_grid_on_a_pole_is_rejected(self, lti):
        model = RationalModel(A=[[0.0, 1.0], [-25.0, 0.0]], B=[[0.0, 0.0], [1.0, 0.0]],
                              C=[[1.0, 0.0], [0.0, 0.0]], D=np.zeros((2, 2)))
        with pytest.raises(SingularResolvent):
            lti.eval_tf(model, 5.0)

    def test_series_rl_hermitian_part_is_positive(self, lti):
        r, l, w0, omega = 0.1, 0.01, 377.0, 100.0
        z = np.array([[r + 1j * omega * l, -w0 * l], [w0 * l, r + 1j * omega * l]])
        y = np.linalg.inv(z)
        eigs = lti.eig_hermitian(lti.hermitian_part(y[None])[0])
        assert np.all(eigs > 0)

    def test_negative_frequency_is_the_conjugate(self, lti, random_model):
        for _ in range(5):
            model = random_model(2, 1)
            for omega in (0.3, 7.0, 450.0):
                positive = lti.eval_tf(model, omega)
                negative = lti.eval_tf(model, -omega)
                assert_allclose(negative, np.conj(positive), rtol=1e-12, atol=1e-14)
                assert_allclose(
                    lti.eig_hermitian(lti.hermitian_part(negative[None])[0]),
                    lti.eig_hermitian(lti.hermitian_part(positive[None])[0]),
                    rtol=1e-10, atol=1e-12
                )


class TestInterconnections:
    def test_parallel_adds_responses(self, lti, random_model):
        first, second = random_model(1, 1), random_model(2)
        total = lti.parallel(first, second)
        omega = 17.0
        assert total.n_states == first.n_states + second.n_states
        assert_allclose(lti.eval_tf(total, omega), lti.eval_tf(first, omega) + lti.eval_tf(second, omega))

    def test_series_multiplies_in_order(self, lti, random_model):
        first, second = random_model(1), random_model(1, 1)
        cascade = lti.series(first, second)
        omega = 3.0
        assert_allclose(lti.eval_tf(cascade, omega), lti.eval_tf(second, omega) @ lti.eval_tf(first, omega))

    def test_scale_and_feedthrough(self, lti, random_model):
        model = random_model(1)
        omega = 9.0
        assert_allclose(lti.eval_tf(lti.scale(model, 2.5), omega), 2.5 * lti.eval_tf(model, omega))
        shifted = lti.add_feedthrough(model, np.eye(2))
        assert_allclose(lti.eval_tf(shifted, omega), lti.eval_tf(model, omega) + np.eye(2))

    def test_mismatched_ports_cannot_be_added(self, lti):
        with pytest.raises(ValidationError):
            lti.parallel(RationalModel.static(np.eye(2)), RationalModel.static(np.eye(3)))

    def test_series_resistance_augmentation(self, lti, random_model):
        model = random_model(2)
        grid = lti.make_grid(1.0, 100.0, 20)
        response = lti.freq_response(model, grid)
        augmented = lti.augment_series_resistance(response, 0.05)
        for k in range(len(grid)):
            expected = np.linalg.inv(np.linalg.inv(response.samples[k]) + 0.05 * np.eye(2))
            assert_allclose(augmented.samples[k], expected, rtol=1e-9)

    def test_augmentation_needs_an_admittance(self, lti, random_model):
        model = random_model(1, kind=ModelKind.II)
        with pytest.raises(ValidationError):
            lti.augment_series_resistance(model, 0.1, lti.make_grid(1.0, 10.0, 5))
