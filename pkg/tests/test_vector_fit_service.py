"""
Vector fitting: starting poles, realization and model recovery
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import BadRange, ConjugationViolation, ValidationError
from app.models.lti import FreqResponse, RationalModel
from app.schemas.fit import FitConfig, Weighting
from app.services.lti_service import LTIService
from app.services.vector_fit_service import VectorFitService
from tests.conftest import stable_model


@pytest.fixture
def fitter() -> VectorFitService:
    return VectorFitService()


@pytest.fixture
def lti() -> LTIService:
    return LTIService()


def max_pole_distance(true_poles: np.ndarray, fitted_poles: np.ndarray) -> float:
    """Largest relative distance from a true pole to its nearest fitted pole"""
    return max(float(np.min(np.abs(fitted_poles - p)) / abs(p)) for p in true_poles)


class TestInitialPoles:
    def test_single_real_pole(self, fitter, lti):
        grid = lti.make_grid(1.0, 100.0, 50)
        poles = fitter.initial_poles(grid, 1)
        assert poles.size == 1
        assert poles[0].imag == 0
        assert poles[0].real == pytest.approx(-2 * np.pi * 10.0)

    def test_one_pair(self, fitter, lti):
        grid = lti.make_grid(1.0, 100.0, 50)
        poles = fitter.initial_poles(grid, 2)
        w = 2 * np.pi * 10.0
        assert_allclose(sorted(poles, key=lambda p: p.imag), [complex(-w / 100, -w), complex(-w / 100, w)])

    def test_conjugate_closed(self, fitter, lti):
        poles = fitter.initial_poles(lti.make_grid(0.1, 500.0, 100), 9)
        assert poles.size == 9
        assert np.sum(poles.imag == 0) == 1
        assert_allclose(np.sort_complex(poles), np.sort_complex(np.conj(poles)))

    def test_zero_order(self, fitter, lti):
        with pytest.raises(ValidationError):
            fitter.initial_poles(lti.make_grid(1.0, 10.0, 10), 0)


class TestRealization:
    def test_rank_one_real_residue(self, fitter, lti):
        residue = np.array([[[1.0, 0.0], [0.0, 0.0]]])
        model = fitter.residues_to_state_space(np.array([-1.0]), residue, np.eye(2))
        assert model.n_states == 1
        assert_allclose(lti.eval_tf(model, 0.0), [[2.0, 0.0], [0.0, 1.0]], atol=1e-14)

    def test_complex_pair(self, fitter, lti):
        pole = complex(-1.0, 2.0)
        residue = np.array([[1 + 1j, 0.5], [0.0, 2j]])
        poles = np.array([pole, np.conj(pole)])
        model = fitter.residues_to_state_space(poles, np.stack([residue, np.conj(residue)]), np.zeros((2, 2)))
        assert np.isrealobj(model.A)
        omega = 1.5
        s = 1j * omega
        expected = residue / (s - pole) + np.conj(residue) / (s - np.conj(pole))
        assert_allclose(lti.eval_tf(model, omega), expected, rtol=1e-12)

    def test_missing_conjugate(self, fitter):
        with pytest.raises(ConjugationViolation):
            fitter.residues_to_state_space(np.array([complex(-1.0, 2.0)]), np.ones((1, 2, 2)), np.zeros((2, 2)))

    def test_real_pole_with_complex_residue(self, fitter):
        with pytest.raises(ConjugationViolation):
            fitter.residues_to_state_space(np.array([-1.0]), 1j * np.ones((1, 2, 2)), np.zeros((2, 2)))

    def test_no_poles(self, fitter):
        model = fitter.residues_to_state_space(np.zeros(0), np.zeros((0, 2, 2)), np.eye(2))
        assert model.n_states == 0


class TestVectorFit:
    def test_recovers_an_eight_state_model(self, fitter, lti, rng):
        target = stable_model(rng, 4, omega_range=(2 * np.pi * 0.5, 2 * np.pi * 300.0))
        response = lti.freq_response(target, lti.make_grid(0.1, 500.0, 400))
        model, report = fitter.vector_fit(response, FitConfig(order=8))
        assert report.max_rel_error <= 1e-6
        assert report.converged
        assert model.n_states == 8
        fitted = lti.eig_general(model.A).values
        true = lti.eig_general(target.A).values
        assert max_pole_distance(true, fitted) <= 1e-4

    def test_stable_poles(self, fitter, lti, random_model):
        response = lti.freq_response(random_model(2, 1), lti.make_grid(0.5, 300.0, 200))
        model, report = fitter.vector_fit(response, FitConfig(order=5, weighting=Weighting.UNIFORM))
        assert np.all(lti.eig_general(model.A).values.real < 0)
        assert all(pole[0] < 0 for pole in report.final_poles)

    def test_constant_response(self, fitter, lti):
        grid = lti.make_grid(1.0, 100.0, 40)
        response = FreqResponse(grid=grid, samples=np.broadcast_to(np.eye(2, dtype=complex), (40, 2, 2)))
        model, report = fitter.vector_fit(response, FitConfig(order=2))
        assert report.max_rel_error <= 1e-10
        assert report.converged
        assert_allclose(model.D, np.eye(2), atol=1e-10)

    def test_droop_admittance_needs_one_pole(self, fitter, lti, droop, flat_op):
        from app.services.device_service import DeviceModelService

        response = DeviceModelService().scan("droop", droop, flat_op, lti.make_grid(0.2, 200.0, 100))
        model, report = fitter.vector_fit(response, FitConfig(order=1))
        assert report.max_rel_error <= 1e-8
        assert lti.eig_general(model.A).values[0].real == pytest.approx(-1 / droop.tau, rel=1e-6)

    def test_refitting_a_fitted_model_keeps_its_poles(self, fitter, lti, droop, flat_op):
        from app.services.device_service import DeviceModelService

        grid = lti.make_grid(0.2, 200.0, 100)
        config = FitConfig(order=1, pole_relocation_tol=1e-10)
        first, _ = fitter.vector_fit(DeviceModelService().scan("droop", droop, flat_op, grid), config)
        second, report = fitter.vector_fit(lti.freq_response(first, grid), config)
        assert report.max_rel_error <= 1e-8
        before = lti.eig_general(first.A).values
        after = lti.eig_general(second.A).values
        assert max_pole_distance(before, after) <= 1e-8

    def test_reported_poles_are_the_model_poles(self, fitter, lti, rng):
        target = stable_model(rng, 4, omega_range=(2 * np.pi * 0.5, 2 * np.pi * 300.0))
        response = lti.freq_response(target, lti.make_grid(0.1, 500.0, 400))
        model, report = fitter.vector_fit(response, FitConfig(order=8))
        reported = np.array([complex(re, im) for re, im in report.final_poles])
        realized = lti.eig_general(model.A).values
        assert reported.size == realized.size == model.n_states
        assert max_pole_distance(reported, realized) <= 1e-9
        assert max_pole_distance(realized, reported) <= 1e-9

    def test_automatic_order(self, fitter, lti, rng):
        target = stable_model(rng, 4, omega_range=(2 * np.pi * 0.5, 2 * np.pi * 300.0))
        response = lti.freq_response(target, lti.make_grid(0.1, 500.0, 400))
        _, report = fitter.vector_fit(response, FitConfig(order=2, auto_order=True))
        orders = [attempt.order for attempt in report.order_history]
        assert orders[0] == 2
        assert all(b == 2 * a for a, b in zip(orders, orders[1:]))
        assert report.order == orders[-1]
        assert report.max_rel_error < 1e-4

    def test_too_few_points(self, fitter, lti, random_model):
        response = lti.freq_response(random_model(1), lti.make_grid(1.0, 10.0, 5))
        with pytest.raises(BadRange):
            fitter.vector_fit(response, FitConfig(order=4))

    def test_relative_errors(self):
        samples = np.broadcast_to(np.eye(2, dtype=complex), (3, 2, 2))
        errors = VectorFitService.relative_errors(1.1 * samples, samples)
        assert_allclose(errors, 0.1)


def test_fitted_model_is_real(fitter, lti, random_model):
    response = lti.freq_response(random_model(1, 1), lti.make_grid(0.5, 300.0, 80))
    model, _ = fitter.vector_fit(response, FitConfig(order=3))
    assert isinstance(model, RationalModel)
    assert np.isrealobj(model.A) and np.isrealobj(model.D)
