"""
LTI Service - state-space evaluation, eigenvalues, frequency grids and interconnections
"""
import logging
from typing import Optional, Union

import numpy as np
import scipy.linalg

from app.config import get_settings
from app.core.exceptions import BadRange, NoConvergence, NotHermitian, SingularResolvent, ValidationError
from app.models.lti import FreqGrid, FreqResponse, ModelKind, RationalModel, Spacing, Spectrum

logger = logging.getLogger(__name__)

Transfer = Union[RationalModel, FreqResponse]


class LTIService:
    """Service for linear time-invariant model algebra"""

    def __init__(self):
        self.settings = get_settings()

    # Grids

    def make_grid(self, f_min: float, f_max: float, n_points: int, spacing: Spacing = Spacing.LOG) -> FreqGrid:
        """
        Build a frequency grid in rad/s from limits in Hz.

        Args:
            f_min: Lowest frequency (Hz)
            f_max: Highest frequency (Hz)
            n_points: Number of points, at least 2
            spacing: log or linear

        Returns:
            FreqGrid with range tags derived from the 10 Hz / 35 Hz boundaries
        """
        if not (0 < f_min < f_max) or not np.isfinite(f_max):
            raise BadRange(f"Need 0 < f_min < f_max, got ({f_min}, {f_max})")
        if n_points < 2:
            raise BadRange(f"Need at least 2 grid points, got {n_points}")
        spacing = Spacing(spacing)
        if spacing == Spacing.LINEAR:
            f_hz = np.linspace(f_min, f_max, n_points)
        else:
            f_hz = np.geomspace(f_min, f_max, n_points)
        return FreqGrid(points=2 * np.pi * f_hz, spacing=spacing)

    def low_grid(self, n_points: Optional[int] = None) -> FreqGrid:
        s = self.settings
        return self.make_grid(s.low_range_min_hz, s.low_band_hz, n_points or s.grid_points)

    def high_grid(self, f_max: Optional[float] = None, n_points: Optional[int] = None) -> FreqGrid:
        s = self.settings
        return self.make_grid(s.high_band_hz, f_max or s.high_range_max_hz, n_points or s.grid_points)

    def full_grid(self, f_max: Optional[float] = None, n_points: Optional[int] = None) -> FreqGrid:
        s = self.settings
        return self.make_grid(s.low_range_min_hz, f_max or s.high_range_max_hz, n_points or s.grid_points)

    # Eigenvalues

    def eig_general(self, matrix: np.ndarray) -> Spectrum:
        """Eigenvalues of a real square matrix"""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.size == 0:
            return Spectrum(values=np.zeros(0, dtype=complex))
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"Expected a square matrix, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValidationError("Matrix has non-finite entries")
        try:
            values = scipy.linalg.eigvals(matrix)
        except np.linalg.LinAlgError as e:
            raise NoConvergence(f"Eigenvalue iteration failed: {e}")
        return Spectrum(values=values)

    def eig_hermitian(self, matrix: np.ndarray) -> np.ndarray:
        """
        Real eigenvalues of a Hermitian matrix in ascending order.

        Args:
            matrix: Complex Hermitian matrix

        Returns:
            Ascending eigenvalues; 2x2 matrices use the closed form
        """
        return self.eig_hermitian_batch(np.asarray(matrix, dtype=complex)[None, :, :])[0]

    def eig_hermitian_batch(self, stack: np.ndarray) -> np.ndarray:
        """Ascending eigenvalues for a stack of Hermitian matrices, shape (K, n, n)"""
        stack = np.asarray(stack, dtype=complex)
        norms = np.linalg.norm(stack, axis=(1, 2))
        defects = np.linalg.norm(stack - np.conj(np.swapaxes(stack, 1, 2)), axis=(1, 2))
        bad = defects > self.settings.hermitian_tol * norms
        if np.any(bad):
            k = int(np.argmax(bad))
            raise NotHermitian(float(defects[k] / norms[k]))

        if stack.shape[1] == 2:
            a = stack[:, 0, 0].real
            d = stack[:, 1, 1].real
            b = stack[:, 0, 1]
            mean = (a + d) / 2
            radius = np.hypot((a - d) / 2, np.abs(b))
            return np.stack([mean - radius, mean + radius], axis=1)
        if stack.shape[0] == 1:
            return scipy.linalg.eigvalsh(stack[0])[None, :]
        return np.linalg.eigvalsh(stack)

    # Evaluation

    def eval_tf(self, model: RationalModel, omega: float) -> np.ndarray:
        """
        Evaluate G(jΩ) = C (jΩI - A)^-1 B + D.

        Args:
            model: State-space model
            omega: Angular frequency (rad/s)

        Returns:
            Complex transfer matrix
        """
        if model.n_states == 0:
            return model.D.astype(complex)
        poles = self.eig_general(model.A).values
        self._check_resolvent(poles, np.array([omega]))
        s = 1j * omega
        resolvent = s * np.eye(model.n_states) - model.A
        return model.C @ np.linalg.solve(resolvent, model.B) + model.D

    def freq_response(self, model: RationalModel, grid: FreqGrid) -> FreqResponse:
        """Evaluate a model at every grid point"""
        omega = grid.points
        if model.n_states == 0:
            samples = np.broadcast_to(model.D.astype(complex), (omega.size, *model.D.shape))
            return FreqResponse(grid=grid, samples=samples, kind=model.kind)
        poles = self.eig_general(model.A).values
        self._check_resolvent(poles, omega)
        n = model.n_states
        resolvent = 1j * omega[:, None, None] * np.eye(n)[None, :, :] - model.A[None, :, :]
        x = np.linalg.solve(resolvent, np.broadcast_to(model.B, (omega.size, *model.B.shape)))
        samples = model.C[None, :, :] @ x + model.D[None, :, :]
        return FreqResponse(grid=grid, samples=samples, kind=model.kind)

    def response_on(self, transfer: Transfer, grid: Optional[FreqGrid] = None) -> FreqResponse:
        """Samples of a model or of a response on its own grid"""
        if isinstance(transfer, FreqResponse):
            if grid is not None and (
                len(grid) != len(transfer.grid) or not np.allclose(grid.points, transfer.grid.points)
            ):
                raise BadRange("Sampled responses can only be checked on their own grid")
            return transfer
        if grid is None:
            grid = self.full_grid()
        return self.freq_response(transfer, grid)

    def _check_resolvent(self, poles: np.ndarray, omega: np.ndarray) -> None:
        if poles.size == 0:
            return
        distance = np.abs(1j * omega[:, None] - poles[None, :])
        limit = self.settings.resolvent_tol * np.maximum(1.0, np.abs(poles))[None, :]
        hits = np.argwhere(distance <= limit)
        if hits.size:
            k, j = hits[0]
            raise SingularResolvent(float(omega[k]), complex(poles[j]))

    @staticmethod
    def hermitian_part(samples: np.ndarray) -> np.ndarray:
        """G + G^H for a stack of matrices"""
        return samples + np.conj(np.swapaxes(samples, -1, -2))

    # Interconnections

    def parallel(self, first: RationalModel, second: RationalModel) -> RationalModel:
        """Sum G1 + G2 with shared inputs and summed outputs"""
        if first.D.shape != second.D.shape:
            raise ValidationError("Cannot add models with different port counts")
        return first.with_matrices(
            A=scipy.linalg.block_diag(first.A, second.A),
            B=np.vstack([first.B, second.B]),
            C=np.hstack([first.C, second.C]),
            D=first.D + second.D
        )

    def series(self, first: RationalModel, second: RationalModel) -> RationalModel:
        """Cascade: the output of `first` drives `second`, giving G2 G1"""
        if first.n_outputs != second.n_inputs:
            raise ValidationError("Port counts do not match for a cascade")
        n1, n2 = first.n_states, second.n_states
        A = np.block([
            [first.A, np.zeros((n1, n2))],
            [second.B @ first.C, second.A]
        ])
        return second.with_matrices(
            A=A,
            B=np.vstack([first.B, second.B @ first.D]),
            C=np.hstack([second.D @ first.C, second.C]),
            D=second.D @ first.D
        )

    def scale(self, model: RationalModel, factor: float) -> RationalModel:
        return model.with_matrices(C=factor * model.C, D=factor * model.D)

    def add_feedthrough(self, model: RationalModel, D: np.ndarray) -> RationalModel:
        return model.with_matrices(D=model.D + np.asarray(D, dtype=float))

    def augment_series_resistance(self, transfer: Transfer, r: float, grid: Optional[FreqGrid] = None) -> FreqResponse:
        """
        Admittance of a device behind a series resistance r in both axes.

        Evaluated pointwise as (I + rY)^-1 Y, which equals (Y^-1 + rI)^-1
        without requiring Y itself to be invertible.
        """
        response = self.response_on(transfer, grid)
        if response.kind != ModelKind.I:
            raise ValidationError("Series resistance augmentation applies to Model-I admittances")
        samples = response.samples
        eye = np.eye(samples.shape[1])[None, :, :]
        augmented = np.linalg.solve(eye + r * samples, samples)
        return FreqResponse(grid=response.grid, samples=augmented, kind=ModelKind.I)
