"""
Passivity Service - frequency-domain positive-real conditions and verdicts
"""
import logging
from typing import List, Optional, Set, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.cluster.hierarchy import fclusterdata

from app.config import get_settings
from app.core.exceptions import GridComplyException, GridHitsPole, NotRational
from app.models.lti import FreqGrid, FreqRange, FreqResponse, RangeTag, RationalModel
from app.schemas.verdict import AxisPoleResult, PassivityVerdict, PsdCurve, RhpResult, ViolationBand
from app.services.lti_service import LTIService

logger = logging.getLogger(__name__)

Transfer = Union[RationalModel, FreqResponse]


class PassivityService:
    """Service implementing the three frequency-domain passivity conditions"""

    def __init__(self):
        self.settings = get_settings()
        self.lti = LTIService()

    # Pole clusters

    def pole_clusters(self, A: np.ndarray) -> List[np.ndarray]:
        """
        Group eigenvalues of A that coincide up to rounding.

        A defective eigenvalue of multiplicity k is computed with an
        O(eps^(1/k)) spread, so single-linkage clustering at a distance
        relative to ||A|| reunites it.

        Returns:
            List of complex arrays, one per cluster
        """
        values = self.lti.eig_general(A).values
        if values.size == 0:
            return []
        if values.size == 1:
            return [values]
        scale = max(1.0, float(np.linalg.norm(A, 2)))
        points = np.column_stack([values.real, values.imag])
        labels = fclusterdata(points, t=self.settings.pole_cluster_tol * scale, criterion="distance", method="single")
        return [values[labels == label] for label in np.unique(labels)]

    def _is_axis(self, cluster: np.ndarray) -> bool:
        return abs(float(np.mean(cluster).real)) <= self.settings.axis_pole_tol

    def axis_pole_frequencies(self, model: RationalModel) -> np.ndarray:
        """Non-negative Ω_p of every imaginary-axis pole cluster"""
        omegas = [
            abs(float(np.mean(cluster).imag))
            for cluster in self.pole_clusters(model.A)
            if self._is_axis(cluster)
        ]
        return np.unique(np.array(omegas, dtype=float))

    # Cancelled modes

    def _mode_groups(self, A: np.ndarray) -> List[np.ndarray]:
        """Pole clusters folded onto the upper half-plane, so a conjugate pair forms one group"""
        values = self.lti.eig_general(A).values
        folded = values.real + 1j * np.abs(values.imag)
        if folded.size < 2:
            return [folded]
        scale = max(1.0, float(np.linalg.norm(A, 2)))
        points = np.column_stack([folded.real, folded.imag])
        labels = fclusterdata(points, t=self.settings.pole_cluster_tol * scale, criterion="distance", method="single")
        return [folded[labels == label] for label in np.unique(labels)]

    def _split_modes(
        self,
        model: RationalModel,
        groups: List[np.ndarray],
        chosen: Set[int]
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Real (A11, B1, C1) of the modes whose nearest group is in `chosen`.

        The ordered real Schur form moves those eigenvalues top-left and a
        Sylvester solve decouples them from the rest.
        """
        def nearest(re: float, im: float = 0.0) -> bool:
            value = complex(re) + 1j * im
            value = complex(value.real, abs(value.imag))
            return int(np.argmin([np.min(np.abs(group - value)) for group in groups])) in chosen

        T, Z, sdim = scipy.linalg.schur(model.A, output="real", sort=nearest)
        k = int(sdim)
        T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
        B_t = Z.T @ model.B
        B1 = B_t[:k]
        if k and T22.size:
            X = scipy.linalg.solve_sylvester(T11, -T22, -T12)
            B1 = B1 - X @ B_t[k:]
        return T11, B1, (model.C @ Z)[:, :k]

    def drop_cancelled_modes(self, model: RationalModel, grid: Optional[FreqGrid] = None) -> RationalModel:
        """
        Remove modes a zero cancels up to rounding.

        Each pole group is split off and its contribution evaluated over the
        grid. Groups whose peak gain stays below cancel_tol times the larger
        of ||D|| and the largest group peak are removed; the others keep
        their exact dynamics.

        Args:
            model: Rational model, typically an inverted feedthrough model
            grid: Evaluation grid (defaults to the full range)

        Returns:
            Model with the negligible groups removed, or the input unchanged
        """
        if model.n_states == 0:
            return model
        grid = grid or self.lti.full_grid()
        groups = self._mode_groups(model.A)

        peaks = []
        for j, group in enumerate(groups):
            try:
                A1, B1, C1 = self._split_modes(model, groups, {j})
                if A1.shape[0] != group.size:
                    raise np.linalg.LinAlgError(f"selected {A1.shape[0]} eigenvalues for a group of {group.size}")
                part = RationalModel(A=A1, B=B1, C=C1, D=np.zeros_like(model.D), kind=model.kind)
                samples = self.lti.freq_response(part, grid).samples
                peaks.append(float(np.max(np.linalg.norm(samples, ord=2, axis=(1, 2)))))
            except (GridComplyException, np.linalg.LinAlgError) as e:
                logger.debug(f"Pole group near {group[0]:.4g} kept: {e}")
                peaks.append(float("inf"))

        finite = [p for p in peaks if np.isfinite(p)]
        reference = max([float(np.linalg.norm(model.D, 2)), *finite])
        if reference == 0:
            return model
        limit = self.settings.cancel_tol * reference
        kept = {j for j, peak in enumerate(peaks) if not peak <= limit}
        if len(kept) == len(groups):
            return model

        dropped = [complex(v) for j, group in enumerate(groups) if j not in kept for v in group]
        logger.info(f"Dropped {len(dropped)} cancelled mode(s) at {[f'{v:.3g}' for v in dropped]}")
        if not kept:
            return model.with_matrices(
                A=np.zeros((0, 0)),
                B=np.zeros((0, model.n_inputs)),
                C=np.zeros((model.n_outputs, 0))
            )
        A1, B1, C1 = self._split_modes(model, groups, kept)
        return model.with_matrices(A=A1, B=B1, C=C1)

    # Condition (1)

    def check_rhp_poles(self, model: RationalModel) -> RhpResult:
        """
        Poles strictly in the right half-plane.

        Axis clusters are excluded here and judged by check_axis_poles.
        """
        tol = self.settings.axis_pole_tol
        offending = []
        for cluster in self.pole_clusters(model.A):
            if self._is_axis(cluster):
                continue
            offending.extend(v for v in cluster if v.real > tol)
        if offending:
            logger.info(f"{len(offending)} right half-plane pole(s), max Re = {max(v.real for v in offending):.4g}")
        return RhpResult(ok=not offending, poles=[[float(v.real), float(v.imag)] for v in offending])

    # Condition (2)

    def check_psd_spectrum(self, transfer: Transfer, grid: Optional[FreqGrid] = None) -> PsdCurve:
        """
        Eigenvalues of G(jΩ) + G(jΩ)^H over a grid.

        Args:
            transfer: Rational model or sampled response
            grid: Evaluation grid; a sampled response is used on its own grid

        Returns:
            PsdCurve with violation bands where the smallest eigenvalue is below -psd_tol

        Raises:
            GridHitsPole: a grid point lies on an imaginary-axis pole
        """
        if isinstance(transfer, RationalModel):
            grid = grid or self.lti.full_grid()
            self._check_grid(transfer, grid)
        response = self.lti.response_on(transfer, grid)
        eigs = self.lti.eig_hermitian_batch(self.lti.hermitian_part(response.samples))
        return self._curve(response.grid, eigs)

    def _check_grid(self, model: RationalModel, grid: FreqGrid) -> None:
        tol = self.settings.grid_pole_tol
        for pole_omega in self.axis_pole_frequencies(model):
            distance = np.abs(grid.points - pole_omega)
            hits = distance <= tol * np.maximum(abs(pole_omega), grid.points)
            if np.any(hits):
                raise GridHitsPole(float(grid.points[np.argmax(hits)]), float(pole_omega))

    def _curve(self, grid: FreqGrid, eigs: np.ndarray) -> PsdCurve:
        tol = self.settings.psd_tol
        f_hz = grid.f_hz
        tags = grid.tags
        minimum = eigs[:, 0]
        bad = minimum < -tol

        violations = []
        start = None
        for k, flag in enumerate(np.append(bad, False)):
            if flag and start is None:
                start = k
            elif not flag and start is not None:
                violations.append(ViolationBand(
                    f_lo=float(f_hz[start]),
                    f_hi=float(f_hz[k - 1]),
                    worst=float(np.min(minimum[start:k])),
                    ranges=sorted(set(tags[start:k]), key=list(RangeTag).index)
                ))
                start = None

        return PsdCurve(
            f_hz=f_hz.tolist(),
            eigenvalues=eigs.tolist(),
            min_eig=float(np.min(minimum)),
            violations=violations,
            ok=not violations
        )

    # Condition (3)

    def check_axis_poles(self, transfer: Transfer) -> List[AxisPoleResult]:
        """
        Simplicity and residue test for every imaginary-axis pole.

        Each axis cluster is separated from the rest of the spectrum by an
        ordered complex Schur form and a Sylvester solve. On the isolated
        block T11 = λI + N the transfer function expands as
        C1 B1 / (s - λ) + C1 N B1 / (s - λ)^2 + ..., so the pole is simple
        when every C1 N^k B1 vanishes and the residue is C1 B1.

        Raises:
            NotRational: given sampled data
        """
        if not isinstance(transfer, RationalModel):
            raise NotRational("check_axis_poles")
        model = transfer
        results = []
        for cluster in self.pole_clusters(model.A):
            if not self._is_axis(cluster):
                continue
            lam = complex(0.0, float(np.mean(cluster).imag))
            if lam.imag < -self.settings.axis_pole_tol:
                continue
            results.append(self._axis_pole(model, cluster, lam))
        return results

    def _axis_pole(self, model: RationalModel, cluster: np.ndarray, lam: complex) -> AxisPoleResult:
        scale = max(1.0, float(np.linalg.norm(model.A, 2)))
        radius = float(np.max(np.abs(cluster - lam)))
        select = max(2 * radius, self.settings.pole_cluster_tol * scale)

        T, Z, sdim = scipy.linalg.schur(model.A, output="complex", sort=lambda x: abs(x - lam) <= select)
        k = int(sdim)
        if k != cluster.size:
            logger.warning(f"Schur reordering selected {k} eigenvalues for a cluster of {cluster.size}")

        T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
        B_t = Z.conj().T @ model.B
        C_t = model.C @ Z
        if T22.size:
            X = scipy.linalg.solve_sylvester(T11, -T22, -T12)
            B1 = B_t[:k] - X @ B_t[k:]
        else:
            B1 = B_t[:k]
        C1 = C_t[:, :k]

        N = T11 - lam * np.eye(k)
        limit = 1e-6 * np.linalg.norm(C1) * np.linalg.norm(B1) * max(1.0, float(np.linalg.norm(T11)))
        simple = True
        power = np.eye(k)
        for _ in range(1, k):
            power = power @ N
            if np.linalg.norm(C1 @ power @ B1) > limit:
                simple = False
                break

        residue = C1 @ B1
        norm = max(1.0, float(np.linalg.norm(residue)))
        hermitian = float(np.linalg.norm(residue - residue.conj().T)) <= self.settings.hermitian_tol * norm
        eigs = np.linalg.eigvalsh((residue + residue.conj().T) / 2)
        residue_psd = hermitian and bool(eigs[0] >= -self.settings.psd_tol * norm)

        omega = float(lam.imag)
        if not simple:
            logger.info(f"Non-simple imaginary-axis pole at Ω = {omega:.6g} rad/s (multiplicity {k})")
        return AxisPoleResult(
            omega=omega,
            f_hz=omega / (2 * np.pi),
            multiplicity=k,
            simple=simple,
            residue_psd=residue_psd,
            residue_hermitian=hermitian,
            residue_eigs=eigs.tolist()
        )

    # Verdicts

    def grid_for(self, range: FreqRange, high_limit_hz: Optional[float] = None) -> FreqGrid:
        """Default evaluation grid for a requested range"""
        range = FreqRange(range)
        if range == FreqRange.LOW:
            return self.lti.low_grid()
        if range == FreqRange.HIGH:
            return self.lti.high_grid(high_limit_hz)
        return self.lti.full_grid(high_limit_hz)

    def passivity_verdict(
        self,
        transfer: Transfer,
        range: FreqRange = FreqRange.FULL,
        grid: Optional[FreqGrid] = None,
        high_limit_hz: Optional[float] = None
    ) -> PassivityVerdict:
        """
        Combine the three conditions for a frequency range.

        Sampled responses support the spectrum condition only, evaluated on
        the grid points that fall inside the requested range.

        Args:
            transfer: Rational model or sampled response
            range: low (0.01-10 Hz), high (35 Hz up to the limit) or full
            grid: Explicit evaluation grid for rational models
            high_limit_hz: Upper limit of the high range

        Returns:
            PassivityVerdict
        """
        range = FreqRange(range)
        rational = isinstance(transfer, RationalModel)
        if rational and grid is None:
            grid = self.grid_for(range, high_limit_hz)

        curve = self.check_psd_spectrum(transfer, grid)
        curve_grid = grid if rational else transfer.grid
        tol = self.settings.psd_tol
        psd_low = curve.ok_where(curve_grid.low_mask.tolist(), tol)
        psd_high = curve.ok_where(curve_grid.high_mask.tolist(), tol)
        if rational or range == FreqRange.FULL:
            psd_ok = curve.ok
        else:
            selected = psd_low if range == FreqRange.LOW else psd_high
            psd_ok = curve.ok if selected is None else selected

        verdict = {
            "range": range,
            "min_eig_curve": curve.rows(),
            "psd_ok": psd_ok,
            "psd_ok_low": psd_low,
            "psd_ok_high": psd_high,
            "violations": curve.violations,
            "rational": rational,
        }
        overall = psd_ok
        if rational:
            rhp = self.check_rhp_poles(transfer)
            axis = self.check_axis_poles(transfer)
            overall = overall and rhp.ok and all(pole.ok for pole in axis)
            verdict.update(rhp_pole_free=rhp.ok, rhp_poles=rhp.poles, axis_poles=axis)

        logger.info(f"Passivity verdict ({range.value}): {'pass' if overall else 'fail'}, min eig {curve.min_eig:.4g}")
        return PassivityVerdict(overall=overall, **verdict)
