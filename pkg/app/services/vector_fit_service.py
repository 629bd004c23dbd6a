"""
Vector Fit Service - common-pole rational approximation of sampled transfer matrices
"""
import logging
from typing import List, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from app.config import get_settings
from app.core.exceptions import BadRange, ConjugationViolation, IllConditioned, NoConvergence, ValidationError
from app.models.lti import FreqGrid, FreqResponse, ModelKind, RationalModel
from app.schemas.fit import FitConfig, FitReport, OrderAttempt, Weighting
from app.services.lti_service import LTIService

logger = logging.getLogger(__name__)

# |d_res| below this is replaced before computing zeros
D_RES_FLOOR = 1e-8
# relative size of R22 below which the data is already explained by the current poles
R22_NEGLIGIBLE = 1e-10
# conjugate pairing and real-pole tolerance
PAIRING_TOL = 1e-8


def _expand_conjugates(poles: np.ndarray) -> np.ndarray:
    """Upper-half-plane pole list to the full conjugate-closed set"""
    return np.concatenate([poles, np.conj(poles[poles.imag > 0])])


def _basis(s: np.ndarray, poles: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Partial-fraction columns for real and complex poles.

    A complex pair r/(s-p) + conj(r)/(s-conj(p)) is linear in Re r and Im r with
    coefficients 1/(s-p) + 1/(s-conj(p)) and j/(s-p) - j/(s-conj(p)).

    Returns:
        (columns (K, order), index of real-pole columns, index of complex Re columns)
    """
    real_mask = poles.imag == 0
    p_real = poles[real_mask]
    p_cplx = poles[~real_mask]
    n_real, n_cplx = p_real.size, p_cplx.size

    idx_real = np.arange(n_real)
    idx_re = n_real + 2 * np.arange(n_cplx)
    idx_im = idx_re + 1

    phi = np.empty((s.size, n_real + 2 * n_cplx), dtype=complex)
    phi[:, idx_real] = 1 / (s[:, None] - p_real[None, :])
    first = 1 / (s[:, None] - p_cplx[None, :])
    second = 1 / (s[:, None] - np.conj(p_cplx)[None, :])
    phi[:, idx_re] = first + second
    phi[:, idx_im] = 1j * first - 1j * second
    return phi, idx_real, idx_re


def _column_scaling(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=0)
    return 1 / np.where(norms > 0, norms, 1.0)


class VectorFitService:
    """Service for iterative pole relocation and residue identification"""

    def __init__(self):
        self.settings = get_settings()
        self.lti = LTIService()

    def initial_poles(self, grid: FreqGrid, n: int) -> np.ndarray:
        """
        Starting poles: n // 2 lightly damped pairs plus one real pole if n is odd.

        Pair frequencies sit at the centres of n // 2 logarithmic bins over the
        positive grid span; real parts are -Im/100.

        Args:
            grid: Frequency grid (rad/s)
            n: Model order

        Returns:
            Conjugate-closed complex pole array of length n
        """
        if n < 1:
            raise ValidationError(f"Model order must be at least 1, got {n}")
        positive = grid.points[grid.points > 0]
        if positive.size == 0:
            raise BadRange("Grid has no positive frequency")
        w_min, w_max = float(positive[0]), float(positive[-1])

        n_pairs = n // 2
        poles = []
        if n_pairs:
            edges = np.geomspace(w_min, max(w_max, w_min * (1 + 1e-9)), n_pairs + 1)
            for w in np.sqrt(edges[:-1] * edges[1:]):
                poles.append(complex(-w / 100, w))
        if n % 2:
            poles.append(complex(-np.sqrt(w_min * w_max), 0.0))
        return _expand_conjugates(np.array(poles, dtype=complex))

    def residues_to_state_space(
        self,
        poles: np.ndarray,
        residues: np.ndarray,
        D: np.ndarray,
        kind: ModelKind = ModelKind.I
    ) -> RationalModel:
        """
        Real Gilbert realization of sum_k R_k / (s - p_k) + D.

        Each pole gets as many states as the rank of its residue; a
        complex pair uses the real 2x2 rotation block per rank.

        Args:
            poles: Conjugate-closed poles, shape (n,)
            residues: Residue matrices, shape (n, p, m)
            D: Real feedthrough, shape (p, m)
            kind: Interface formulation of the result

        Raises:
            ConjugationViolation: poles or residues not closed under conjugation
        """
        poles = np.asarray(poles, dtype=complex).ravel()
        residues = np.asarray(residues, dtype=complex)
        D = np.atleast_2d(np.asarray(D))
        if np.iscomplexobj(D) and np.any(np.abs(D.imag) > 0):
            raise ConjugationViolation("Feedthrough must be real")
        D = D.real.astype(float)
        p, m = D.shape
        if residues.shape != (poles.size, p, m):
            raise ValidationError(f"Expected residues of shape {(poles.size, p, m)}, got {residues.shape}")

        blocks_a: List[np.ndarray] = []
        blocks_b: List[np.ndarray] = []
        blocks_c: List[np.ndarray] = []
        used = np.zeros(poles.size, dtype=bool)
        for k, pole in enumerate(poles):
            if used[k]:
                continue
            used[k] = True
            tol = PAIRING_TOL * max(1.0, abs(pole))
            R = residues[k]
            r_tol = PAIRING_TOL * max(1.0, float(np.linalg.norm(R)))

            partner = None
            if pole.imag != 0:
                candidates = np.flatnonzero(~used & (np.abs(poles - np.conj(pole)) <= tol))
                partner = next(
                    (j for j in candidates if np.linalg.norm(residues[j] - np.conj(R)) <= r_tol),
                    None
                )
                if partner is None and abs(pole.imag) > tol:
                    raise ConjugationViolation(
                        f"Pole {pole:.6g} has no conjugate partner with a conjugate residue",
                        details={"pole": [pole.real, pole.imag]}
                    )

            if partner is None:
                if np.linalg.norm(R.imag) > r_tol:
                    raise ConjugationViolation(
                        f"Real pole {pole.real:.6g} has a complex residue",
                        details={"pole": [pole.real, pole.imag]}
                    )
                U, S, Vh = np.linalg.svd(R.real)
                r = max(1, int(np.sum(S > 1e-12 * max(S[0], 1e-300))))
                root = np.sqrt(S[:r])
                blocks_a.append(pole.real * np.eye(r))
                blocks_b.append(root[:, None] * Vh[:r])
                blocks_c.append(U[:, :r] * root[None, :])
                continue

            used[partner] = True
            if pole.imag < 0:
                pole, R = np.conj(pole), residues[partner]

            U, S, Vh = np.linalg.svd(R)
            r = max(1, int(np.sum(S > 1e-12 * max(S[0], 1e-300))))
            root = np.sqrt(S[:r])
            left = U[:, :r] * root[None, :]
            right = root[:, None] * Vh[:r]
            a, b = pole.real, pole.imag
            eye = np.eye(r)
            blocks_a.append(np.block([[a * eye, -b * eye], [b * eye, a * eye]]))
            blocks_b.append(np.vstack([right.real, right.imag]))
            blocks_c.append(np.hstack([2 * left.real, -2 * left.imag]))

        if not blocks_a:
            return RationalModel.static(D, kind=kind)
        return RationalModel(
            A=scipy.linalg.block_diag(*blocks_a),
            B=np.vstack(blocks_b),
            C=np.hstack(blocks_c),
            D=D,
            kind=kind
        )

    def vector_fit(self, response: FreqResponse, config: FitConfig) -> Tuple[RationalModel, FitReport]:
        """
        Fit a common-pole rational model to every entry of a sampled response.

        Args:
            response: Samples on a grid, shape (K, p, m)
            config: Order, iteration limits, weighting and stability options

        Returns:
            (RationalModel, FitReport)

        Raises:
            BadRange: fewer than 2n + 2 grid points
            IllConditioned: rank-deficient residue identification
        """
        if not config.auto_order:
            return self._fit_order(response, config, config.order)

        history = []
        order = config.order
        while True:
            model, report = self._fit_order(response, config, order)
            history.append(OrderAttempt(order=order, max_rel_error=report.max_rel_error))
            logger.info(f"Order {order}: max relative error {report.max_rel_error:.3e}")
            next_order = min(2 * order, config.max_order)
            if (
                report.max_rel_error < config.auto_target
                or next_order == order
                or 2 * next_order + 2 > len(response)
            ):
                break
            order = next_order
        return model, report.model_copy(update={"order_history": history})

    def _fit_order(self, response: FreqResponse, config: FitConfig, n: int) -> Tuple[RationalModel, FitReport]:
        K, p, m = response.samples.shape
        if K < 2 * n + 2:
            raise BadRange(f"Order {n} needs at least {2 * n + 2} grid points, got {K}")

        omega = response.grid.points
        w_scale = float(np.max(omega)) if np.max(omega) > 0 else 1.0
        s = 1j * omega / w_scale
        data = response.samples.reshape(K, p * m).T
        weights = self._weights(response.samples, config.weighting)

        poles = self.initial_poles(response.grid, n) / w_scale
        poles = poles[poles.imag >= 0]
        logger.info(f"Vector fitting order {n} on {K} points ({p}x{m} response)")

        movements, conds = [], []
        rank_deficiency = 0
        converged = False
        iterations = 0
        for iterations in range(1, config.max_iters + 1):
            new_poles, cond, deficiency, settled = self._relocate(poles, s, data, weights)
            if config.enforce_stability:
                new_poles = -np.abs(new_poles.real) + 1j * new_poles.imag
            if not np.all(np.isfinite(new_poles)):
                raise NoConvergence("Pole relocation produced non-finite poles", details={"iteration": iterations})

            movement = 0.0 if settled else self._movement(poles, new_poles)
            movements.append(movement)
            conds.append(cond)
            rank_deficiency = max(rank_deficiency, deficiency)
            logger.debug(f"Iteration {iterations}: pole movement {movement:.3e}, condition {cond:.3e}")
            poles = new_poles
            if movement < config.pole_relocation_tol:
                converged = True
                break

        if not converged:
            logger.warning(f"Pole relocation stopped at {config.max_iters} iterations without converging")
        if rank_deficiency:
            logger.warning(f"Relocation system was rank deficient by {rank_deficiency}")

        full = _expand_conjugates(poles)
        residues, D = self._fit_residues(full, s, data, weights)
        model = self.residues_to_state_space(
            full * w_scale,
            residues.reshape(full.size, p, m) * w_scale,
            D.reshape(p, m)
        )

        fitted = self.lti.freq_response(model, response.grid).samples
        errors = self.relative_errors(fitted, response.samples)
        report = FitReport(
            order=n,
            n_states=model.n_states,
            max_rel_error=float(np.max(errors)),
            rms_rel_error=float(np.sqrt(np.mean(errors ** 2))),
            iterations=iterations,
            converged=converged,
            pole_movement=movements,
            condition_numbers=conds,
            rank_deficiency=rank_deficiency,
            final_poles=[[float(v.real), float(v.imag)] for v in full * w_scale]
        )
        logger.info(
            f"Fit finished after {iterations} iteration(s): {model.n_states} states, "
            f"max relative error {report.max_rel_error:.3e}"
        )
        return model, report

    @staticmethod
    def relative_errors(fitted: np.ndarray, samples: np.ndarray) -> np.ndarray:
        """Per-point ||G_fit - G||_F / ||G||_F"""
        norms = np.linalg.norm(samples, axis=(1, 2))
        floor = 1e-12 * max(float(np.max(norms)), 1e-300)
        return np.linalg.norm(fitted - samples, axis=(1, 2)) / np.maximum(norms, floor)

    @staticmethod
    def _weights(samples: np.ndarray, weighting: Weighting) -> np.ndarray:
        if Weighting(weighting) == Weighting.UNIFORM:
            return np.ones(samples.shape[0])
        norms = np.linalg.norm(samples, axis=(1, 2))
        floor = 1e-12 * max(float(np.max(norms)), 1e-300)
        return 1 / np.maximum(norms, floor)

    @staticmethod
    def _movement(old: np.ndarray, new: np.ndarray) -> float:
        """Largest relative displacement under a one-to-one matching of the full pole sets"""
        a, b = _expand_conjugates(old), _expand_conjugates(new)
        if a.size != b.size:
            return float("inf")
        cost = np.abs(a[:, None] - b[None, :])
        rows, cols = linear_sum_assignment(cost)
        return float(np.max(cost[rows, cols] / np.maximum(np.abs(a[rows]), 1e-12)))

    def _relocate(
        self,
        poles: np.ndarray,
        s: np.ndarray,
        data: np.ndarray,
        weights: np.ndarray
    ) -> Tuple[np.ndarray, float, int, bool]:
        """
        One pole relocation step.

        Each response entry contributes the R22 block of the QR factor of
        [Phi, 1, -H Phi, -H]; the stacked blocks plus one normalization row
        give the weighting-function coefficients whose zeros are the new poles.

        Returns:
            (new upper-half poles, condition number, rank deficiency, settled)
        """
        n_resp, K = data.shape
        phi, idx_real, idx_re = _basis(s, poles)
        order = phi.shape[1]
        n_left = order + 1

        rows = np.empty((n_resp, K, 2 * n_left), dtype=complex)
        rows[:, :, :order] = phi
        rows[:, :, order] = 1
        rows[:, :, n_left:n_left + order] = -data[:, :, None] * phi[None, :, :]
        rows[:, :, -1] = -data
        rows = weights[None, :, None] * rows
        stacked = np.concatenate([rows.real, rows.imag], axis=1)

        r22 = np.concatenate([
            np.linalg.qr(stacked[k], mode="r")[n_left:, n_left:]
            for k in range(n_resp)
        ])
        reference = float(np.linalg.norm(stacked))
        if np.linalg.norm(r22) <= R22_NEGLIGIBLE * reference:
            return poles, 1.0, 0, True

        weight_extra = np.sqrt(np.linalg.norm(weights[None, :] * data) / (n_resp * K))
        extra = np.empty(n_left)
        extra[:order] = np.sum(phi.real, axis=0)
        extra[-1] = K
        system = np.vstack([r22, weight_extra * extra[None, :]])
        rhs = np.zeros(system.shape[0])
        rhs[-1] = weight_extra * K

        scaling = _column_scaling(system)
        system = system * scaling[None, :]
        cond = float(np.linalg.cond(system))
        x, _, rank, _ = np.linalg.lstsq(system, rhs, rcond=None)
        x = scaling * x
        deficiency = int(min(system.shape) - rank)

        c_res, d_res = x[:-1], x[-1]
        if abs(d_res) < D_RES_FLOOR:
            logger.debug(f"Replacing small d_res = {d_res:.3e}")
            d_res = D_RES_FLOOR * (np.sign(d_res) or 1.0)

        real_mask = poles.imag == 0
        p_real, p_cplx = poles[real_mask], poles[~real_mask]
        idx_im = idx_re + 1
        H = np.zeros((order, order))
        H[idx_real, idx_real] = p_real.real
        H[idx_real] -= c_res / d_res
        H[idx_re, idx_re] = p_cplx.real
        H[idx_re, idx_im] = p_cplx.imag
        H[idx_im, idx_re] = -p_cplx.imag
        H[idx_im, idx_im] = p_cplx.real
        H[idx_re] -= 2 * c_res / d_res

        new_poles = self.lti.eig_general(H).values
        return new_poles[new_poles.imag >= 0], cond, deficiency, False

    def _fit_residues(
        self,
        poles: np.ndarray,
        s: np.ndarray,
        data: np.ndarray,
        weights: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Weighted least squares for residues and constant terms with fixed poles.

        Returns:
            (residues (n_poles, n_resp) complex, constants (n_resp,))
        """
        upper = poles[poles.imag >= 0]
        phi, idx_real, idx_re = _basis(s, upper)
        order = phi.shape[1]

        matrix = np.empty((s.size, order + 1), dtype=complex)
        matrix[:, :order] = phi
        matrix[:, order] = 1
        matrix = weights[:, None] * matrix
        rhs = weights[None, :] * data

        system = np.vstack([matrix.real, matrix.imag])
        target = np.hstack([rhs.real, rhs.imag]).T
        scaling = _column_scaling(system)
        system = system * scaling[None, :]
        x, _, rank, _ = np.linalg.lstsq(system, target, rcond=None)
        if rank < system.shape[1]:
            raise IllConditioned(
                "Residue identification is rank deficient",
                details={"rank": int(rank), "columns": int(system.shape[1]), "cond": float(np.linalg.cond(system))}
            )
        x = scaling[:, None] * x

        real_mask = upper.imag == 0
        upper_res = np.empty((upper.size, data.shape[0]), dtype=complex)
        upper_res[real_mask] = x[idx_real]
        upper_res[~real_mask] = x[idx_re] + 1j * x[idx_re + 1]

        residues = np.empty((poles.size, data.shape[0]), dtype=complex)
        for k, pole in enumerate(poles):
            if pole.imag >= 0:
                residues[k] = upper_res[int(np.flatnonzero(upper == pole)[0])]
            else:
                residues[k] = np.conj(upper_res[int(np.flatnonzero(upper == np.conj(pole))[0])])
        return residues, x[order]
