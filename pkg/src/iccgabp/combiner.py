"""Closed-form combiner that recovers the sum of computing signals from the SIC residual."""

from __future__ import annotations

import numpy as np

from .numerics import DecompositionError, hermitian_solve


class SingularSystemError(DecompositionError):
    """The combiner normal matrix is not positive definite."""


def _normal_matrix(H, sigma_s_sq, sigma_w_sq, omega_diag):
    H = np.asarray(H, dtype=np.complex128)
    weights = sigma_s_sq + np.asarray(omega_diag, dtype=np.float64)
    A = (H * weights[..., None, :]) @ np.conj(np.swapaxes(H, -1, -2))
    idx = np.arange(H.shape[-2])
    A[..., idx, idx] += sigma_w_sq
    return A


def compute_combiner(H, sigma_s_sq: float, sigma_w_sq: float, omega_diag=None) -> np.ndarray:
    """MMSE combining vector for the sum target.

    Solves ``(H (s2 I + Omega) H^H + w2 I) u = s2 H 1`` with a Cholesky
    factorisation. ``H`` may carry leading batch axes; ``omega_diag`` is the
    diagonal of the residual data-error covariance (zeros if omitted).
    """
    H = np.asarray(H, dtype=np.complex128)
    if omega_diag is None:
        omega_diag = np.zeros(H.shape[:-2] + H.shape[-1:])
    omega_diag = np.asarray(omega_diag, dtype=np.float64)
    if np.any(omega_diag < 0):
        raise ValueError("omega_diag must be non-negative")
    if sigma_s_sq == 0:
        return np.zeros(H.shape[:-1], dtype=np.complex128)
    A = _normal_matrix(H, sigma_s_sq, sigma_w_sq, omega_diag)
    b = sigma_s_sq * H.sum(axis=-1)
    try:
        return hermitian_solve(A, b)
    except DecompositionError as exc:
        raise SingularSystemError(f"combiner system is singular: {exc}") from None


def apply_combiner(u, y, H, d_hat) -> np.ndarray:
    """Real part of ``u^H (y - H d_hat)``."""
    residual = np.asarray(y) - np.einsum("...nk,...k->...n", H, d_hat)
    return np.einsum("...n,...n->...", np.conj(u), residual).real


def build_omega(result) -> np.ndarray:
    """Per-user data MSE averaged over antennas at the last iteration."""
    return np.asarray(result.var_d_final, dtype=np.float64)


def expected_objective(u, H, sigma_s_sq: float, sigma_w_sq: float, omega_diag=None) -> float:
    """``E|1^T s - u^H (H (s - d_err) + w)|^2`` for zero-mean independent terms."""
    H = np.asarray(H, dtype=np.complex128)
    K = H.shape[-1]
    if omega_diag is None:
        omega_diag = np.zeros(K)
    A = _normal_matrix(H, sigma_s_sq, sigma_w_sq, omega_diag)
    u = np.asarray(u)
    quad = np.einsum("...n,...nm,...m->...", np.conj(u), A, u).real
    cross = sigma_s_sq * np.einsum("...n,...n->...", np.conj(u), H.sum(axis=-1)).real
    return quad - 2.0 * cross + K * sigma_s_sq


def combine_sum(cfg, y, H, result) -> np.ndarray:
    """Sum estimate from a detection result: combiner built with Omega from the detector.

    The data part removed from ``y`` is the denoised consensus
    ``result.d_hat_soft``. The raw consensus still carries each user's
    computing-signal residual, so subtracting it would cancel part of the
    target; Omega also describes the error of denoised estimates.

    In adaptive mean mode the estimated mean is removed before combining and
    ``K * mu`` added back, since the closed form assumes zero-mean signals.
    """
    H = np.asarray(H, dtype=np.complex128)
    u = compute_combiner(H, cfg.sigma_s_sq, cfg.sigma_w_sq, build_omega(result))
    y = np.asarray(y)
    if cfg.mean_mode != "adaptive":
        return apply_combiner(u, y, H, result.d_hat_soft)
    mu = np.asarray(result.mu_s_est, dtype=np.float64)
    centred = y - mu[..., None] * H.sum(axis=-1)
    return apply_combiner(u, centred, H, result.d_hat_soft) + H.shape[-1] * mu
