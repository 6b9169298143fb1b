"""Bivariate Gaussian belief propagation for joint QPSK data and computing-signal detection.

Every grid is indexed ``(..., n, k)``: antenna ``n`` (factor node) by user
``k`` (variable node). Leading axes are independent problem instances, so a
whole Monte-Carlo block of channel realisations runs through one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .system_model import SystemConfig

VAR_FLOOR = 1e-12


@dataclass
class GabpState:
    d_hat: np.ndarray  # complex (..., N, K)
    var_d: np.ndarray
    s_hat: np.ndarray  # real (..., N, K)
    var_s: np.ndarray
    mu_s_est: np.ndarray  # (...,)
    iteration: int = 0


@dataclass
class SicGrids:
    y_tilde_d: np.ndarray
    var_tilde_d: np.ndarray
    y_tilde_s: np.ndarray
    var_tilde_s: np.ndarray


@dataclass
class BeliefGrids:
    d_bar: np.ndarray
    var_bar_d: np.ndarray
    s_bar: np.ndarray  # complex; only the real part reaches the denoiser
    var_bar_s: np.ndarray


@dataclass
class DetectionResult:
    d_hat_final: np.ndarray  # (..., K) complex consensus, not sliced
    d_hat_soft: np.ndarray  # (..., K) consensus passed through the QPSK denoiser
    s_hat_final: np.ndarray  # (..., K)
    var_d_final: np.ndarray  # (..., K) data MSE averaged over antennas
    mu_s_est: np.ndarray
    sic_grids_final: SicGrids
    state: GabpState
    trace: list = field(default_factory=list)


def leave_one_out_sum(a, axis=-1):
    """``out[i] = sum_{j != i} a[j]`` along ``axis``, as total minus own term."""
    a = np.asarray(a)
    return a.sum(axis=axis, keepdims=True) - a


def init_state(cfg: SystemConfig, batch_shape=()) -> GabpState:
    shape = tuple(batch_shape) + (cfg.N, cfg.K)
    return GabpState(
        d_hat=np.zeros(shape, dtype=np.complex128),
        var_d=np.full(shape, cfg.e_d),
        s_hat=np.zeros(shape),
        var_s=np.full(shape, cfg.sigma_s_sq),
        mu_s_est=np.zeros(tuple(batch_shape)),
    )


def soft_ic(y, H, state: GabpState, sigma_w_sq: float, floor: float = VAR_FLOOR,
           gain=None) -> SicGrids:
    """Soft interference cancellation for both branches.

    The data branch removes the other users' data replicas and every user's
    computing replica; the computing branch mirrors this. ``gain`` is
    ``|H|**2`` if the caller already has it.
    """
    y = np.asarray(y)[..., :, None]
    if gain is None:
        gain = _abs2(H)
    hd = H * state.d_hat
    hs = H * state.s_hat
    err_d = gain * state.var_d
    err_s = gain * state.var_s
    hd_all = hd.sum(-1, keepdims=True)
    hs_all = hs.sum(-1, keepdims=True)
    err_d_all = err_d.sum(-1, keepdims=True)
    err_s_all = err_s.sum(-1, keepdims=True)

    y_tilde_d = y - (hd_all - hd) - hs_all
    y_tilde_s = y - (hs_all - hs) - hd_all
    var_tilde_d = (err_d_all - err_d) + err_s_all + sigma_w_sq
    var_tilde_s = (err_s_all - err_s) + err_d_all + sigma_w_sq
    return SicGrids(y_tilde_d, np.maximum(var_tilde_d, floor, out=var_tilde_d),
                    y_tilde_s, np.maximum(var_tilde_s, floor, out=var_tilde_s))


def _abs2(z):
    return z.real ** 2 + z.imag ** 2


def _extrinsic(y_tilde, var_tilde, H_conj, gain, floor):
    precision = leave_one_out_sum(gain / var_tilde, -2)
    var_bar = 1.0 / np.maximum(precision, floor)
    mean_bar = var_bar * leave_one_out_sum(H_conj * y_tilde / var_tilde, -2)
    return mean_bar, np.maximum(var_bar, floor)


def belief_generation(sic: SicGrids, H, floor: float = VAR_FLOOR, gain=None) -> BeliefGrids:
    """Extrinsic beliefs: MRC-combine every antenna except the receiving one."""
    if np.shape(H)[-2] < 2:
        raise ValueError("belief generation needs N >= 2 antennas")
    if gain is None:
        gain = _abs2(H)
    H_conj = np.conj(H)
    d_bar, var_bar_d = _extrinsic(sic.y_tilde_d, sic.var_tilde_d, H_conj, gain, floor)
    s_bar, var_bar_s = _extrinsic(sic.y_tilde_s, sic.var_tilde_s, H_conj, gain, floor)
    return BeliefGrids(d_bar, var_bar_d, s_bar, var_bar_s)


def data_mse(d_hat, e_d: float) -> np.ndarray:
    """Expected squared error of a QPSK soft replica, clipped to [0, e_d]."""
    return np.clip(e_d - np.abs(d_hat) ** 2, 0.0, e_d)


def qpsk_posterior_mean(mean, var, e_d: float) -> np.ndarray:
    """E[d | observation ~ CN(d, var)] for d uniform on the QPSK alphabet of power ``e_d``."""
    c_d = np.sqrt(e_d / 2.0)
    scale = 2.0 * c_d / var
    return c_d * (np.tanh(scale * mean.real) + 1j * np.tanh(scale * mean.imag))


def denoise_data(beliefs: BeliefGrids, e_d: float):
    """Posterior-mean QPSK denoiser; returns the replica and its MSE."""
    d_hat = qpsk_posterior_mean(beliefs.d_bar, beliefs.var_bar_d, e_d)
    return d_hat, data_mse(d_hat, e_d)


def denoise_computing(beliefs: BeliefGrids, sigma_s_sq: float, mu_s):
    """Gaussian-prior shrinkage of the real part of the computing belief.

    ``mu_s`` is the prior mean, either a scalar or one value per instance.
    """
    mu = np.asarray(mu_s, dtype=np.float64)[..., None, None]
    v = beliefs.var_bar_s
    denom = v + sigma_s_sq
    s_hat = (sigma_s_sq * beliefs.s_bar.real + v * mu) / denom
    var_s = np.clip(sigma_s_sq * v / denom, 0.0, sigma_s_sq)
    return s_hat, var_s


def damp(new, old, beta: float):
    if not 0 < beta <= 1:
        raise ValueError(f"damping factor must lie in (0, 1], got {beta}")
    new = np.asarray(new)
    old = np.asarray(old)
    if new.shape != old.shape:
        raise ValueError(f"shape mismatch: {new.shape} vs {old.shape}")
    if beta == 1:
        return new.copy()
    return beta * new + (1.0 - beta) * old


def _consensus(y_tilde, var_tilde, H, with_var=False):
    num = np.sum(np.conj(H) * y_tilde / var_tilde, axis=-2)
    den = np.sum(_abs2(H) / var_tilde, axis=-2)
    return (num / den, 1.0 / den) if with_var else num / den


def per_iteration_consensus_s(sic: SicGrids, H) -> np.ndarray:
    """Per-user computing estimate fused over all antennas (real part)."""
    return _consensus(sic.y_tilde_s, sic.var_tilde_s, H).real


def update_mean(s_hat_k) -> np.ndarray:
    return np.mean(s_hat_k, axis=-1)


def consensus_d(sic_final: SicGrids, H, with_var: bool = False):
    """Final per-user data estimate fused over all antennas; complex, unsliced.

    With ``with_var`` also returns the weighted least-squares error variance
    ``1 / sum_n |h_nk|^2 / var_tilde``.
    """
    return _consensus(sic_final.y_tilde_d, sic_final.var_tilde_d, H, with_var)


def _check_inputs(cfg: SystemConfig, y, H):
    y = np.asarray(y)
    H = np.asarray(H)
    if H.ndim < 2 or H.shape[-2:] != (cfg.N, cfg.K):
        raise ValueError(f"H must end in shape ({cfg.N}, {cfg.K}), got {H.shape}")
    if y.shape[-1] != cfg.N:
        raise ValueError(f"y must end in length {cfg.N}, got {y.shape}")
    batch = np.broadcast_shapes(y.shape[:-1], H.shape[:-2])
    return (np.broadcast_to(y, batch + (cfg.N,)).astype(np.complex128),
            np.broadcast_to(H, batch + (cfg.N, cfg.K)).astype(np.complex128), batch)


def run_detector(cfg: SystemConfig, y, H, *, s_known=None, trace: bool = False,
                 floor: float = VAR_FLOOR, observer=None) -> DetectionResult:
    """Run ``cfg.i_max`` iterations of joint detection and fuse the final estimates.

    Parameters
    ----------
    cfg : SystemConfig
    y : array, shape (..., N)
    H : array, shape (..., N, K)
    s_known : array, shape (..., K), optional
        Clamp the computing replicas to these values with zero variance for
        every iteration (genie-aided data detection).
    trace : bool
        Record ``(iteration, mean var_d, mean var_s, mu_s)`` after each iteration.
    observer : callable, optional
        Called as ``observer(iteration, sic, beliefs, state)`` after each
        iteration with that iteration's grids and the updated state.
    """
    y, H, batch = _check_inputs(cfg, y, H)
    state = init_state(cfg, batch)
    gain = _abs2(H)
    adaptive = cfg.mean_mode == "adaptive"
    genie = s_known is not None
    if genie:
        s_known = np.broadcast_to(np.asarray(s_known, dtype=np.float64), batch + (cfg.K,))
        state.s_hat = np.broadcast_to(s_known[..., None, :], state.s_hat.shape).copy()
        state.var_s = np.zeros_like(state.var_s)
        state.mu_s_est = update_mean(s_known)
    s_k = state.mu_s_est[..., None] * np.ones(cfg.K)
    rows = []
    sic = None
    for it in range(1, cfg.i_max + 1):
        sic = soft_ic(y, H, state, cfg.sigma_w_sq, floor, gain)
        beliefs = belief_generation(sic, H, floor, gain)

        d_den, _ = denoise_data(beliefs, cfg.e_d)
        d_hat = damp(d_den, state.d_hat, cfg.beta_d)
        var_d = damp(data_mse(d_hat, cfg.e_d), state.var_d, cfg.beta_d)

        if genie:
            s_hat, var_s, mu = state.s_hat, state.var_s, state.mu_s_est
            s_k = s_known
        else:
            prior_mean = state.mu_s_est if adaptive else 0.0
            s_den, var_s_den = denoise_computing(beliefs, cfg.sigma_s_sq, prior_mean)
            s_hat = damp(s_den, state.s_hat, cfg.beta_s)
            var_s = damp(var_s_den, state.var_s, cfg.beta_s)
            # the per-user fusion reads a residual rebuilt from this iteration's
            # replicas; the stale one still carries the user's own data symbol
            if adaptive or it == cfg.i_max:
                fresh = soft_ic(y, H, GabpState(d_hat, var_d, s_hat, var_s, state.mu_s_est),
                                cfg.sigma_w_sq, floor, gain)
                s_k = per_iteration_consensus_s(fresh, H)
            if adaptive:
                mu = damp(update_mean(s_k), state.mu_s_est, cfg.mean_damping)
            else:
                mu = np.zeros(batch)

        state = GabpState(d_hat, var_d, s_hat, var_s, mu, it)
        if observer is not None:
            observer(it, sic, beliefs, state)
        if trace:
            rows.append((it, float(np.mean(var_d)), float(np.mean(var_s)), float(np.mean(mu))))

    d_cons, d_cons_var = consensus_d(sic, H, with_var=True)
    return DetectionResult(
        d_hat_final=d_cons,
        d_hat_soft=qpsk_posterior_mean(d_cons, np.maximum(d_cons_var, floor), cfg.e_d),
        s_hat_final=np.array(s_k, dtype=np.float64),
        var_d_final=np.mean(state.var_d, axis=-2),
        mu_s_est=state.mu_s_est,
        sic_grids_final=sic,
        state=state,
        trace=rows,
    )
