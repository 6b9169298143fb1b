"""scikit-learn style front end for the joint receiver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .combiner import combine_sum
from .gabp import VAR_FLOOR, run_detector
from .system_model import SystemConfig, qpsk_demodulate
from .validation import check_channel, check_frames_match, check_noise_var, check_received


class JointIccReceiver(TransformerMixin, BaseEstimator):
    """Joint QPSK detector and over-the-air sum estimator.

    ``fit`` binds the channel state information (``H`` and the noise
    variance); it learns nothing from data. ``H`` is either one (N, K) matrix
    shared by every received vector or a stack (n_frames, N, K) with one
    realisation per row of ``Y``.

    Parameters
    ----------
    e_d : float
        QPSK constellation power; ``e_d + sigma_s_sq`` must be 1.
    sigma_s_sq : float
        Variance of each user's computing signal.
    beta_d, beta_s : float
        Damping factors of the data and computing branches.
    i_max : int
        Number of message-passing iterations.
    mean_mode : {"adaptive", "known-zero"}
        Estimate the computing-signal mean on the fly, or assume it is zero.
    beta_mu : float or None
        Damping of the running mean estimate; ``None`` uses ``beta_s``.
    var_floor : float
        Lower bound applied to every variance used as a denominator.

    Examples
    --------
    >>> rx = JointIccReceiver().fit(H, noise_var=0.1)   # doctest: +SKIP
    >>> bits = rx.predict(Y)                             # doctest: +SKIP
    >>> sums = rx.predict_function(Y)                    # doctest: +SKIP
    """

    def __init__(self, e_d=0.99, sigma_s_sq=0.01, beta_d=0.5, beta_s=0.8, i_max=30,
                 mean_mode="adaptive", beta_mu=None, var_floor=VAR_FLOOR):
        self.e_d = e_d
        self.sigma_s_sq = sigma_s_sq
        self.beta_d = beta_d
        self.beta_s = beta_s
        self.i_max = i_max
        self.mean_mode = mean_mode
        self.beta_mu = beta_mu
        self.var_floor = var_floor

    def fit(self, H, y=None, *, noise_var):
        H = check_channel(H)
        self.noise_var_ = check_noise_var(noise_var)
        self.channel_ = H
        self.n_antennas_, self.n_users_ = H.shape[-2:]
        self.config_ = SystemConfig(
            N=self.n_antennas_, K=self.n_users_, e_d=self.e_d, sigma_s_sq=self.sigma_s_sq,
            sigma_w_sq=self.noise_var_, beta_d=self.beta_d, beta_s=self.beta_s,
            i_max=self.i_max, mean_mode=self.mean_mode, beta_mu=self.beta_mu)
        return self

    def _prepare(self, Y):
        check_is_fitted(self, "channel_")
        Y = check_received(Y, self.n_antennas_)
        check_frames_match(self.channel_, Y)
        return Y

    def detect(self, Y):
        """Full :class:`~iccgabp.gabp.DetectionResult` for each row of ``Y``."""
        Y = self._prepare(Y)
        return run_detector(self.config_, Y, self.channel_, floor=self.var_floor)

    def transform(self, Y):
        """Soft consensus data estimates, shape (n_samples, K)."""
        return self.detect(Y).d_hat_final

    def predict(self, Y):
        """Hard-decided bits, shape (n_samples, 2K)."""
        return qpsk_demodulate(self.transform(Y))

    def predict_function(self, Y):
        """Estimated sum of the users' computing signals, shape (n_samples,)."""
        Y = self._prepare(Y)
        result = run_detector(self.config_, Y, self.channel_, floor=self.var_floor)
        return combine_sum(self.config_, Y, self.channel_, result)

    def score(self, Y, bits):
        """Fraction of correctly detected bits."""
        return float(np.mean(self.predict(Y) == np.asarray(bits)))
