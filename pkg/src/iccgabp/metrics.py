"""BER / NMSE accounting and the genie-aided bounds."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .combiner import apply_combiner, compute_combiner
from .gabp import run_detector
from .system_model import SystemConfig, qpsk_demodulate


@dataclass
class TrialMetrics:
    """Summable per-trial (or per-block) error counts."""

    trials: int = 0
    bit_errors: int = 0
    bits_total: int = 0
    sq_err_f: float = 0.0
    f_true_sq: float = 0.0
    aux_sq_err_consensus: float = 0.0

    def __add__(self, other: "TrialMetrics") -> "TrialMetrics":
        return TrialMetrics(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else float("nan")

    @property
    def mse(self) -> float:
        return self.sq_err_f / self.trials if self.trials else float("nan")


def ber(tx_bits, d_hat_final):
    """(bit errors, bits compared) after sign slicing of the soft consensus."""
    rx_bits = qpsk_demodulate(d_hat_final)
    tx_bits = np.asarray(tx_bits)
    if rx_bits.shape != tx_bits.shape:
        raise ValueError(f"bit shape mismatch: {tx_bits.shape} vs {rx_bits.shape}")
    return int(np.count_nonzero(rx_bits != tx_bits)), int(tx_bits.size)


def nmse(f_true, f_hat, normalizer) -> float:
    if not normalizer > 0:
        raise ZeroDivisionError("NMSE normalizer must be positive")
    return float(np.mean((np.asarray(f_true) - np.asarray(f_hat)) ** 2) / normalizer)


def wilson_interval(errors: int, total: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion; (nan, nan) for total=0."""
    if total <= 0:
        return float("nan"), float("nan")
    p = errors / total
    denom = 1.0 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * np.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return float(max(0.0, centre - half)), float(min(1.0, centre + half))


def genie_data_bound(cfg: SystemConfig, y, H, s_true):
    """Detection with the computing signals revealed to the receiver."""
    return run_detector(cfg, y, H, s_known=s_true)


def genie_compute_bound(cfg: SystemConfig, y, H, d_true):
    """Combiner estimate of the sum with the data symbols revealed (Omega = 0)."""
    u = compute_combiner(H, cfg.sigma_s_sq, cfg.sigma_w_sq)
    return apply_combiner(u, y, H, d_true)
