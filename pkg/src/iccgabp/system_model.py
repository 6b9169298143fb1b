"""Uplink SIMO model: Rayleigh channels, QPSK data plus Gaussian computing signals."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .numerics import sample_complex_gaussian, sample_real_gaussian

MEAN_MODES = ("adaptive", "known-zero")


class ConfigError(ValueError):
    """A configuration value violates one of the model invariants."""


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions, power split, noise level and detector parameters of one scenario.

    Total transmit power per user is normalised to one, split between the QPSK
    data part (``e_d``) and the Gaussian computing part (``sigma_s_sq``).
    """

    N: int = 10
    K: int = 2
    e_d: float = 0.99
    sigma_s_sq: float = 0.01
    mu_s: float = 0.0
    sigma_w_sq: float = 0.1
    sigma_h_sq: float = 1.0
    beta_d: float = 0.5
    beta_s: float = 0.8
    i_max: int = 30
    mean_mode: str = "adaptive"
    # damping of the running computing-mean estimate; None reuses beta_s, 1 leaves it undamped
    beta_mu: float | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError(f"N >= 2 required (extrinsic sums exclude one antenna), got N={self.N}")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError(f"K >= 1 required, got K={self.K}")
        if self.e_d < 0 or self.sigma_s_sq < 0:
            raise ConfigError("e_d and sigma_s_sq must be non-negative")
        if abs(self.e_d + self.sigma_s_sq - 1.0) > 1e-12:
            raise ConfigError(
                f"e_d + sigma_s_sq must equal 1 (total transmit power), got {self.e_d + self.sigma_s_sq!r}")
        if self.sigma_w_sq < 0 or self.sigma_h_sq < 0:
            raise ConfigError("sigma_w_sq and sigma_h_sq must be non-negative")
        if not (0 < self.beta_d <= 1) or not (0 < self.beta_s <= 1):
            raise ConfigError(f"damping factors must lie in (0, 1], got beta_d={self.beta_d}, beta_s={self.beta_s}")
        if self.beta_mu is not None and not (0 < self.beta_mu <= 1):
            raise ConfigError(f"beta_mu must lie in (0, 1], got {self.beta_mu}")
        if int(self.i_max) != self.i_max or self.i_max < 1:
            raise ConfigError(f"i_max >= 1 required, got {self.i_max}")
        if self.mean_mode not in MEAN_MODES:
            raise ConfigError(f"mean_mode must be one of {MEAN_MODES}, got {self.mean_mode!r}")
        if not np.isfinite([self.e_d, self.sigma_s_sq, self.mu_s, self.sigma_w_sq, self.sigma_h_sq]).all():
            raise ConfigError("all powers and variances must be finite")

    @property
    def c_d(self) -> float:
        """Magnitude of the real and imaginary parts of a QPSK symbol."""
        return float(np.sqrt(self.e_d / 2.0))

    @property
    def mean_damping(self) -> float:
        return self.beta_s if self.beta_mu is None else self.beta_mu

    @property
    def snr_db(self) -> float:
        if self.sigma_w_sq == 0:
            return float("inf")
        return float(10.0 * np.log10(1.0 / self.sigma_w_sq))

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def with_snr_db(self, snr_db: float) -> "SystemConfig":
        # unit transmit power, so SNR = 1 / noise variance
        return self.replace(sigma_w_sq=float(10.0 ** (-snr_db / 10.0)))


@dataclass
class TransmitFrame:
    bits: np.ndarray  # (..., 2K) uint8
    d: np.ndarray  # (..., K) complex QPSK symbols
    s: np.ndarray  # (..., K) real computing signals

    @property
    def x(self) -> np.ndarray:
        # identity pre-processing for the arithmetic sum
        return self.d + self.s


def generate_channel(cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """N x K matrix of i.i.d. CN(0, sigma_h_sq) fading coefficients."""
    return sample_complex_gaussian(rng, (cfg.N, cfg.K), 0.0, cfg.sigma_h_sq)


def qpsk_modulate(bits, e_d: float) -> np.ndarray:
    """Gray-mapped QPSK: bit pair (b0, b1) -> c_d * ((1 - 2 b0) + j (1 - 2 b1)).

    The last axis of ``bits`` holds the bit stream and must have even length.
    """
    bits = np.asarray(bits)
    if bits.shape[-1] % 2:
        raise ValueError(f"QPSK needs an even number of bits, got {bits.shape[-1]}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    c_d = np.sqrt(e_d / 2.0)
    b = bits.astype(np.float64)
    return c_d * ((1.0 - 2.0 * b[..., 0::2]) + 1j * (1.0 - 2.0 * b[..., 1::2]))


def qpsk_demodulate(symbols) -> np.ndarray:
    """Hard sign slicing; a zero component decides bit 0."""
    symbols = np.asarray(symbols)
    out = np.empty(symbols.shape[:-1] + (2 * symbols.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = symbols.real < 0
    out[..., 1::2] = symbols.imag < 0
    return out


def generate_frame(cfg: SystemConfig, rng: np.random.Generator) -> TransmitFrame:
    bits = rng.integers(0, 2, size=2 * cfg.K, dtype=np.uint8)
    d = qpsk_modulate(bits, cfg.e_d)
    s = sample_real_gaussian(rng, cfg.K, cfg.mu_s, cfg.sigma_s_sq)
    return TransmitFrame(bits=bits, d=d, s=s)


def transmit(cfg: SystemConfig, H, frame_or_x, rng: np.random.Generator) -> np.ndarray:
    """Received vector ``y = H x + w`` with ``w ~ CN(0, sigma_w_sq I_N)``."""
    H = np.asarray(H)
    x = frame_or_x.x if isinstance(frame_or_x, TransmitFrame) else np.asarray(frame_or_x)
    if H.shape[-1] != x.shape[-1]:
        raise ValueError(f"dimension mismatch: H {H.shape}, x {x.shape}")
    w = sample_complex_gaussian(rng, H.shape[:-1], 0.0, cfg.sigma_w_sq)
    return np.einsum("...nk,...k->...n", H, x) + w


def target_function(s) -> float:
    """Arithmetic sum of the computing signals (last axis)."""
    return np.sum(np.asarray(s, dtype=np.float64), axis=-1)
