"""Input checks for complex channel and received-signal arrays.

sklearn's ``check_array`` rejects complex input, so these cover the same
ground (finite, right rank, consistent sizes) for complex data.
"""

from __future__ import annotations

import numbers

import numpy as np


def check_channel(H, *, min_antennas: int = 2) -> np.ndarray:
    """Return ``H`` as complex128 of shape (N, K) or (n_frames, N, K)."""
    H = np.asarray(H)
    if H.ndim not in (2, 3):
        raise ValueError(f"expected a channel of shape (N, K) or (n_frames, N, K), got {H.shape}")
    if not np.issubdtype(H.dtype, np.number):
        raise TypeError(f"channel must be numeric, got dtype {H.dtype}")
    H = H.astype(np.complex128, copy=False)
    if not np.isfinite(H).all():
        raise ValueError("channel contains NaN or infinity")
    if H.shape[-2] < min_antennas:
        raise ValueError(f"need at least {min_antennas} receive antennas, got {H.shape[-2]}")
    if H.shape[-1] < 1:
        raise ValueError("need at least one user")
    return H


def check_received(Y, n_antennas: int) -> np.ndarray:
    """Return received vectors as complex128 of shape (n_samples, N); 1-D input is one sample."""
    Y = np.asarray(Y)
    if Y.ndim == 1:
        Y = Y[None, :]
    if Y.ndim != 2:
        raise ValueError(f"expected received vectors of shape (n_samples, N), got {Y.shape}")
    if Y.shape[1] != n_antennas:
        raise ValueError(f"received vectors have {Y.shape[1]} entries, channel has {n_antennas} antennas")
    Y = Y.astype(np.complex128, copy=False)
    if not np.isfinite(Y).all():
        raise ValueError("received signal contains NaN or infinity")
    return Y


def check_noise_var(noise_var) -> float:
    if not isinstance(noise_var, numbers.Real) or not np.isfinite(noise_var) or noise_var < 0:
        raise ValueError(f"noise_var must be a finite non-negative real, got {noise_var!r}")
    return float(noise_var)


def check_frames_match(H, Y):
    if H.ndim == 3 and H.shape[0] != Y.shape[0]:
        raise ValueError(f"{H.shape[0]} channel realisations for {Y.shape[0]} received vectors")
