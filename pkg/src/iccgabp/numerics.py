"""Complex Gaussian sampling, seeded streams and Hermitian positive-definite solves."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import scipy.linalg


class InvalidParameterError(ValueError):
    """Raised when a distribution or solver parameter is out of range."""


class DecompositionError(np.linalg.LinAlgError):
    """Raised when a matrix that must be Hermitian positive definite is not."""


def rng_stream(seed: int, stream_id: int | Sequence[int] = ()) -> np.random.Generator:
    """Return an independent generator for ``(seed, stream_id)``.

    Identical arguments always produce identical sample sequences, and
    different stream ids give statistically independent streams, so trials
    can be drawn in any order or on any worker.
    """
    if isinstance(stream_id, (int, np.integer)):
        key = (int(stream_id),)
    else:
        key = tuple(int(k) for k in stream_id)
    if int(seed) < 0 or any(k < 0 for k in key):
        raise InvalidParameterError("seed and stream ids must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def sample_complex_gaussian(rng: np.random.Generator, n, mean: complex = 0.0,
                            variance: float = 1.0) -> np.ndarray:
    """Draw circularly-symmetric CN(mean, variance) samples.

    Real and imaginary parts are independent with variance ``variance / 2``.
    ``n`` may be an int or a shape tuple.
    """
    if variance < 0:
        raise InvalidParameterError(f"variance must be >= 0, got {variance}")
    scale = np.sqrt(variance / 2.0)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return mean + scale * z


def sample_real_gaussian(rng: np.random.Generator, n, mean: float = 0.0,
                         variance: float = 1.0) -> np.ndarray:
    if variance < 0:
        raise InvalidParameterError(f"variance must be >= 0, got {variance}")
    return mean + np.sqrt(variance) * rng.standard_normal(n)


def hermitian_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` for Hermitian positive-definite ``A`` via Cholesky.

    ``A`` may be a single ``(n, n)`` matrix or a stack ``(..., n, n)``; ``b``
    is then ``(..., n)``. No explicit inverse is formed.

    Raises
    ------
    DecompositionError
        If ``A`` (or any matrix of the stack) is not positive definite.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InvalidParameterError(f"A must be square, got shape {A.shape}")
    if b.shape[-1] != A.shape[-1]:
        raise InvalidParameterError(f"dimension mismatch: A {A.shape}, b {b.shape}")
    if A.ndim == 2:
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise InvalidParameterError("A and b must be finite")
        dtype = np.result_type(A, b, np.float64)
        potrf, potrs = scipy.linalg.get_lapack_funcs(("potrf", "potrs"), dtype=dtype)
        factor, info = potrf(A.astype(dtype, copy=False), lower=1)
        if info != 0:
            raise DecompositionError(f"matrix is not positive definite (potrf info={info})")
        x, info = potrs(factor, b.astype(dtype, copy=False), lower=1)
        if info != 0:
            raise DecompositionError(f"triangular solve failed (potrs info={info})")
        return x
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"matrix stack is not positive definite: {exc}") from None
    # numpy has no batched triangular solve; the LU of a triangular factor is itself.
    z = np.linalg.solve(L, b[..., None])
    return np.linalg.solve(np.conj(np.swapaxes(L, -1, -2)), z)[..., 0]
