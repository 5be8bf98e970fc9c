"""Dense matrix primitives: vectorization, the regression operator, nuclear
norm and singular value shrinkage."""

from typing import NamedTuple

import numpy as np

#: Singular values at or below ``RANK_RTOL * sigma_max`` are treated as zero.
RANK_RTOL = 1e-12


class ThinSvd(NamedTuple):
    """Rank-revealing thin SVD ``Q = U @ diag(s) @ V.T``.

    ``U`` is p x r, ``V`` is q x r and ``s`` holds the r strictly positive
    singular values in non-increasing order.
    """

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return self.s.shape[0]

    def reconstruct(self):
        return (self.U * self.s) @ self.V.T


def as_image(M, name="matrix"):
    """Validate ``M`` as a finite 2-D float array and return it as float64."""
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def vectorize(M):
    """Stack the columns of ``M`` into a vector (column-major order)."""
    return np.asarray(M, dtype=np.float64).reshape(-1, order="F")


def unvectorize(v, shape):
    """Inverse of :func:`vectorize` for an image of the given ``(p, q)``."""
    return np.asarray(v, dtype=np.float64).reshape(shape, order="F")


def apply_operator(dictionary, x):
    """Return ``x_1 A_1 + ... + x_n A_n`` for the dictionary regressors."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != dictionary.n_atoms:
        raise ValueError(
            f"coefficient vector has shape {x.shape}, "
            f"expected ({dictionary.n_atoms},)"
        )
    return unvectorize(dictionary.H @ x, dictionary.image_shape)


def thin_svd(Q):
    """Thin SVD of ``Q`` with numerically zero singular values dropped.

    Parameters
    ----------
    Q : array_like, shape (p, q)
        Finite input matrix.

    Returns
    -------
    ThinSvd
        Factors restricted to singular values above ``RANK_RTOL * sigma_max``.
        The zero matrix yields rank 0 with empty factors.
    """
    Q = as_image(Q, "Q")
    U, s, Vt = np.linalg.svd(Q, full_matrices=False)
    keep = s > RANK_RTOL * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    r = int(np.count_nonzero(keep))
    return ThinSvd(U[:, :r], s[:r], Vt[:r].T)


def nuclear_norm(Q):
    """Sum of the singular values of ``Q``; zero for the zero matrix."""
    Q = as_image(Q, "Q")
    s = np.linalg.svd(Q, compute_uv=False)
    if s[0] == 0:
        return 0.0
    return float(np.sum(s[s > RANK_RTOL * s[0]]))


def svt(Q, tau):
    r"""Singular value shrinkage operator.

    Computes :math:`U \operatorname{diag}(\max(0, \sigma_j - \tau)) V^T`, the
    minimizer of :math:`\tau \|Y\|_* + \frac{1}{2}\|Y - Q\|_F^2`.

    Parameters
    ----------
    Q : array_like, shape (p, q)
        Matrix to shrink.
    tau : float
        Non-negative threshold.

    Returns
    -------
    ndarray, shape (p, q)
    """
    if not tau >= 0:
        raise ValueError(f"threshold must be non-negative, got {tau!r}")
    Q = as_image(Q, "Q")
    if tau == 0:
        return Q.copy()
    dec = thin_svd(Q)
    s = np.maximum(dec.s - tau, 0.0)
    keep = s > 0
    return (dec.U[:, keep] * s[keep]) @ dec.V[:, keep].T
