"""Dense complex linear algebra used throughout the package.

All matrices are ``numpy.ndarray`` objects of dtype ``complex128``.  The SVD
convention is ``m = x @ diag(sigma) @ y`` with unitary ``x`` and ``y`` and
``sigma`` nonincreasing, i.e. ``y`` is the right factor itself and not its
adjoint.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import LOCCError, SVDConvergenceError, ShapeMismatch

DEFAULT_TOL = 1e-9
# singular values below this fraction of the largest are treated as zero
RCOND = 1e-12


class SvdFactors(NamedTuple):
    x: np.ndarray
    sigma: np.ndarray
    y: np.ndarray

    def sigma_matrix(self) -> np.ndarray:
        """The rectangular diagonal matrix with ``sigma`` on its diagonal."""
        out = np.zeros((self.x.shape[0], self.y.shape[0]), dtype=complex)
        k = len(self.sigma)
        out[np.arange(k), np.arange(k)] = self.sigma
        return out

    def reconstruct(self) -> np.ndarray:
        return self.x @ self.sigma_matrix() @ self.y


def as_matrix(m) -> np.ndarray:
    """Validate and convert ``m`` to a 2-d finite complex array."""
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatch(f"expected a non-empty 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LOCCError("matrix has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def svd(m) -> SvdFactors:
    """Full singular value decomposition ``m = x @ diag(sigma) @ y``.

    Backed by LAPACK (``gesdd``), which is deterministic for a fixed input and
    already returns the right factor in the convention used here.
    """
    m = as_matrix(m)
    try:
        x, sigma, y = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise SVDConvergenceError(str(exc)) from exc
    return SvdFactors(x, np.clip(sigma, 0.0, None), y)


def numerical_rank(sigma: np.ndarray, rcond: float = RCOND) -> int:
    if len(sigma) == 0 or sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma > rcond * sigma[0]))


def pinv(m, rcond: float = RCOND) -> np.ndarray:
    """Moore-Penrose pseudoinverse ``y^H diag(1/sigma) x^H``.

    Singular values at or below ``rcond * sigma_max`` are inverted to zero.
    """
    f = svd(m)
    r = numerical_rank(f.sigma, rcond)
    inv = np.zeros((f.y.shape[0], f.x.shape[0]), dtype=complex)
    inv[np.arange(r), np.arange(r)] = 1.0 / f.sigma[:r]
    return dagger(f.y) @ inv @ dagger(f.x)


def range_projector(m, rcond: float = RCOND) -> np.ndarray:
    """Orthogonal projector onto the range of ``m`` (``m @ pinv(m)``)."""
    f = svd(m)
    r = numerical_rank(f.sigma, rcond)
    cols = f.x[:, :r]
    return cols @ dagger(cols)


def transposition_unitary(m) -> np.ndarray:
    """Unitary ``k`` with ``k @ m @ k.conj() == m.T`` for square ``m``.

    With ``m = x s y`` one has ``m.T = y.T s x.T = (y.T x^H) m (y.T x^H)^*``,
    so ``k = y.T @ x^H``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"transposition unitary needs a square matrix, got {m.shape}")
    f = svd(m)
    return f.y.T @ dagger(f.x)


def polar(m) -> tuple[np.ndarray, np.ndarray]:
    """Left polar decomposition ``m = positive @ unitary``.

    ``positive = sqrt(m m^H)``; on the kernel the unitary is completed by the
    SVD factors, which is one valid arbitrary choice.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"polar decomposition needs a square matrix, got {m.shape}")
    f = svd(m)
    positive = f.x @ np.diag(f.sigma).astype(complex) @ dagger(f.x)
    return f.x @ f.y, positive


def psd_sqrt(h: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Small negative eigenvalues from round-off are clamped to zero.
    """
    h = 0.5 * (h + dagger(h))
    w, v = np.linalg.eigh(h)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def operator_norm(m) -> float:
    return float(svd(m).sigma[0])


def frobenius_norm(m) -> float:
    m = as_matrix(m)
    return float(np.sqrt(np.sum(np.abs(m) ** 2)))


def is_contraction(m, tol: float = DEFAULT_TOL) -> bool:
    return operator_norm(m) <= 1.0 + tol


def unitarity_error(m) -> float:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return operator_norm(dagger(m) @ m - np.eye(m.shape[0]))


def is_unitary(m, tol: float = DEFAULT_TOL) -> bool:
    return unitarity_error(m) <= tol


def pad_to(m: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Embed ``m`` in the top-left corner of a zero ``rows x cols`` matrix."""
    out = np.zeros((rows, cols), dtype=complex)
    out[: m.shape[0], : m.shape[1]] = m
    return out


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
