"""Bipartite pure states represented by their coefficient matrices.

The state ``sum_ij a_ij |i>|j>`` is stored as the ``n x m`` matrix ``a``.
Local operators act by the push-through rule ``(A (x) B)|C>> = |A C B^T>>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import LOCCError, ShapeMismatch
from .linalg import SvdFactors

NORM_TOL = 1e-9
RANK_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class BipartiteState:
    a: np.ndarray

    def __post_init__(self):
        a = linalg.as_matrix(self.a)
        norm = linalg.frobenius_norm(a)
        if abs(norm - 1.0) > NORM_TOL:
            raise LOCCError(f"state is not normalized (norm {norm})")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def dim_a(self) -> int:
        return self.a.shape[0]

    @property
    def dim_b(self) -> int:
        return self.a.shape[1]

    def amplitudes(self) -> np.ndarray:
        """Row-major amplitude vector, inverse of :func:`from_amplitudes`."""
        return self.a.reshape(-1).copy()

    @classmethod
    def from_matrix(cls, a, normalize: bool = False) -> "BipartiteState":
        a = linalg.as_matrix(a)
        if normalize:
            norm = linalg.frobenius_norm(a)
            if norm == 0:
                raise LOCCError("zero matrix is not a state")
            a = a / norm
        return cls(a)

    @classmethod
    def from_schmidt(cls, coefficients, n: int | None = None, m: int | None = None) -> "BipartiteState":
        """Diagonal state with the given squared Schmidt coefficients."""
        c = np.asarray(coefficients, dtype=float)
        n = n or len(c)
        m = m or len(c)
        a = np.zeros((n, m), dtype=complex)
        k = min(len(c), n, m)
        a[np.arange(k), np.arange(k)] = np.sqrt(np.clip(c[:k], 0.0, None))
        return cls(a)


def from_amplitudes(v, n: int, m: int) -> tuple[BipartiteState, float]:
    """Reshape a row-major amplitude vector into a normalized state.

    Returns the state and the norm of ``v`` that was divided out.
    """
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != n * m:
        raise ShapeMismatch(f"expected {n * m} amplitudes, got {v.size}")
    norm = float(np.linalg.norm(v))
    if norm == 0:
        raise LOCCError("zero vector is not a state")
    return BipartiteState(v.reshape(n, m) / norm), norm


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    coefficients: np.ndarray  # squared Schmidt coefficients, nonincreasing
    local_a: np.ndarray
    local_b: np.ndarray
    rank: int

    @property
    def factors(self) -> SvdFactors:
        return SvdFactors(self.local_a, np.sqrt(self.coefficients), self.local_b)


def schmidt(s: BipartiteState) -> SchmidtForm:
    f = linalg.svd(s.a)
    coeffs = f.sigma ** 2
    return SchmidtForm(coeffs, f.x, f.y, int(np.count_nonzero(coeffs > RANK_EPS)))


def schmidt_coefficients(s: BipartiteState) -> np.ndarray:
    return schmidt(s).coefficients


def apply_local(m_a, m_b, s) -> tuple[np.ndarray, float]:
    """Apply ``m_a`` on Alice and ``m_b`` on Bob; return the unnormalized output and its weight."""
    a = s.a if isinstance(s, BipartiteState) else linalg.as_matrix(s)
    m_a, m_b = linalg.as_matrix(m_a), linalg.as_matrix(m_b)
    if m_a.shape[1] != a.shape[0] or m_b.shape[1] != a.shape[1]:
        raise ShapeMismatch(
            f"operators {m_a.shape} and {m_b.shape} do not act on a {a.shape} state"
        )
    out = m_a @ a @ m_b.T
    return out, float(np.sum(np.abs(out) ** 2))


def proportional(s1, s2, tol: float = NORM_TOL) -> tuple[bool, complex | None]:
    """Whether ``s1 = c * s2`` for a complex ``c``; returns ``(flag, c)``.

    ``c`` is read off the largest-magnitude entry of ``s2``; the residual
    ``|s1 - c s2|`` is judged relative to ``max(1, |s1|)``.
    """
    s1, s2 = np.asarray(s1, dtype=complex), np.asarray(s2, dtype=complex)
    if s1.shape != s2.shape:
        return False, None
    idx = np.unravel_index(np.argmax(np.abs(s2)), s2.shape)
    if abs(s2[idx]) == 0:
        ok = linalg.frobenius_norm(s1) <= tol
        return ok, (0j if ok else None)
    c = complex(s1[idx] / s2[idx])
    resid = float(np.linalg.norm(s1 - c * s2))
    if resid <= tol * max(1.0, float(np.linalg.norm(s1))):
        return True, c
    return False, None


def random_state(n: int, m: int, rng: np.random.Generator, rank: int | None = None) -> BipartiteState:
    """Random state of Schmidt rank ``rank`` (full rank by default)."""
    k = min(n, m) if rank is None else rank
    g = lambda r, c: rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))
    a = g(n, k) @ g(k, m)
    return BipartiteState(a / np.linalg.norm(a))


def state_with_spectrum(coefficients, n: int, m: int, rng: np.random.Generator) -> BipartiteState:
    """State with the given squared Schmidt coefficients in random local bases."""
    c = np.zeros(min(n, m))
    vals = np.asarray(coefficients, dtype=float)
    c[: len(vals)] = vals
    diag = linalg.pad_to(np.diag(np.sqrt(np.clip(c, 0, None))).astype(complex), n, m)
    a = linalg.random_unitary(n, rng) @ diag @ linalg.random_unitary(m, rng)
    return BipartiteState(a / np.linalg.norm(a))
