"""Majorization relations between spectra and the constructions built on them.

Vectors are handled as 1-d float arrays.  Every relation zero-pads the shorter
argument and sorts both in nonincreasing order first, so callers need not
pre-sort.  Index conventions are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotDoublyStochastic, PreconditionError

TOL = 1e-9
# entries of a residual doubly stochastic matrix at or below this are zero
SUPPORT_EPS = 1e-13


def spectrum(values) -> np.ndarray:
    """Clamp tiny negatives to zero and sort nonincreasing."""
    v = np.asarray(values, dtype=float).ravel()
    if np.any(v < -1e-12):
        raise PreconditionError(f"spectrum has negative entries: {v}")
    return np.sort(np.clip(v, 0.0, None))[::-1]


def _aligned(x, y) -> tuple[np.ndarray, np.ndarray]:
    x, y = spectrum(x), spectrum(y)
    n = max(len(x), len(y))
    return np.pad(x, (0, n - len(x))), np.pad(y, (0, n - len(y)))


def _tails(v: np.ndarray) -> np.ndarray:
    # tails[l] = sum(v[l:])
    return np.cumsum(v[::-1])[::-1]


def prec(x, y, tol: float = TOL) -> bool:
    """``x`` is majorized by ``y``."""
    x, y = _aligned(x, y)
    cx, cy = np.cumsum(x), np.cumsum(y)
    return bool(np.all(cx <= cy + tol) and abs(cx[-1] - cy[-1]) <= tol)


def prec_super(x, y, tol: float = TOL) -> bool:
    """``x`` is supermajorized by ``y``: every tail sum of x dominates y's."""
    x, y = _aligned(x, y)
    return bool(np.all(_tails(x) >= _tails(y) - tol))


def prec_sub(x, y, tol: float = TOL) -> bool:
    """``x`` is submajorized by ``y``: every head sum of x is at most y's."""
    x, y = _aligned(x, y)
    return bool(np.all(np.cumsum(x) <= np.cumsum(y) + tol))


def lemma1_intermediate(x, y, tol: float = TOL) -> np.ndarray:
    """Vector ``v >= y`` (componentwise) with ``x`` majorized by ``v``.

    Requires ``x`` supermajorized by ``y``.  The construction raises the
    leading entry of ``y`` by the mass deficit ``sum(x) - sum(y)``.
    """
    x, y = _aligned(x, y)
    if not prec_super(x, y, tol):
        raise PreconditionError("x is not supermajorized by y")
    v = y.copy()
    v[0] += x.sum() - y.sum()
    return v


@dataclass(frozen=True)
class TTransform:
    """Doubly stochastic mix of coordinates ``i < j`` with weight ``t``.

    Maps ``(v_i, v_j)`` to ``(t v_i + (1-t) v_j, (1-t) v_i + t v_j)``.
    """

    i: int
    j: int
    t: float

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = np.array(v, dtype=float)
        a, b = out[self.i], out[self.j]
        out[self.i] = self.t * a + (1 - self.t) * b
        out[self.j] = (1 - self.t) * a + self.t * b
        return out

    def matrix(self, n: int) -> np.ndarray:
        m = np.eye(n)
        m[self.i, self.i] = m[self.j, self.j] = self.t
        m[self.i, self.j] = m[self.j, self.i] = 1 - self.t
        return m


def t_transform_chain(x, y, tol: float = TOL) -> list[TTransform]:
    """T-transforms that carry ``y`` onto ``x`` when ``x`` is majorized by ``y``.

    Hardy-Littlewood-Polya construction: take the last index ``j`` where
    ``y`` exceeds ``x`` and the first later index ``k`` where it falls short,
    then move ``min(y_j - x_j, x_k - y_k)`` of mass from ``j`` to ``k``.  Each
    step matches at least one more coordinate and keeps ``y`` sorted, so at
    most ``n - 1`` transforms are produced.
    """
    x, y = _aligned(x, y)
    if not prec(x, y, tol):
        raise PreconditionError("x is not majorized by y")
    n = len(x)
    y = y.copy()
    # equality threshold for individual coordinates
    eps = 1e-15 * max(1.0, float(np.max(np.abs(y))))
    chain: list[TTransform] = []
    for _ in range(n):
        diff = y - x
        above = np.nonzero(diff > eps)[0]
        if len(above) == 0:
            break
        j = int(above[-1])
        below = np.nonzero(diff[j + 1:] < -eps)[0]
        if len(below) == 0:
            break
        k = j + 1 + int(below[0])
        delta = min(y[j] - x[j], x[k] - y[k])
        t = 1.0 - delta / (y[j] - y[k])
        step = TTransform(j, k, float(t))
        y = step.apply(y)
        # pin the matched coordinate to remove round-off drift
        if y[j] - x[j] <= x[k] - y[k] + eps:
            y[j] = x[j]
        else:
            y[k] = x[k]
        chain.append(step)
    return chain


def compose_bistochastic(chain: list[TTransform], n: int) -> np.ndarray:
    """Matrix ``D`` with ``D @ y`` equal to applying ``chain`` to ``y`` in order."""
    d = np.eye(n)
    for step in chain:
        d = step.matrix(n) @ d
    return d


def is_doubly_stochastic(d: np.ndarray, tol: float = TOL) -> bool:
    d = np.asarray(d)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        return False
    if np.iscomplexobj(d):
        if np.max(np.abs(d.imag), initial=0.0) > tol:
            return False
        d = d.real
    return bool(
        np.all(d >= -tol)
        and np.allclose(d.sum(axis=0), 1.0, rtol=0, atol=tol)
        and np.allclose(d.sum(axis=1), 1.0, rtol=0, atol=tol)
    )


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """Convex combination ``sum(w * P)`` of permutation matrices.

    Each permutation is stored as an index array ``perm`` meaning
    ``P[r, perm[r]] = 1``.
    """

    weights: tuple[float, ...]
    perms: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.weights)

    @staticmethod
    def perm_matrix(perm) -> np.ndarray:
        n = len(perm)
        p = np.zeros((n, n))
        p[np.arange(n), list(perm)] = 1.0
        return p

    def matrix(self) -> np.ndarray:
        n = len(self.perms[0])
        out = np.zeros((n, n))
        for w, perm in zip(self.weights, self.perms):
            out[np.arange(n), list(perm)] += w
        return out


def _perfect_matching(support: np.ndarray) -> list[int] | None:
    """Row-to-column perfect matching on a boolean support (Kuhn's algorithm)."""
    n = support.shape[0]
    match_col = [-1] * n  # column -> row

    def augment(r: int, seen: list[bool]) -> bool:
        for c in np.nonzero(support[r])[0]:
            if seen[c]:
                continue
            seen[c] = True
            if match_col[c] < 0 or augment(match_col[c], seen):
                match_col[c] = r
                return True
        return False

    for r in range(n):
        if not augment(r, [False] * n):
            return None
    perm = [0] * n
    for c, r in enumerate(match_col):
        perm[r] = c
    return perm


def birkhoff_decompose(d, tol: float = TOL) -> BirkhoffDecomposition:
    """Greedy Birkhoff-von Neumann decomposition of a doubly stochastic matrix.

    Repeatedly finds a permutation inside the positive support, subtracts its
    minimum entry along the permutation and zeroes that entry.  Every step
    drops to a lower-dimensional face of the Birkhoff polytope, so at most
    ``(n-1)**2 + 1`` terms are produced.
    """
    if not is_doubly_stochastic(d, tol):
        raise NotDoublyStochastic("input is not doubly stochastic")
    r = np.array(np.real(d), dtype=float)
    r[r < SUPPORT_EPS] = 0.0
    n = r.shape[0]
    rows = np.arange(n)
    weights: list[float] = []
    perms: list[tuple[int, ...]] = []
    remaining = 1.0
    while remaining > SUPPORT_EPS and len(weights) < n * n:
        perm = _perfect_matching(r > 0)
        if perm is None:
            if r.max(initial=0.0) <= tol:
                break
            raise NotDoublyStochastic("no perfect matching on the positive support")
        vals = r[rows, perm]
        w = float(vals.min())
        r[rows, perm] -= w
        r[rows[vals == w], np.asarray(perm)[vals == w]] = 0.0
        r[r < SUPPORT_EPS] = 0.0
        weights.append(w)
        perms.append(tuple(int(c) for c in perm))
        remaining -= w
    return BirkhoffDecomposition(tuple(weights), tuple(perms))


def max_conversion_probability(xa, xb, tol: float = TOL) -> float:
    """Largest ``p`` for which ``xa`` is supermajorized by ``p * xb``.

    Both arguments must be normalized spectra.  This is the minimum over ``l``
    of ``tail_l(xa) / tail_l(xb)``; tails where both vanish impose nothing.
    """
    xa, xb = _aligned(xa, xb)
    for v, name in ((xa, "xa"), (xb, "xb")):
        if abs(v.sum() - 1.0) > tol:
            raise PreconditionError(f"{name} is not normalized (sum {v.sum()})")
    if prec(xa, xb, tol):
        return 1.0
    zero = 1e-12
    if np.count_nonzero(xa > zero) < np.count_nonzero(xb > zero):
        return 0.0
    ta, tb = _tails(xa), _tails(xb)
    ratios = [a / b for a, b in zip(ta, tb) if b > zero]
    return float(np.clip(min(ratios + [1.0]), 0.0, 1.0))
