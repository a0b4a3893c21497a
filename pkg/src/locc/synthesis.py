"""Construction of LOCC protocols between bipartite pure states.

A protocol has two stages.  Stage one is an instrument on Alice's side
``{M_lambda}`` with conditional unitaries ``U_lambda`` on Bob's side that
takes ``A`` deterministically to an intermediate state ``Q``.  Stage two is a
single contraction ``N`` on Alice's side with Bob unitary ``V`` that takes
``Q`` to ``B`` with probability ``p``; it is omitted for deterministic
conversions, in which case ``Q`` is ``B`` itself.

Bob's dimension is preserved by every step (his operations are unitary);
Alice's dimension may change from ``A`` to ``B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, majorization
from .errors import (
    InfeasibleTarget,
    NotAContraction,
    PreconditionError,
    RankViolation,
    ShapeMismatch,
)
from .linalg import DEFAULT_TOL, dagger
from .states import BipartiteState, apply_local, schmidt

# branches with smaller weight are dropped from the instrument
MIN_BRANCH_WEIGHT = 1e-12


@dataclass(frozen=True, eq=False)
class InstrumentElement:
    """One outcome: Alice's contraction ``m``, Bob's unitary ``u``, weight ``q``.

    ``w`` is the Alice-side mixing unitary of the random-unitary
    representation ``AA^H = sum q W^H QQ^H W``; it is only defined when ``A``
    and ``Q`` live on the same Alice space.
    """

    m: np.ndarray
    u: np.ndarray
    q: float
    w: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class PureTransform:
    m: np.ndarray
    u: np.ndarray
    p: float


@dataclass(frozen=True, eq=False)
class ProbabilisticTail:
    """Pure contraction ``n`` (with Bob unitary ``v``) plus its failure completion."""

    n: np.ndarray
    v: np.ndarray
    n_fail: np.ndarray
    p: float


@dataclass(frozen=True, eq=False)
class Protocol:
    stage1: tuple[InstrumentElement, ...]
    m0: np.ndarray
    intermediate: BipartiteState
    probability: float
    stage2: ProbabilisticTail | None = None

    @property
    def branch_count(self) -> int:
        return len(self.stage1)


@dataclass(frozen=True)
class Feasibility:
    deterministic: bool
    p_max: float
    rank_ok: bool
    spectrum_a: np.ndarray = field(repr=False)
    spectrum_b: np.ndarray = field(repr=False)


def _require_same_bob(a: BipartiteState, b: BipartiteState) -> None:
    if a.dim_b != b.dim_b:
        raise ShapeMismatch(
            f"Bob's dimension must match: {a.dim_b} vs {b.dim_b} (Bob acts unitarily)"
        )


def feasibility(a: BipartiteState, b: BipartiteState, tol: float = DEFAULT_TOL) -> Feasibility:
    sa, sb = schmidt(a), schmidt(b)
    x, y = sa.coefficients, sb.coefficients
    return Feasibility(
        deterministic=majorization.prec(x, y, tol),
        p_max=majorization.max_conversion_probability(x, y, tol),
        rank_ok=sa.rank >= sb.rank,
        spectrum_a=x,
        spectrum_b=y,
    )


def check_pure_necessary(a: BipartiteState, b: BipartiteState, p: float,
                         tol: float = DEFAULT_TOL) -> bool:
    """Necessary condition for a single-branch conversion with probability ``p``.

    ``p * sigma^2(B)`` must be submajorized by ``sigma^2(A)``.
    """
    x, y = schmidt(a).coefficients, schmidt(b).coefficients
    return majorization.prec_sub(p * y, x, tol)


def synth_pure(a: BipartiteState, b: BipartiteState, p: float,
               free_n: np.ndarray | None = None, u: np.ndarray | None = None,
               tol: float = DEFAULT_TOL) -> PureTransform:
    """Single-branch conversion ``M (x) U |A>> = sqrt(p) |B>>``.

    ``M = sqrt(p) B U^* A^+ + N (I - A A^+)``.  With the defaults ``N = 0``
    and ``U = Y_B^T Y_A^*`` this reduces to
    ``sqrt(p) X_B Sigma_B Sigma_A^+ X_A^H``, which is a contraction whenever
    ``p * Sigma_B^2 <= Sigma_A^2`` entrywise.

    Raises
    ------
    RankViolation
        If ``rank(A) < rank(B)``.
    NotAContraction
        If the chosen ``U`` and ``N`` give ``|M| > 1``.  Other choices may
        still succeed.
    """
    _require_same_bob(a, b)
    if not 0 < p <= 1:
        raise PreconditionError(f"probability must lie in (0, 1], got {p}")
    sa, sb = schmidt(a), schmidt(b)
    if sa.rank < sb.rank:
        raise RankViolation(f"rank(A) = {sa.rank} < rank(B) = {sb.rank}")
    if u is None:
        u = sb.local_b.T @ sa.local_b.conj()
    u = linalg.as_matrix(u)
    a_pinv = linalg.pinv(a.a)
    m = np.sqrt(p) * b.a @ u.conj() @ a_pinv
    if free_n is not None:
        m = m + linalg.as_matrix(free_n) @ (np.eye(a.dim_a) - a.a @ a_pinv)
    if not linalg.is_unitary(u, tol):
        raise PreconditionError("Bob's operator is not unitary")
    norm = linalg.operator_norm(m)
    if norm > 1 + tol:
        raise NotAContraction(f"|M| = {norm:.6g} > 1")
    out, _ = apply_local(m, u, a)
    err = linalg.frobenius_norm(out - np.sqrt(p) * b.a)
    if err > tol:
        raise PreconditionError(f"M A U^T differs from sqrt(p) B by {err:.3g}")
    return PureTransform(m, u, float(p))


def build_intermediate(a: BipartiteState, b: BipartiteState, p: float,
                       tol: float = DEFAULT_TOL) -> BipartiteState:
    """Diagonal state ``Q`` (shaped like ``A``) reachable deterministically from ``A``.

    Its spectrum dominates ``p * sigma^2(B)`` entrywise, so the remaining
    step ``Q -> B`` is a single contraction succeeding with probability ``p``.
    """
    x = schmidt(a).coefficients
    y = p * schmidt(b).coefficients
    if not majorization.prec_super(x, y, tol):
        raise InfeasibleTarget(f"p = {p} exceeds the maximal conversion probability")
    v = majorization.lemma1_intermediate(x, y, tol)
    k = min(a.dim_a, a.dim_b)
    if np.any(v[k:] > tol):
        raise RankViolation("target Schmidt rank exceeds what A supports")
    return BipartiteState.from_schmidt(v[:k] / v[:k].sum(), a.dim_a, a.dim_b)


def _extend_perm(perm: tuple[int, ...], size: int) -> np.ndarray:
    """Permutation matrix ``Pi = P^T`` on ``size`` coordinates (identity beyond ``perm``)."""
    full = list(perm) + list(range(len(perm), size))
    p = np.zeros((size, size), dtype=complex)
    p[np.arange(size), full] = 1.0
    return p.T


def synth_deterministic(a: BipartiteState, q_state: BipartiteState,
                        tol: float = DEFAULT_TOL) -> tuple[list[InstrumentElement], np.ndarray]:
    """Instrument converting ``A`` to ``Q`` with certainty.

    Finds a doubly stochastic ``D`` with ``sigma^2(A) = D sigma^2(Q)`` from a
    chain of T-transforms, splits it into permutations ``P_lambda`` with
    weights ``q_lambda``, and for each one sets

        U_lambda^* = Y_Q^H Pi_lambda Y_A,   M_lambda = sqrt(q_lambda) Q U_lambda^* A^+

    with ``Pi_lambda = P_lambda^T``.  When ``A`` and ``Q`` share Alice's
    space this equals the form ``Y_Q^H X_Q^H W_lambda X_A Y_A`` with
    ``W_lambda = X_Q Pi_lambda X_A^H``.  Returns the elements and the
    completion ``M_0 = I - A A^+``.
    """
    _require_same_bob(a, q_state)
    sa, sq = schmidt(a), schmidt(q_state)
    if sa.rank < sq.rank:
        raise RankViolation(f"rank(A) = {sa.rank} < rank(Q) = {sq.rank}")
    x, y = sa.coefficients, sq.coefficients
    if not majorization.prec(x, y, tol):
        raise PreconditionError("sigma^2(A) is not majorized by sigma^2(Q)")
    k = max(len(x), len(y))
    chain = majorization.t_transform_chain(x, y, tol)
    d = majorization.compose_bistochastic(chain, k)
    bvn = majorization.birkhoff_decompose(d)

    terms = [(w, perm) for w, perm in zip(bvn.weights, bvn.perms) if w >= MIN_BRANCH_WEIGHT]
    total = sum(w for w, _ in terms)

    a_pinv = linalg.pinv(a.a)
    m_dim = a.dim_b
    same_alice = a.dim_a == q_state.dim_a
    elements: list[InstrumentElement] = []
    for w, perm in terms:
        q = w / total
        u_conj = dagger(sq.local_b) @ _extend_perm(perm, m_dim) @ sa.local_b
        m = np.sqrt(q) * q_state.a @ u_conj @ a_pinv
        if not linalg.is_contraction(m, tol):
            raise NotAContraction(f"branch contraction has norm {linalg.operator_norm(m):.6g}")
        mix = None
        if same_alice:
            mix = sq.local_a @ _extend_perm(perm, a.dim_a) @ dagger(sa.local_a)
        elements.append(InstrumentElement(m, u_conj.conj(), float(q), mix))

    m0 = np.eye(a.dim_a) - a.a @ a_pinv
    return elements, m0


def synth_probabilistic_tail(q_state: BipartiteState, b: BipartiteState, p: float,
                             tol: float = DEFAULT_TOL) -> ProbabilisticTail:
    """Pure contraction taking ``Q`` to ``B`` with probability ``p``.

    ``N = sqrt(p) X_B Sigma_B Sigma_Q^+ X_Q^H`` and ``V^T = Y_Q^H Y_B``.  The
    failure operator is ``sqrt(I - N^H N)`` so the pair forms a complete
    measurement.
    """
    _require_same_bob(q_state, b)
    fq, fb = linalg.svd(q_state.a), linalg.svd(b.a)
    sq2, sb2 = majorization._aligned(fq.sigma ** 2, p * fb.sigma ** 2)
    if np.any(sq2 < sb2 - tol):
        raise PreconditionError("Sigma_Q^2 does not dominate p Sigma_B^2 entrywise")
    r = linalg.numerical_rank(fq.sigma)
    sigma_q_pinv = np.zeros((q_state.dim_b, q_state.dim_a), dtype=complex)
    sigma_q_pinv[np.arange(r), np.arange(r)] = 1.0 / fq.sigma[:r]
    n = np.sqrt(p) * fb.x @ fb.sigma_matrix() @ sigma_q_pinv @ dagger(fq.x)
    v = (dagger(fq.y) @ fb.y).T
    norm = linalg.operator_norm(n)
    if norm > 1 + tol:
        raise NotAContraction(f"|N| = {norm:.6g} > 1")
    n_fail = linalg.psd_sqrt(np.eye(q_state.dim_a) - dagger(n) @ n)
    out, _ = apply_local(n, v, q_state)
    err = linalg.frobenius_norm(out - np.sqrt(p) * b.a)
    if err > tol:
        raise PreconditionError(f"N Q V^T differs from sqrt(p) B by {err:.3g}")
    return ProbabilisticTail(n, v, n_fail, float(p))


def full_pipeline(a: BipartiteState, b: BipartiteState, p_target: float | None = None,
                  tol: float = DEFAULT_TOL) -> Protocol:
    """Complete protocol converting ``A`` to ``B`` with probability ``p_target``.

    ``p_target`` defaults to the maximal achievable probability.
    """
    _require_same_bob(a, b)
    feas = feasibility(a, b, tol)
    if not feas.rank_ok or feas.p_max <= 0:
        raise RankViolation("rank(A) < rank(B): conversion impossible")
    p = feas.p_max if p_target is None else float(p_target)
    if not 0 < p <= 1:
        raise PreconditionError(f"target probability must lie in (0, 1], got {p}")
    if p > feas.p_max + tol:
        raise InfeasibleTarget(f"p = {p} exceeds p_max = {feas.p_max}")
    p = min(p, feas.p_max)

    if p == 1.0:
        stage1, m0 = synth_deterministic(a, b, tol)
        return Protocol(tuple(stage1), m0, b, 1.0, None)

    q_state = build_intermediate(a, b, p, tol)
    stage1, m0 = synth_deterministic(a, q_state, tol)
    tail = synth_probabilistic_tail(q_state, b, p, tol)
    return Protocol(tuple(stage1), m0, q_state, p, tail)


def lo_popescu(m_bob, psi, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Move a contraction on Bob's side to Alice's side plus a Bob unitary.

    Returns ``(N, U)`` with ``(I (x) M)|Psi>> = (N (x) U)|Psi>>``, i.e.
    ``Psi M^T = N Psi U^T``, where ``N = K_{M Psi^T} M K_Psi`` and
    ``U = K_{M Psi^T}^H K_Psi^H``.  Non-square inputs are zero-padded to a
    common dimension ``d``; both returned operators are ``d x d`` and act on
    the local spaces embedded in ``C^d``.
    """
    m = linalg.as_matrix(m_bob)
    s = psi.a if isinstance(psi, BipartiteState) else linalg.as_matrix(psi)
    if m.shape[1] != s.shape[1]:
        raise ShapeMismatch(f"Bob operator {m.shape} does not act on a {s.shape} state")
    if not linalg.is_contraction(m, tol):
        raise NotAContraction(f"|M| = {linalg.operator_norm(m):.6g} > 1")
    d = max(s.shape[0], s.shape[1], m.shape[0])
    mp, sp = linalg.pad_to(m, d, d), linalg.pad_to(s, d, d)
    k_psi = linalg.transposition_unitary(sp)
    k_mpsi = linalg.transposition_unitary(mp @ sp.T)
    n = k_mpsi @ mp @ k_psi
    u = dagger(k_mpsi) @ dagger(k_psi)
    err = linalg.frobenius_norm(sp @ mp.T - n @ sp @ u.T)
    if err > tol * max(1.0, linalg.frobenius_norm(s)):
        raise PreconditionError(f"Lo-Popescu identity violated by {err:.3g}")
    return n, u
