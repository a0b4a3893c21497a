"""Independent verification and Monte-Carlo simulation of protocols.

Nothing here reuses the synthesis or majorization code paths: branch outputs
are recomputed with explicit Kronecker products on amplitude vectors and
majorization is re-derived by direct summation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, dagger, operator_norm, unitarity_error
from .states import BipartiteState
from .synthesis import Protocol

# four 64-bit words are drawn per trial: one per Philox counter block
_WORDS_PER_TRIAL = 4


@dataclass
class BranchCheck:
    index: int
    proportionality_error: float
    weight_error: float


@dataclass
class VerificationReport:
    completeness_error: float
    branch_errors: list[BranchCheck]
    measured_success_probability: float
    declared_probability: float
    operator_errors: dict[str, float] = field(default_factory=dict)
    tol: float = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        worst = [self.completeness_error,
                 abs(self.measured_success_probability - self.declared_probability)]
        worst += [b.proportionality_error for b in self.branch_errors]
        worst += [b.weight_error for b in self.branch_errors]
        worst += list(self.operator_errors.values())
        return all(np.isfinite(w) and w <= self.tol for w in worst)

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "completeness_error": self.completeness_error,
            "measured_success_probability": self.measured_success_probability,
            "declared_probability": self.declared_probability,
            "branches": [
                {"index": b.index, "proportionality_error": b.proportionality_error,
                 "weight_error": b.weight_error}
                for b in self.branch_errors
            ],
            "operator_errors": dict(self.operator_errors),
            "tol": self.tol,
        }


def _kron_apply(m_a: np.ndarray, m_b: np.ndarray, a: np.ndarray) -> np.ndarray:
    vec = np.kron(m_a, m_b) @ a.reshape(-1)
    return vec.reshape(m_a.shape[0], m_b.shape[0])


def _distance_to_ray(out: np.ndarray, target: np.ndarray) -> tuple[float, float]:
    """Distance from ``out`` to the complex line through ``target``, and ``|<target|out>|^2``.

    ``target`` is assumed normalized.
    """
    t, o = target.reshape(-1), out.reshape(-1)
    c = np.vdot(t, o)
    return float(np.linalg.norm(o - c * t)), float(abs(c) ** 2)


def oracle_protocol_apply(protocol: Protocol, a: BipartiteState) -> list[tuple[np.ndarray, float]]:
    """Stage-one branch outputs ``(M (x) U)|A>>`` and their weights, via Kronecker products."""
    out = []
    for el in protocol.stage1:
        s = _kron_apply(el.m, el.u, a.a)
        out.append((s, float(np.vdot(s, s).real)))
    return out


def oracle_majorization(x, y) -> dict[str, bool]:
    """Majorization relations by explicit loops over sorted, zero-padded lists."""
    x = sorted((max(float(v), 0.0) for v in x), reverse=True)
    y = sorted((max(float(v), 0.0) for v in y), reverse=True)
    n = max(len(x), len(y))
    x += [0.0] * (n - len(x))
    y += [0.0] * (n - len(y))
    tol = DEFAULT_TOL
    head_ok = True
    tail_ok = True
    for l in range(n):
        if sum(x[: l + 1]) > sum(y[: l + 1]) + tol:
            head_ok = False
        if sum(x[l:]) < sum(y[l:]) - tol:
            tail_ok = False
    equal_total = abs(sum(x) - sum(y)) <= tol
    return {"prec": head_ok and equal_total, "prec_sub": head_ok, "prec_super": tail_ok}


def verify(protocol: Protocol, a: BipartiteState, b: BipartiteState,
           tol: float = DEFAULT_TOL) -> VerificationReport:
    """Recompute completeness, branch outputs and success probability from scratch."""
    n_a = a.dim_a
    total = dagger(protocol.m0) @ protocol.m0
    ops: dict[str, float] = {}
    for i, el in enumerate(protocol.stage1, start=1):
        total = total + dagger(el.m) @ el.m
        ops[f"stage1[{i}].contraction"] = max(0.0, operator_norm(el.m) - 1.0)
        ops[f"stage1[{i}].unitarity"] = unitarity_error(el.u)
    completeness = operator_norm(total - np.eye(n_a))

    q = protocol.intermediate.a
    branches: list[BranchCheck] = []
    success = 0.0
    tail = protocol.stage2
    if tail is not None:
        ops["stage2.contraction"] = max(0.0, operator_norm(tail.n) - 1.0)
        ops["stage2.unitarity"] = unitarity_error(tail.v)
        d = tail.n.shape[1]
        ops["stage2.completeness"] = operator_norm(
            dagger(tail.n) @ tail.n + dagger(tail.n_fail) @ tail.n_fail - np.eye(d))

    for i, el in enumerate(protocol.stage1, start=1):
        out = _kron_apply(el.m, el.u, a.a)
        weight = float(np.vdot(out, out).real)
        if out.shape == q.shape:
            dist, _ = _distance_to_ray(out, q)
        else:
            dist = float("inf")
        branches.append(BranchCheck(i, dist, abs(weight - el.q)))
        if tail is None:
            if out.shape == b.a.shape:
                dist_b, overlap = _distance_to_ray(out, b.a)
                if dist_b <= tol:
                    success += overlap
        else:
            final = _kron_apply(tail.n, tail.v, out)
            if final.shape != b.a.shape:
                branches.append(BranchCheck(-i, float("inf"), 0.0))
                continue
            dist_b, overlap = _distance_to_ray(final, b.a)
            branches.append(BranchCheck(-i, dist_b, 0.0))
            success += overlap

    return VerificationReport(completeness, branches, success, protocol.probability, ops, tol)


@dataclass
class SimulationResult:
    trials: int
    seed: int
    outcome_counts: dict[int, int]
    success_count: int

    @property
    def empirical_p(self) -> float:
        return self.success_count / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "outcome_counts": {str(k): v for k, v in sorted(self.outcome_counts.items())},
            "success_count": self.success_count,
            "empirical_p": self.empirical_p,
        }


def _branch_table(protocol: Protocol, a: BipartiteState) -> tuple[np.ndarray, np.ndarray]:
    """Outcome probabilities (index 0 is the completion ``M_0``) and conditional success."""
    weights = [float(np.sum(np.abs(protocol.m0 @ a.a) ** 2))]
    cond = [0.0]
    for el in protocol.stage1:
        out = el.m @ a.a @ el.u.T
        w = float(np.sum(np.abs(out) ** 2))
        weights.append(w)
        if protocol.stage2 is None:
            cond.append(1.0)
        elif w > 0:
            fin = protocol.stage2.n @ (out / np.sqrt(w)) @ protocol.stage2.v.T
            cond.append(min(1.0, float(np.sum(np.abs(fin) ** 2))))
        else:
            cond.append(0.0)
    w = np.clip(np.array(weights), 0.0, None)
    w[w < 1e-15] = 0.0
    return w / w.sum(), np.array(cond)


def _uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Two uniforms per trial for trials ``start..stop-1``; trial ``i`` owns counter block ``i``."""
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(int(start))
    raw = bitgen.random_raw(_WORDS_PER_TRIAL * (stop - start)).reshape(-1, _WORDS_PER_TRIAL)
    return (raw[:, :2] >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def _run_block(probs, cond, seed, start, stop) -> tuple[np.ndarray, int]:
    u = _uniforms(seed, start, stop)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    outcome = np.searchsorted(cdf, u[:, 0], side="right")
    outcome = np.minimum(outcome, len(probs) - 1)
    ok = u[:, 1] < cond[outcome]
    return np.bincount(outcome, minlength=len(probs)), int(ok.sum())


def simulate(protocol: Protocol, a: BipartiteState, trials: int, seed: int,
             workers: int = 1) -> SimulationResult:
    """Sample measurement outcomes and stage-two success for ``trials`` runs.

    Randomness for trial ``i`` comes from Philox counter block ``i`` under key
    ``seed``, so the result does not depend on how trials are split among
    ``workers``.
    """
    probs, cond = _branch_table(protocol, a)
    workers = max(1, min(workers, trials or 1))
    edges = np.linspace(0, trials, workers + 1).astype(int)
    blocks = list(zip(edges[:-1], edges[1:]))
    if workers == 1:
        results = [_run_block(probs, cond, seed, s, e) for s, e in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda se: _run_block(probs, cond, seed, *se), blocks))
    counts = sum(r[0] for r in results)
    succ = sum(r[1] for r in results)
    return SimulationResult(
        trials=trials,
        seed=seed,
        outcome_counts={int(k): int(c) for k, c in enumerate(counts) if c},
        success_count=int(succ),
    )
