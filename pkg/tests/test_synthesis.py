import numpy as np
import pytest

from locc import linalg
from locc.errors import InfeasibleTarget, NotAContraction, PreconditionError, RankViolation
from locc.states import (
    BipartiteState,
    apply_local,
    proportional,
    random_state,
    schmidt,
    state_with_spectrum,
)
from locc.synthesis import (
    build_intermediate,
    check_pure_necessary,
    feasibility,
    full_pipeline,
    lo_popescu,
    synth_deterministic,
    synth_probabilistic_tail,
    synth_pure,
)

from conftest import random_contraction, random_majorized_pair

S = BipartiteState.from_schmidt
product = S([1.0, 0.0])
bell3 = S([1 / 3] * 3)


def sv(m):
    return linalg.svd(m).sigma


def test_feasibility_examples(bell, skewed):
    f = feasibility(bell, bell)
    assert f.deterministic and f.p_max == 1.0 and f.rank_ok
    f = feasibility(bell, skewed)
    assert f.deterministic and f.p_max == 1.0
    f = feasibility(skewed, bell)
    assert not f.deterministic
    assert f.p_max == pytest.approx(0.4, abs=1e-12)
    f = feasibility(product, bell)
    assert not f.rank_ok and f.p_max == 0.0


def test_deterministic_both_ways_iff_equal_spectra(rng):
    for _ in range(100):
        a = random_state(3, 3, rng)
        b = state_with_spectrum(schmidt(a).coefficients, 3, 3, rng)
        assert feasibility(a, b).deterministic and feasibility(b, a).deterministic
        c = random_state(3, 3, rng)
        both = feasibility(a, c).deterministic and feasibility(c, a).deterministic
        assert not both


def test_synth_pure_identity(rng):
    a = random_state(3, 3, rng)
    t = synth_pure(a, a, 1.0)
    assert linalg.is_unitary(t.m, 1e-9)
    out, w = apply_local(t.m, t.u, a)
    np.testing.assert_allclose(out, a.a, atol=1e-9)


def test_synth_pure_skewed_to_bell(skewed, bell):
    t = synth_pure(skewed, bell, 0.4)
    np.testing.assert_allclose(sv(t.m), [1.0, 0.5], atol=1e-12)
    assert linalg.operator_norm(t.m) == pytest.approx(1.0)
    out, w = apply_local(t.m, t.u, skewed)
    assert w == pytest.approx(0.4)
    np.testing.assert_allclose(out, np.sqrt(0.4) * bell.a, atol=1e-12)


def test_synth_pure_bell_to_product_fails(bell):
    with pytest.raises(NotAContraction):
        synth_pure(bell, product, 1.0)
    assert not check_pure_necessary(bell, product, 1.0)


def test_synth_pure_rank_violation(bell):
    with pytest.raises(RankViolation):
        synth_pure(product, bell, 0.1)


def test_synth_pure_with_free_operator(rng):
    # a rank-deficient source leaves room for N on the complement of its range
    a = random_state(3, 3, rng, rank=2)
    b = state_with_spectrum([0.9, 0.1], 3, 3, rng)
    p = 0.05
    base = synth_pure(a, b, p)
    n = 0.1 * random_contraction(rng, 3, 3)
    t = synth_pure(a, b, p, free_n=n, u=base.u)
    out, _ = apply_local(t.m, t.u, a)
    np.testing.assert_allclose(out, np.sqrt(p) * b.a, atol=1e-10)
    assert not np.allclose(t.m, base.m)


def test_check_pure_necessary_examples(skewed, bell):
    assert check_pure_necessary(skewed, bell, 0.4)
    assert check_pure_necessary(skewed, bell, 1e-6)


def test_build_intermediate_examples(bell, skewed):
    q = build_intermediate(bell, skewed, 1.0)
    np.testing.assert_allclose(schmidt(q).coefficients, [0.8, 0.2])
    q = build_intermediate(skewed, bell, 0.4)
    np.testing.assert_allclose(schmidt(q).coefficients, [0.8, 0.2], atol=1e-12)
    a = S([0.5, 0.3, 0.2])
    q = build_intermediate(a, bell3, 0.6)
    np.testing.assert_allclose(schmidt(q).coefficients, [0.6, 0.2, 0.2], atol=1e-12)


def test_build_intermediate_above_pmax(skewed, bell):
    with pytest.raises(InfeasibleTarget):
        build_intermediate(skewed, bell, 0.41)


def test_deterministic_identity_instrument(rng):
    a = random_state(3, 3, rng)
    elements, m0 = synth_deterministic(a, a)
    assert len(elements) == 1
    (el,) = elements
    assert el.q == pytest.approx(1.0)
    np.testing.assert_allclose(el.m.conj().T @ el.m, np.eye(3), atol=1e-9)
    out, _ = apply_local(el.m, el.u, a)
    np.testing.assert_allclose(out, a.a, atol=1e-9)


def test_deterministic_bell_to_skewed(bell, skewed):
    elements, m0 = synth_deterministic(bell, skewed)
    assert len(elements) == 2
    np.testing.assert_allclose([e.q for e in elements], [0.5, 0.5], atol=1e-12)
    total = sum(e.m.conj().T @ e.m for e in elements)
    np.testing.assert_allclose(total, np.eye(2), atol=1e-12)
    for e in elements:
        np.testing.assert_allclose(sv(e.m), [np.sqrt(0.8), np.sqrt(0.2)], atol=1e-12)
        assert linalg.is_unitary(e.u, 1e-12)
        out, w = apply_local(e.m, e.u, bell)
        ok, c = proportional(out, skewed.a)
        assert ok and abs(c) ** 2 == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(m0, 0, atol=1e-12)


def test_deterministic_random_dim4(rng):
    for _ in range(50):
        x, y = random_majorized_pair(rng, 4)
        a = state_with_spectrum(x, 4, 4, rng)
        q = state_with_spectrum(y, 4, 4, rng)
        elements, m0 = synth_deterministic(a, q)
        assert len(elements) <= 10
        assert abs(sum(e.q for e in elements) - 1) <= 1e-9
        pa = a.a @ linalg.pinv(a.a)
        total = sum(e.m.conj().T @ e.m for e in elements)
        assert np.abs(total - pa).max() <= 1e-9
        assert np.abs(total + m0.conj().T @ m0 - np.eye(4)).max() <= 1e-9
        for e in elements:
            assert linalg.is_contraction(e.m, 1e-9)
            out, w = apply_local(e.m, e.u, a)
            assert np.abs(out - np.sqrt(e.q) * q.a).max() <= 1e-9


def test_deterministic_rank_deficient_rectangular(rng):
    # Alice 4-dim, Bob 3-dim, source of Schmidt rank 2
    for _ in range(30):
        x, y = random_majorized_pair(rng, 2)
        a = state_with_spectrum(x, 4, 3, rng)
        q = state_with_spectrum(y, 4, 3, rng)
        elements, m0 = synth_deterministic(a, q)
        total = sum(e.m.conj().T @ e.m for e in elements) + m0.conj().T @ m0
        assert np.abs(total - np.eye(4)).max() <= 1e-9
        for e in elements:
            out, _ = apply_local(e.m, e.u, a)
            assert np.abs(out - np.sqrt(e.q) * q.a).max() <= 1e-9


def test_deterministic_requires_majorization(skewed, bell):
    with pytest.raises(PreconditionError):
        synth_deterministic(skewed, bell)


def test_uhlmann_mixing(rng):
    for _ in range(50):
        x, y = random_majorized_pair(rng, 3)
        a = state_with_spectrum(x, 3, 3, rng)
        q = state_with_spectrum(y, 3, 3, rng)
        elements, _ = synth_deterministic(a, q)
        qq = q.a @ q.a.conj().T
        mix = sum(e.q * e.w.conj().T @ qq @ e.w for e in elements)
        assert np.abs(mix - a.a @ a.a.conj().T).max() <= 1e-9


def test_tail_identity(rng):
    b = random_state(3, 3, rng)
    tail = synth_probabilistic_tail(b, b, 1.0)
    out, w = apply_local(tail.n, tail.v, b)
    np.testing.assert_allclose(out, b.a, atol=1e-9)
    assert linalg.is_unitary(tail.n, 1e-9)


def test_tail_skewed_to_bell(skewed, bell):
    tail = synth_probabilistic_tail(skewed, bell, 0.4)
    np.testing.assert_allclose(sv(tail.n), [1.0, 0.5], atol=1e-12)
    np.testing.assert_allclose(sv(tail.n_fail), [np.sqrt(3) / 2, 0.0], atol=1e-12)
    assert linalg.is_unitary(tail.v, 1e-12)
    out, _ = apply_local(tail.n, tail.v, skewed)
    np.testing.assert_allclose(out, np.sqrt(0.4) * bell.a, atol=1e-12)


def test_tail_random(rng):
    for _ in range(50):
        b = random_state(3, 4, rng, rank=int(rng.integers(1, 4)))
        a = random_state(3, 4, rng)
        p = feasibility(a, b).p_max * rng.uniform(0.2, 1.0)
        if p <= 0:
            continue
        q = build_intermediate(a, b, p)
        tail = synth_probabilistic_tail(q, b, p)
        out, _ = apply_local(tail.n, tail.v, q)
        assert np.abs(out - np.sqrt(p) * b.a).max() <= 1e-9
        assert linalg.is_contraction(tail.n, 1e-9)
        comp = tail.n.conj().T @ tail.n + tail.n_fail.conj().T @ tail.n_fail
        assert np.abs(comp - np.eye(3)).max() <= 1e-9


def test_tail_precondition(bell, skewed):
    with pytest.raises(PreconditionError):
        synth_probabilistic_tail(skewed, bell, 0.5)


def test_pipeline_deterministic(bell, skewed):
    pr = full_pipeline(bell, skewed)
    assert pr.probability == 1.0 and pr.stage2 is None
    assert pr.branch_count == 2


def test_pipeline_skewed_to_bell(skewed, bell):
    pr = full_pipeline(skewed, bell)
    assert pr.probability == pytest.approx(0.4, abs=1e-12)
    assert pr.branch_count == 1
    np.testing.assert_allclose(sv(pr.stage2.n), [1.0, 0.5], atol=1e-12)


def test_pipeline_three_level():
    a = S([0.5, 0.3, 0.2])
    pr = full_pipeline(a, bell3)
    assert pr.probability == pytest.approx(0.6, abs=1e-12)
    np.testing.assert_allclose(schmidt(pr.intermediate).coefficients, [0.6, 0.2, 0.2], atol=1e-12)
    assert pr.stage2 is not None


def test_pipeline_errors(skewed, bell):
    with pytest.raises(InfeasibleTarget):
        full_pipeline(skewed, bell, 0.5)
    with pytest.raises(RankViolation):
        full_pipeline(product, bell)


def test_lo_popescu_unitary_on_bell(bell, rng):
    u = linalg.random_unitary(2, rng)
    n, v = lo_popescu(u, bell)
    assert linalg.is_unitary(n, 1e-9) and linalg.is_unitary(v, 1e-9)
    np.testing.assert_allclose(bell.a @ u.T, n @ bell.a @ v.T, atol=1e-12)


def test_lo_popescu_projector_on_bell(bell):
    m = np.diag([1.0, 0.0])
    n, u = lo_popescu(m, bell)
    np.testing.assert_allclose(n @ bell.a @ u.T, [[1 / np.sqrt(2), 0], [0, 0]], atol=1e-12)


def test_lo_popescu_random_square(rng):
    for _ in range(50):
        psi = random_state(3, 3, rng)
        m = random_contraction(rng, 3, 3)
        n, u = lo_popescu(m, psi)
        assert np.abs(psi.a @ m.T - n @ psi.a @ u.T).max() <= 1e-9
        assert linalg.is_contraction(n, 1e-9) and linalg.is_unitary(u, 1e-9)


def test_lo_popescu_rectangular_state(rng):
    psi = random_state(2, 4, rng)
    m = random_contraction(rng, 4, 4)
    n, u = lo_popescu(m, psi)
    assert n.shape == u.shape == (4, 4)
    lhs = linalg.pad_to(psi.a @ m.T, 4, 4)
    assert np.abs(lhs - n @ linalg.pad_to(psi.a, 4, 4) @ u.T).max() <= 1e-9


def test_lo_popescu_rejects_expansion(bell):
    with pytest.raises(NotAContraction):
        lo_popescu(2 * np.eye(2), bell)
