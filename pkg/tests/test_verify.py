import dataclasses

import numpy as np
import pytest

from locc.states import apply_local, random_state
from locc.synthesis import InstrumentElement, feasibility, full_pipeline
from locc.verify import oracle_majorization, oracle_protocol_apply, simulate, verify


def four_sigma(p, n):
    return 4 * np.sqrt(p * (1 - p) / n)


def test_verify_nielsen_instance(bell, skewed):
    r = verify(full_pipeline(bell, skewed), bell, skewed)
    assert r.passed
    assert r.completeness_error <= 1e-10
    assert r.measured_success_probability == pytest.approx(1.0, abs=1e-9)


def test_verify_detects_scaled_branch(bell, skewed):
    pr = full_pipeline(bell, skewed)
    first = pr.stage1[0]
    tampered = dataclasses.replace(
        pr, stage1=(InstrumentElement(1.01 * first.m, first.u, first.q),) + pr.stage1[1:])
    r = verify(tampered, bell, skewed)
    assert not r.passed
    # 1.01^2 - 1 = 0.0201 times the largest eigenvalue 0.8 of M^H M
    assert r.completeness_error == pytest.approx(0.0201 * 0.8, rel=1e-6)


def test_verify_stage2_success_probability(skewed, bell):
    r = verify(full_pipeline(skewed, bell), skewed, bell)
    assert r.passed
    assert r.measured_success_probability == pytest.approx(0.4, abs=1e-9)


def test_verify_wrong_target(skewed, bell, rng):
    pr = full_pipeline(skewed, bell)
    other = random_state(2, 2, rng)
    assert not verify(pr, skewed, other).passed


def test_verify_random_feasible_instances(rng):
    checked = 0
    while checked < 500:
        n, m, n2 = rng.integers(2, 7, 3)
        a = random_state(n, m, rng)
        b = random_state(n2, m, rng, rank=int(rng.integers(1, min(n, m, n2) + 1)))
        p_max = feasibility(a, b).p_max
        if p_max <= 0:
            continue
        p = p_max if rng.random() < 0.5 else p_max * rng.uniform(0.05, 1.0)
        pr = full_pipeline(a, b, p)
        r = verify(pr, a, b)
        assert r.passed, r.to_dict()
        assert r.measured_success_probability == pytest.approx(p, abs=1e-9)
        checked += 1


def test_oracle_apply_matches_push_through(rng):
    a = random_state(3, 4, rng)
    b = random_state(3, 4, rng, rank=2)
    pr = full_pipeline(a, b)
    for el, (state, w) in zip(pr.stage1, oracle_protocol_apply(pr, a)):
        out, w2 = apply_local(el.m, el.u, a)
        assert np.abs(out - state).max() <= 1e-12
        assert w == pytest.approx(w2, abs=1e-12)


def test_oracle_majorization_reflexive():
    assert all(oracle_majorization([0.5, 0.3, 0.2], [0.5, 0.3, 0.2]).values())


def test_simulate_deterministic_protocol(bell, skewed):
    res = simulate(full_pipeline(bell, skewed), bell, 1000, seed=3)
    assert res.success_count == 1000
    assert sum(res.outcome_counts.values()) == 1000


def test_simulate_outcome_frequencies(bell, skewed):
    n = 100_000
    res = simulate(full_pipeline(bell, skewed), bell, n, seed=11)
    assert set(res.outcome_counts) == {1, 2}
    for c in res.outcome_counts.values():
        assert abs(c / n - 0.5) <= four_sigma(0.5, n)


def test_simulate_probabilistic(skewed, bell):
    n = 100_000
    res = simulate(full_pipeline(skewed, bell), skewed, n, seed=5)
    assert abs(res.empirical_p - 0.4) <= four_sigma(0.4, n)


@pytest.mark.parametrize("workers", [2, 3, 7])
def test_simulate_worker_independent(skewed, bell, workers):
    pr = full_pipeline(skewed, bell)
    assert simulate(pr, skewed, 20_001, 9, workers) == simulate(pr, skewed, 20_001, 9, 1)


def test_simulate_reproducible(bell, skewed):
    pr = full_pipeline(bell, skewed)
    assert simulate(pr, bell, 5000, 4) == simulate(pr, bell, 5000, 4)
    assert simulate(pr, bell, 5000, 4) != simulate(pr, bell, 5000, 5)
