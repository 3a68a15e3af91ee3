"""Induced fluid LP and hindsight relaxation against enumeration oracles."""

import numpy as np
import pytest

from olpr.lp import (DegenerateBase, InducedLpInstance, SimplexError,
                     check_complementary_slackness, check_stability,
                     hindsight_value_streaming, induced_from_model,
                     solve_hindsight_relaxation, solve_induced)
from olpr.model import build_hard_instance, make_random_input_i, materialize

from _oracles import hindsight_oracle, induced_lp_oracle


def _random_instance(rng, m, n):
    return InducedLpInstance(
        rewards=rng.uniform(0.5, 5.0, n),
        requirements=rng.uniform(0.1, 2.0, (m, n)),
        budget=rng.uniform(0.5, 3.0, m),
        caps=rng.uniform(0.2, 1.5, n),
    )


def test_induced_matches_enumeration():
    rng = np.random.default_rng(10)
    for trial in range(100):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        inst = _random_instance(rng, m, n)
        sol = solve_induced(inst)
        ref_val, _ = induced_lp_oracle(inst.rewards, inst.requirements,
                                       inst.budget, inst.caps)
        assert abs(sol.objective - ref_val) < 1e-7 * max(1.0, abs(ref_val))


def test_induced_solution_feasible():
    rng = np.random.default_rng(11)
    for trial in range(50):
        inst = _random_instance(rng, int(rng.integers(1, 4)), int(rng.integers(1, 5)))
        sol = solve_induced(inst)
        assert np.all(sol.X >= -1e-9) and np.all(sol.V >= -1e-9) and np.all(sol.S >= -1e-9)
        assert np.allclose(inst.requirements @ sol.X + sol.S, inst.budget, atol=1e-8)
        assert np.allclose(sol.X + sol.V, inst.caps, atol=1e-8)


def test_complementary_slackness():
    rng = np.random.default_rng(12)
    for trial in range(30):
        inst = _random_instance(rng, int(rng.integers(1, 4)), int(rng.integers(1, 5)))
        sol = solve_induced(inst)
        assert check_complementary_slackness(inst, sol) < 1e-6


def test_hard_instance_objective_and_degeneracy():
    inst = induced_from_model(build_hard_instance(), budget=np.array([1.0, 1.0]))
    sol = solve_induced(inst)
    assert abs(sol.objective - 3.0) < 1e-7
    assert sol.degenerate


def test_nondegenerate_instance_detected():
    # strictly interior optimum with m + n positive variables
    inst = InducedLpInstance(rewards=np.array([2.0, 1.0]),
                             requirements=np.array([[1.0, 1.0]]),
                             budget=np.array([0.7]),
                             caps=np.array([0.5, 0.5]))
    sol = solve_induced(inst)
    # X = (0.5, 0.2): type 1 cap binds, budget binds, V2 and nothing else slack
    assert abs(sol.objective - 1.2) < 1e-9
    assert not sol.degenerate
    assert sol.support_size == 3


def test_scaling_linear_in_alpha():
    rng = np.random.default_rng(13)
    for trial in range(20):
        inst = _random_instance(rng, 2, 3)
        base = solve_induced(inst).objective
        for alpha in (0.5, 2.0, 10.0):
            scaled = solve_induced(inst.scaled(alpha)).objective
            assert abs(scaled - alpha * base) <= 1e-9 * max(1.0, abs(alpha * base))


def test_stability_of_small_perturbation():
    inst = InducedLpInstance(rewards=np.array([2.0, 1.0]),
                             requirements=np.array([[1.0, 1.0]]),
                             budget=np.array([0.7]),
                             caps=np.array([0.5, 0.5]))
    rep = check_stability(inst, delta_budget=np.array([0.01]),
                          delta_caps=np.array([0.0, 0.0]))
    assert rep.basis_unchanged
    assert rep.midpoint_linear_error < 1e-9


def test_stability_rejects_degenerate_base():
    inst = induced_from_model(build_hard_instance(), budget=np.array([1.0, 1.0]))
    with pytest.raises(DegenerateBase):
        check_stability(inst, np.zeros(2), np.zeros(6))


def test_instance_validation():
    with pytest.raises(ValueError):
        InducedLpInstance(np.ones(2), np.ones((1, 2)), np.ones(1), -np.ones(2))
    with pytest.raises(ValueError):
        InducedLpInstance(np.ones(2), np.ones((1, 2)), np.array([np.nan]), np.ones(2))
    with pytest.raises(ValueError):
        InducedLpInstance(np.ones(3), np.ones((1, 2)), np.ones(1), np.ones(2))


def test_hindsight_matches_enumeration():
    model = make_random_input_i(2)
    for seed in range(10):
        s = materialize(model, seed, 5)
        val, x = solve_hindsight_relaxation(s.rewards, s.requirements,
                                            s.replenishments)
        ref_val, _ = hindsight_oracle(s.rewards, s.requirements, s.replenishments)
        assert abs(val - ref_val) < 1e-7 * max(1.0, abs(ref_val))
        assert np.all((x >= 0.0) & (x <= 1.0))
        assert np.all(s.requirements.T @ x <= s.replenishments.sum(axis=0) + 1e-7)


def test_streaming_bound_dominates_exact():
    model = make_random_input_i(3)
    for seed in range(5):
        T = 3000
        s = materialize(model, seed, T)
        exact, _ = solve_hindsight_relaxation(s.rewards, s.requirements,
                                              s.replenishments)
        bound = hindsight_value_streaming(model, seed, T, chunk=700)
        assert bound >= exact - 1e-8
        # the dual gap should be small relative to the value
        assert bound <= exact * 1.1


def test_induced_from_model_requires_support():
    with pytest.raises(ValueError):
        induced_from_model(make_random_input_i(2))
