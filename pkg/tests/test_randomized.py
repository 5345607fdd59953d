import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastmm.randomized import (SamplingPlan, error_stats, leverage_scores, sample_factors, sampled_mm,
                               unbiasedness_check)
from fastmm.ring import DimensionError, seeded_random_matrix


def test_plan_validation():
    with pytest.raises(ValueError):
        SamplingPlan(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        SamplingPlan(np.array([1.0]), c=0)
    with pytest.raises(ValueError):
        SamplingPlan(np.array([-0.5, 1.5]))
    p = SamplingPlan(np.array([0.25, 0.75]), 3, 1)
    assert p.with_samples(c=5).c == 5


def test_probabilities_follow_norm_products():
    A = np.array([[3.0, 0.0], [4.0, 1.0]])
    B = np.array([[1.0, 0.0], [0.0, 2.0]])
    plan = leverage_scores(A, B)
    assert np.allclose(plan.probabilities, [5 / 7, 2 / 7])


def test_single_nonzero_column_is_exact():
    rng = np.random.default_rng(0)
    A = np.zeros((6, 5))
    A[:, 2] = rng.normal(size=6)
    B = rng.normal(size=(5, 4))
    plan = leverage_scores(A, B, c=3, seed=1)
    assert np.allclose(sampled_mm(A, B, plan), A @ B, rtol=1e-14, atol=1e-14)


def test_all_zero_product_rejected():
    with pytest.raises(ValueError):
        leverage_scores(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(DimensionError):
        leverage_scores(np.ones((2, 3)), np.ones((2, 2)))


def test_factors_match_weighted_product():
    A = seeded_random_matrix(5, 8, "float", 0)
    B = seeded_random_matrix(8, 4, "float", 1)
    plan = leverage_scores(A, B, c=6, seed=2)
    C, R, idx = sample_factors(A, B, plan)
    assert C.shape == (5, 6) and R.shape == (6, 4) and len(idx) == 6
    assert np.allclose(C @ R, sampled_mm(A, B, plan))


def test_deterministic_for_seed():
    A = seeded_random_matrix(10, 10, "float", 0)
    plan = leverage_scores(A, A, c=4, seed=9)
    assert np.array_equal(sampled_mm(A, A, plan), sampled_mm(A, A, plan))
    s1 = error_stats(A, A, 4, 10, 3)
    s2 = error_stats(A, A, 4, 10, 3)
    assert np.array_equal(s1.values, s2.values)


def test_error_audit_small():
    A = seeded_random_matrix(20, 20, "float", 0)
    B = seeded_random_matrix(20, 20, "float", 1)
    st_ = error_stats(A, B, 10, 50, 0)
    assert st_.mean <= 4 and st_.trials == 50
    with pytest.raises(ValueError):
        error_stats(A, B, 10, 0)


def test_unbiasedness_small():
    A = seeded_random_matrix(4, 4, "float", 5)
    z, mean = unbiasedness_check(A, A, 2, 500, 1)
    assert z <= 5 and mean.shape == (4, 4)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(1, 8), st.integers(1, 20), st.integers(0, 10**6))
def test_probabilities_are_distribution(k, m, n, c, seed):
    A = seeded_random_matrix(k, m, "float", seed)
    B = seeded_random_matrix(m, n, "float", seed + 1)
    plan = leverage_scores(A, B, c, seed)
    p = plan.probabilities
    assert np.all(p >= 0) and abs(p.sum() - 1) <= 1e-12
    assert sampled_mm(A, B, plan).shape == (k, n)
