"""Approximate matrix products by sampling column/row pairs.

AB = sum_j a_j b_j^T over the columns a_j of A and rows b_j of B. Drawing c
indices i.i.d. with probabilities p_j proportional to |a_j| |b_j| and
rescaling each sampled pair by 1/sqrt(c p_j) gives an unbiased estimate CR.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ring import DimensionError, column_norms, frobenius_norm, row_norms


@dataclass(frozen=True)
class SamplingPlan:
    probabilities: np.ndarray
    c: int = 1
    seed: int = 0

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.ndim != 1 or np.any(p < 0):
            raise ValueError("probabilities must be a non-negative vector")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        if int(self.c) < 1:
            raise ValueError("sample count c must be at least 1")
        object.__setattr__(self, "probabilities", p)

    def with_samples(self, c=None, seed=None):
        return SamplingPlan(self.probabilities, self.c if c is None else c, self.seed if seed is None else seed)


def _float_pair(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    if A.dtype == object:
        A = A.astype(np.float64)
    if B.dtype == object:
        B = B.astype(np.float64)
    return A, B


def leverage_scores(A, B, c=1, seed=0) -> SamplingPlan:
    """p_j = |a_j| |b_j| / sum_t |a_t| |b_t| for columns a_j of A and rows b_j of B."""
    A, B = _float_pair(A, B)
    w = column_norms(A) * row_norms(B)
    total = w.sum()
    if total == 0:
        raise ValueError("every column/row product is zero, so AB = 0; nothing to sample")
    p = w / total
    # fold rounding into the largest entry so the sum is 1 to machine precision
    p[np.argmax(p)] += 1.0 - p.sum()
    return SamplingPlan(p, c, seed)


def sample_indices(plan: SamplingPlan, rng=None):
    rng = rng if rng is not None else np.random.default_rng(plan.seed)
    return rng.choice(plan.probabilities.size, size=plan.c, replace=True, p=plan.probabilities)


def sample_factors(A, B, plan: SamplingPlan, rng=None):
    """(C, R, idx): C holds the c rescaled sampled columns, R the matching rows."""
    A, B = _float_pair(A, B)
    if plan.probabilities.size != A.shape[1]:
        raise DimensionError("plan length does not match the inner dimension")
    idx = sample_indices(plan, rng)
    scale = 1.0 / np.sqrt(plan.c * plan.probabilities[idx])
    return A[:, idx] * scale, B[idx, :] * scale[:, None], idx


def sampled_mm(A, B, plan: SamplingPlan, rng=None):
    """CR from c i.i.d. draws; deterministic for a given plan seed.

    Equivalent to C @ R from :func:`sample_factors`, but each distinct index
    is weighted once by count_j / (c p_j), which keeps exact rescaling (the
    single-column case returns AB exactly).
    """
    A, B = _float_pair(A, B)
    if plan.probabilities.size != A.shape[1]:
        raise DimensionError("plan length does not match the inner dimension")
    idx = sample_indices(plan, rng)
    counts = np.bincount(idx, minlength=plan.probabilities.size)
    used = np.nonzero(counts)[0]
    weights = counts[used] / (plan.c * plan.probabilities[used])
    return (A[:, used] * weights) @ B[used, :]


@dataclass(frozen=True)
class ErrorStats:
    mean: float
    max: float
    std: float
    trials: int
    c: int
    values: np.ndarray


def error_stats(A, B, c, trials, seed=0) -> ErrorStats:
    """sqrt(c) |CR - AB|_F / (|A|_F |B|_F) over independent trials.

    Trial t draws from the stream SeedSequence([seed, t]), so results do not
    depend on how trials are scheduled.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    A, B = _float_pair(A, B)
    exact = A @ B
    plan = leverage_scores(A, B, c, seed)
    denom = frobenius_norm(A) * frobenius_norm(B)
    vals = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        err = np.linalg.norm(sampled_mm(A, B, plan, rng) - exact)
        vals[t] = np.sqrt(c) * err / denom
    return ErrorStats(float(vals.mean()), float(vals.max()), float(vals.std(ddof=1)) if trials > 1 else 0.0,
                      trials, c, vals)


def unbiasedness_check(A, B, c, trials, seed=0):
    """Max over entries of |mean(CR) - AB| / standard error, from i.i.d. trials."""
    A, B = _float_pair(A, B)
    plan = leverage_scores(A, B, c, seed)
    samples = np.empty((trials,) + (A.shape[0], B.shape[1]))
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        samples[t] = sampled_mm(A, B, plan, rng)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(trials)
    dev = np.abs(mean - A @ B)
    z = np.where(se > 0, dev / np.where(se > 0, se, 1.0), np.where(dev > 0, np.inf, 0.0))
    return float(z.max()), mean
