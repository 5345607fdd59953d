import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastmm.ring import (DimensionError, NonRecursableError, OpCounter, commutative_mm_even, frobenius_norm,
                         identity, mpq, ring_of, seeded_random_matrix, straightforward_mm, to_ring, zeros)

from conftest import exact_equal, rational_matrix


def test_seeded_matrix_is_deterministic():
    A = seeded_random_matrix(5, 4, "int", 3)
    B = seeded_random_matrix(5, 4, "int", 3)
    assert exact_equal(A, B)
    assert ring_of(A) == "bigint"
    assert all(-9 <= x <= 9 for x in A.ravel())
    F = seeded_random_matrix(3, 3, "float", 1)
    assert F.dtype == np.float64 and np.all(np.abs(F) <= 1)


def test_seeded_matrix_rejects_bad_input():
    with pytest.raises(DimensionError):
        seeded_random_matrix(0, 3)
    with pytest.raises(ValueError):
        seeded_random_matrix(2, 2, "gauss")


def test_ring_conversions():
    A = to_ring(np.array([[0.5, 1.0]]), "rational")
    assert A[0, 0] == mpq(1, 2) and ring_of(A) == "rational"
    assert ring_of(to_ring(np.eye(2, dtype=int), "bigint")) == "bigint"
    assert ring_of(zeros((2, 2), "complex")) == "complex"
    assert exact_equal(identity(3), np.eye(3, dtype=int))
    with pytest.raises(ValueError):
        to_ring(np.array([[0.5]]), "bigint")


def test_straightforward_counts_and_value():
    c = OpCounter()
    A = seeded_random_matrix(3, 4, "int", 0)
    B = seeded_random_matrix(4, 5, "int", 1)
    C = straightforward_mm(A, B, c)
    assert c.counts == (60, 45) and c.const_muls == 0
    assert exact_equal(C, A.astype(np.int64) @ B.astype(np.int64))
    with pytest.raises(DimensionError):
        straightforward_mm(A, A)


def test_straightforward_exact_rationals():
    A, B = rational_matrix(3, 3, 0), rational_matrix(3, 2, 1)
    C = straightforward_mm(A, B)
    for i in range(3):
        for h in range(2):
            assert C[i, h] == sum((A[i, j] * B[j, h] for j in range(3)), mpq(0))


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_commutative_even_counts(n):
    A, B = rational_matrix(n, n, n), rational_matrix(n, n, n + 1)
    c = OpCounter()
    C = commutative_mm_even(A, B, c)
    assert exact_equal(C, straightforward_mm(A, B))
    assert (2 * c.ring_muls, c.ring_adds) == (n**3 + 2 * n**2, (3 * n**3) // 2 + 2 * n**2 - 2 * n)


def test_commutative_rejects_recursion_and_odd():
    A = seeded_random_matrix(4, 4)
    with pytest.raises(NonRecursableError):
        commutative_mm_even(A, A, recurse=True)
    B = seeded_random_matrix(3, 3)
    with pytest.raises(DimensionError):
        commutative_mm_even(B, B)


def test_counter_phases_and_merge():
    c = OpCounter()
    with c.in_phase("x"):
        c.tally(muls=2, adds=1)
    c.tally(const=3)
    c.note("call", 2)
    d = c + c
    assert d.counts == (4, 2) and d.const_muls == 6
    assert d.events["call"] == 4
    assert c.by_phase["x"][0] == 2


def test_exact_norms_are_squared():
    A = np.array([[mpq(3), mpq(4)]], dtype=object)
    nrm = frobenius_norm(A)
    assert nrm.squared and nrm.value == 25
    assert frobenius_norm(np.array([[3.0, 4.0]])) == 5.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(0, 10**6))
def test_straightforward_matches_int_matmul(k, m, n, seed):
    A = seeded_random_matrix(k, m, "int", seed)
    B = seeded_random_matrix(m, n, "int", seed + 1)
    c = OpCounter()
    C = straightforward_mm(A, B, c)
    assert exact_equal(C, A.astype(np.int64) @ B.astype(np.int64))
    assert (c.ring_muls, c.ring_adds) == (k * m * n, k * n * (m - 1))
