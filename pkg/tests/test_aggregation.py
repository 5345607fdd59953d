import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastmm.aggregation import (ApaAlgorithm, InterpolationError, LambdaPoly, aggregation_pair, aggregation_triple,
                                apa_apply, apa_pair, apa_recover_exact, format_poly, from_exact, parse_poly,
                                triple_families, validate_border_rank)
from fastmm.engine import DisjointSpec, apply_bilinear, validate_decomposition
from fastmm.ring import mpq, seeded_random_matrix, straightforward_mm

from conftest import exact_equal, rational_matrix

dims = st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))


def pair_operands(k, m, n, seed, maker=rational_matrix):
    A, B = maker(k, m, seed), maker(m, n, seed + 1)
    U, V = maker(m, n, seed + 2), maker(n, k, seed + 3)
    return [A, U], [B, V]


# -- lambda polynomials ---------------------------------------------------------------------


def test_lambda_poly_arithmetic():
    p = LambdaPoly([1, 2])        # 1 + 2L
    q = LambdaPoly([0, 0, 3])     # 3L^2
    assert (p * q).coeffs == (0, 0, 3, 6)
    assert (p + q)(2) == 1 + 4 + 12
    assert (p - p).is_zero and (p - p).degree == 0
    assert p.leading == 2 and q.degree == 2
    assert (p * q)(mpq(1, 2)) == mpq(3, 4) * 2


def test_poly_text_round_trip():
    p = LambdaPoly([mpq(1, 3), 0, -2])
    assert parse_poly(format_poly(p)) == p
    assert parse_poly("0") == LambdaPoly([0])


# -- exact pair ----------------------------------------------------------------------------------


def test_pair_count_example():
    assert aggregation_pair(4, 4, 4).rank == 112
    assert aggregation_pair(2, 2, 2).rank == 20


def test_pair_all_ones():
    alg = aggregation_pair(2, 2, 2)
    ones = np.ones((2, 2), dtype=object)
    C1, C2 = apply_bilinear(alg, [ones, ones], [ones, ones])
    assert exact_equal(C1, 2 * ones) and exact_equal(C2, 2 * ones)


def test_pair_rectangular_oracle():
    alg = aggregation_pair(2, 3, 4)
    assert alg.target == DisjointSpec([(2, 3, 4), (3, 4, 2)])
    first, second = pair_operands(2, 3, 4, 11)
    C1, C2 = apply_bilinear(alg, first, second)
    assert exact_equal(C1, straightforward_mm(first[0], second[0]))
    assert exact_equal(C2, straightforward_mm(first[1], second[1]))


@settings(max_examples=15, deadline=None)
@given(dims)
def test_pair_validates_with_count(d):
    k, m, n = d
    alg = aggregation_pair(k, m, n)
    assert alg.rank == k * m * n + k * m + m * n + n * k
    assert validate_decomposition(alg).ok


# -- exact triple --------------------------------------------------------------------------------


def test_triple_family_classification():
    targets, full, grouped = triple_families()
    assert len(targets) == 3 and len(full) == 3
    assert len(grouped) == 9 and sum(len(v) for v in grouped.values()) == 21


@pytest.mark.parametrize("n", [1, 2, 3])
def test_triple_validates(n):
    alg = aggregation_triple(n)
    assert alg.rank == n**3 + 9 * n**2 + 3 * n**3
    assert validate_decomposition(alg).ok


def test_triple_oracle_n2():
    alg = aggregation_triple(2)
    first = [rational_matrix(2, 2, s) for s in range(3)]
    second = [rational_matrix(2, 2, s + 3) for s in range(3)]
    for C, A, B in zip(apply_bilinear(alg, first, second), first, second):
        assert exact_equal(C, straightforward_mm(A, B))


# -- APA pair -----------------------------------------------------------------------------------------


@pytest.mark.parametrize("d", [(1, 1, 1), (2, 2, 2), (2, 3, 4), (3, 3, 3)])
def test_apa_border_rank(d):
    k, m, n = d
    alg = apa_pair(k, m, n)
    rep = validate_border_rank(alg)
    assert rep.ok and rep.scale == 2
    assert rep.border_rank == k * m * n + k * m + m * n


def test_apa_smaller_than_exact_pair():
    for k in range(1, 5):
        for m in range(1, 5):
            for n in range(1, 5):
                assert apa_pair(k, m, n).rank < aggregation_pair(k, m, n).rank


def test_exact_pair_lifted_is_degenerate_apa():
    alg = from_exact(aggregation_pair(2, 2, 2))
    assert alg.scale == 0 and validate_border_rank(alg).ok


def test_zeroed_lambda_coefficient_is_named():
    alg = apa_pair(2, 2, 2)
    Wc = alg.Wc.copy()
    rows, cols = np.nonzero(Wc[2])
    Wc[2, rows[0], cols[0]] = 0
    rep = validate_border_rank(alg.with_cubes(Wc=Wc))
    assert not rep.ok
    power, entry, got, expected = rep.failures[0]
    assert power == 2 and len(entry) == 3 and got != expected


def test_apa_apply_error_shrinks_with_lambda():
    alg = apa_pair(2, 2, 2)
    first, second = pair_operands(2, 2, 2, 5, lambda r, c, s: seeded_random_matrix(r, c, "float", s))
    exact = [straightforward_mm(A, B) for A, B in zip(first, second)]

    def err(lam):
        outs = apa_apply(alg, first, second, lam)
        return max(np.abs(C - E).max() for C, E in zip(outs, exact))

    assert 0.3 <= err(1e-4) / err(2e-4) <= 0.7
    assert err(2.0**-10) < err(2.0**-4)


def test_apa_apply_exact_lambda_error_is_order_lambda():
    alg = apa_pair(2, 2, 2)
    first, second = pair_operands(2, 2, 2, 7, lambda r, c, s: seeded_random_matrix(r, c, "int", s))
    lam = mpq(1, 1000)
    outs = apa_apply(alg, first, second, lam)
    errs = [abs(x - y) for C, A, B in zip(outs, first, second) for x, y in zip(C.ravel(), straightforward_mm(A, B).ravel())]
    assert max(errs) <= 100 * lam  # measured 99.07 lambda on this seeded instance


def test_apa_zero_operands_and_zero_lambda():
    alg = apa_pair(2, 2, 2)
    z = np.zeros((2, 2), dtype=object)
    for lam in (mpq(1, 3), 0.25):
        assert all(np.all(C == 0) for C in apa_apply(alg, [z, z], [z, z], lam))
    with pytest.raises(ValueError):
        apa_apply(alg, [z, z], [z, z], 0)


# -- exact recovery -------------------------------------------------------------------------------


def test_recovery_matches_oracle():
    alg = apa_pair(2, 2, 2)
    first, second = pair_operands(2, 2, 2, 3)
    for C, A, B in zip(apa_recover_exact(alg, first, second), first, second):
        assert exact_equal(C, straightforward_mm(A, B))
    exact_pts = apa_recover_exact(alg, first, second, points=range(1, alg.degree + 2))
    assert exact_equal(exact_pts[0], straightforward_mm(first[0], second[0]))


def test_recovery_identity_blocks():
    alg = apa_pair(2, 2, 2)
    I = np.eye(2, dtype=int).astype(object)
    for C in apa_recover_exact(alg, [I, I], [I, I]):
        assert exact_equal(C, I)


def test_recovery_rejects_bad_points_and_detects_low_degree():
    alg = apa_pair(2, 2, 2)
    first, second = pair_operands(2, 2, 2, 4)
    with pytest.raises(ValueError):
        apa_recover_exact(alg, first, second, points=[1, 1, 2, 3, 4])
    with pytest.raises(ValueError):
        apa_recover_exact(alg, first, second, points=[0, 1, 2, 3, 4])
    with pytest.raises(InterpolationError):
        apa_recover_exact(alg, first, second, degree=2)
    with pytest.raises(TypeError):
        apa_recover_exact(alg, *pair_operands(2, 2, 2, 4, lambda r, c, s: seeded_random_matrix(r, c, "float", s)))


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([(2, 2, 2), (2, 3, 4), (3, 3, 3)]), st.integers(0, 10**6))
def test_recovery_property(d, seed):
    alg = apa_pair(*d)
    first, second = pair_operands(*d, seed)
    for C, A, B in zip(apa_recover_exact(alg, first, second), first, second):
        assert exact_equal(C, straightforward_mm(A, B))


def test_apa_rejects_bad_shapes():
    with pytest.raises(Exception):
        ApaAlgorithm("bad", (1, 1, 1), np.ones((1, 1, 1)), np.ones((1, 1, 2)), np.ones((1, 1, 1)), scale=0)
