import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from fastmm.engine import straightforward_algorithm
from fastmm.exponents import (RANK_FAMILIES, exponent_rect, exponent_square, family_rank, family_rank_formula,
                              record_exponent, schonhage_tau, rank_table_rows)
from fastmm.zoo import strassen2x2


def test_square_values():
    assert abs(exponent_square(2, 7).value - 2.8074) <= 1e-4
    assert abs(exponent_square(6, 144).value - 2.7737) <= 1e-4
    assert exponent_square(5, 125).value == 3.0
    with pytest.raises(ValueError):
        exponent_square(1, 1)


def test_rect_values():
    assert abs(exponent_rect(70, 70, 70, 143640).value - 2.7951) <= 1e-3
    assert exponent_rect(2, 3, 4, 24).value == 3.0
    assert exponent_rect(2, 2, 2, 7).value == pytest.approx(exponent_square(2, 7).value, abs=1e-15)
    with pytest.raises(ValueError):
        exponent_rect(1, 1, 1, 1)


def test_tau_reference_case():
    rep = schonhage_tau([(7, 1, 7), (7, 7, 1)], 63)
    assert rep.omega_bound < 2.66
    assert rep.omega_bound == pytest.approx(3 * math.log(31.5) / math.log(49), abs=1e-9)
    assert rep.residual <= 1e-10


def test_tau_consistency_cases():
    rep = schonhage_tau([(3, 3, 3)], 23)
    assert rep.omega_bound == pytest.approx(exponent_rect(3, 3, 3, 23).value, abs=1e-9)
    two = schonhage_tau([(2, 2, 2), (2, 2, 2)], 14)
    assert two.omega_bound == pytest.approx(math.log2(7), abs=1e-9)


def test_tau_rejects_impossible():
    with pytest.raises(ValueError, match="no positive solution"):
        schonhage_tau([(2, 2, 2), (2, 2, 2)], 2)
    with pytest.raises(ValueError):
        schonhage_tau([(1, 1, 1)], 5)


@pytest.mark.parametrize("fam,n,rank,bound", [("P78", 70, 143640, 2.7952), ("P80", 48, 47216, 2.7802),
                                              ("P81", 46, 41308, 2.7762), ("P82", 44, 36133, 2.7734)])
def test_table_rows(fam, n, rank, bound):
    r, rep = family_rank_formula(n, fam)
    assert r == rank
    assert rep.value <= bound and bound - rep.value <= 1e-3


def test_table_all_pass():
    rows = rank_table_rows()
    assert len(rows) == 4 and all(r.passed for r in rows)
    assert [r.year for r in rows] == sorted(r.year for r in rows)


def test_ranks_integral_for_even_n_only():
    for fam in RANK_FAMILIES:
        assert all(family_rank(n, fam).denominator == 1 for n in range(2, 102, 2))
    assert family_rank(3, "P80").denominator != 1


def test_non_integer_rank_warns(monkeypatch):
    # every shipped family is integral at even n, so use a family that is not
    monkeypatch.setitem(RANK_FAMILIES, "half", (2000, (1, 0, 0, 1), 2, 4, 3.0))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        r, rep = family_rank_formula(4, "half")
    assert w and r == family_rank(4, "half") and not rep.extra["integral"]
    with pytest.raises(ValueError):
        family_rank_formula(5, "P78")
    with pytest.raises(ValueError):
        family_rank(4, "P99")


def test_record_exponent_picks_strassen():
    rep, name = record_exponent([straightforward_algorithm(2, 2, 2), strassen2x2()])
    assert name == "strassen2x2" and rep.value == pytest.approx(math.log2(7))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6), st.integers(2, 6)), min_size=1, max_size=4),
       st.integers(1, 400))
def test_tau_solves_equation(problems, extra):
    r = len(problems) + extra
    rep = schonhage_tau(problems, r)
    total = sum((k * m * n) ** rep.value for k, m, n in problems)
    assert abs(total - r) <= 1e-10 * r


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 50), st.integers(1, 10**6))
def test_square_exponent_inverts(n, r):
    assert n ** exponent_square(n, r).value == pytest.approx(r, rel=1e-9)


def test_family_table_shape():
    assert set(RANK_FAMILIES) == {"P78", "P80", "P81", "P82"}
