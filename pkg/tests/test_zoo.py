import numpy as np
import pytest

from fastmm import algfile
from fastmm.aggregation import ApaAlgorithm, validate_border_rank
from fastmm.engine import apply_bilinear, apply_recursive, validate_decomposition
from fastmm.ring import DimensionError, identity, mpq, straightforward_mm
from fastmm.zoo import (BUILTIN_NAMES, DATA_FILE_BUILTINS, complex_mult_dual, complex_mult_rank3, data_files,
                        load_builtin, parse_name, trilinear_form_check)

from conftest import exact_equal, rational_matrix

ALL_BUILTINS = ["strassen2x2", "winograd2x2", "straightforward(3,3,3)", "straightforward(1,2,3)",
                "complex_mult_rank3", "complex_mult_dual", "aggregation_pair(2,3,4)", "aggregation_triple(2)",
                "apa_pair(2,2,2)"]


@pytest.mark.parametrize("name", ALL_BUILTINS)
def test_every_builtin_validates_and_round_trips(name):
    alg = load_builtin(name)
    if isinstance(alg, ApaAlgorithm):
        assert validate_border_rank(alg).ok
    else:
        assert validate_decomposition(alg).ok
    back = algfile.loads(algfile.dumps(alg))
    assert algfile.same_algorithm(alg, back)


def test_expected_ranks():
    assert load_builtin("strassen2x2").rank == 7
    assert load_builtin("winograd2x2").rank == 7
    assert load_builtin("straightforward(3,3,3)").rank == 27
    assert load_builtin("complex_mult_rank3").rank == 3
    assert load_builtin("complex_mult_dual").rank == 3
    assert load_builtin("straightforward", 2, 2, 2).rank == 8


def test_small_builtins_use_unit_coefficients():
    for name in ("strassen2x2", "winograd2x2", "complex_mult_rank3", "complex_mult_dual"):
        alg = load_builtin(name)
        for M in (alg.U, alg.V, alg.W):
            assert set(M.ravel()) <= {-1, 0, 1}


def test_complex_multiplication_values():
    alg = complex_mult_rank3()
    a = np.array([mpq(3), mpq(-2)], dtype=object)
    b = np.array([mpq(5, 2), mpq(7)], dtype=object)
    c = apply_bilinear(alg, a, b)
    assert c[0] == a[0] * b[0] - a[1] * b[1]
    assert c[1] == a[0] * b[1] + a[1] * b[0]


def test_complex_dual_is_distinct():
    a, b = complex_mult_rank3(), complex_mult_dual()
    assert not a.same_coefficients(b)
    assert validate_decomposition(b).ok
    assert not np.array_equal(a.target_tensor(), b.target_tensor())


def test_unknown_and_malformed_names():
    with pytest.raises(KeyError):
        load_builtin("laderman3x3")
    with pytest.raises(KeyError):
        load_builtin("strassen2x2(2)")
    with pytest.raises(KeyError):
        load_builtin("aggregation_pair(2,2)")
    with pytest.raises(DimensionError):
        load_builtin("straightforward(0,1,1)")
    assert parse_name("apa_pair(1, 2, 3)") == ("apa_pair", (1, 2, 3))
    assert len(BUILTIN_NAMES) == 8


@pytest.mark.parametrize("stem", sorted(DATA_FILE_BUILTINS))
def test_shipped_files_match_constructors(stem):
    files = data_files()
    alg = algfile.load(files[stem])
    assert algfile.same_algorithm(alg, load_builtin(DATA_FILE_BUILTINS[stem]))


def test_recursable_builtins_agree_with_oracle():
    for name in ("strassen2x2", "winograd2x2"):
        alg = load_builtin(name)
        A, B = rational_matrix(6, 6, 1), rational_matrix(6, 6, 2)
        assert exact_equal(apply_recursive(alg, A, B, 1), straightforward_mm(A, B))


def test_trilinear_identity_case():
    alg = load_builtin("strassen2x2")
    I = identity(2)
    assert trilinear_form_check(alg, I, I, I) == (2, 2)


def test_trilinear_random_and_perturbed():
    alg = load_builtin("strassen2x2")
    for seed in range(5):
        A, B, D = (rational_matrix(2, 2, 3 * seed + t) for t in range(3))
        tr, val = trilinear_form_check(alg, A, B, D)
        assert tr == val
    W = alg.W.copy()
    W[1, 2] = 1 - W[1, 2]
    bad = alg.with_coefficients(W=W)
    assert any(len(set(trilinear_form_check(bad, *(rational_matrix(2, 2, 3 * s + t) for t in range(3))))) == 2
               for s in range(10))
    with pytest.raises(DimensionError):
        trilinear_form_check(alg, identity(2), identity(2), identity(3))
