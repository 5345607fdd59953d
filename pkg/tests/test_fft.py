import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastmm.fft import (MatrixPolynomial, complex_mm_3m, complex_mm_4m, convolve, fft, ifft, inner_from_algorithm,
                        poly_mm, select_fft_size, straight_convolve)
from fastmm.ring import DimensionError, OpCounter, mpq, seeded_random_matrix
from fastmm.zoo import strassen2x2

from conftest import exact_equal


def test_fft_unit_vector():
    assert np.allclose(fft(np.array([0, 1, 0, 0])), [1, 1j, -1, -1j])
    assert np.allclose(fft(np.ones(1)), [1])


def test_fft_counts():
    c = OpCounter()
    fft(np.ones(16), c)
    assert c.counts == (8 * 4, 16 * 4)


def test_fft_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        fft(np.ones(6))


@pytest.mark.parametrize("K", [1, 2, 8, 64, 4096])
def test_round_trip(K):
    x = np.random.default_rng(K).normal(size=K) + 1j
    assert np.abs(ifft(fft(x)) - x).max() <= 1e-9


def test_fft_matches_evaluation():
    v = np.random.default_rng(0).normal(size=8)
    w = np.exp(2j * np.pi / 8)
    expected = [np.polyval(v[::-1], w**t) for t in range(8)]
    assert np.allclose(fft(v), expected)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 100, 511])
def test_size_selection(n):
    K = select_fft_size(n)
    assert 2 * n < K <= 4 * n
    assert K == 2 ** (2 + int(np.floor(np.log2(n))))
    assert select_fft_size(3) == 8


def test_convolve_exact_path():
    a = np.array([mpq(1, 2), 3], dtype=object)
    b = np.array([2, mpq(-1, 3)], dtype=object)
    assert list(convolve(a, b)) == [1, mpq(35, 6), -1]
    assert list(convolve(np.array([1, 2]), np.array([3, 4]))) == [3, 10, 8]
    with pytest.raises(ValueError):
        convolve(np.array([]), np.array([1.0]))


@pytest.mark.parametrize("deg", [0, 1, 7, 100, 511])
def test_convolve_float_oracle(deg):
    rng = np.random.default_rng(deg)
    a, b = rng.uniform(-1, 1, deg + 1), rng.uniform(-1, 1, deg + 1)
    assert np.abs(convolve(a, b) - straight_convolve(a, b)).max() <= 1e-9


def _polys(n, d, seed):
    rng = np.random.default_rng(seed)
    return MatrixPolynomial(rng.uniform(-1, 1, (d, n, n))), MatrixPolynomial(rng.uniform(-1, 1, (d, n, n)))


@pytest.mark.parametrize("d", [1, 3, 8])
def test_poly_methods_agree(d):
    Ax, Bx = _polys(3, d, d)
    ref = poly_mm(Ax, Bx, "straight").coeffs
    for method in ("coeff-fft", "matrix-coeff-fft"):
        assert np.abs(poly_mm(Ax, Bx, method).coeffs - ref).max() <= 1e-9


def test_matrix_fft_inner_call_count():
    Ax, Bx = _polys(4, 8, 1)
    c = OpCounter()
    poly_mm(Ax, Bx, "matrix-coeff-fft", inner_from_algorithm(strassen2x2()), c)
    assert c.events["inner_mm"] == select_fft_size(7) == 16
    c = OpCounter()
    poly_mm(Ax, Bx, "straight", counter=c)
    assert c.events["inner_mm"] == 64


def test_poly_exact_straight_and_rejections():
    A = MatrixPolynomial(np.array([[[1, 2], [3, 4]], [[0, 1], [1, 0]]], dtype=object))
    C = poly_mm(A, A, "straight")
    assert C.degree_bound == 3
    assert exact_equal(C(2), A(2).dot(A(2)))
    with pytest.raises(TypeError):
        poly_mm(A, A, "coeff-fft")
    with pytest.raises(ValueError):
        poly_mm(A, A, "karatsuba")
    with pytest.raises(DimensionError):
        MatrixPolynomial(np.ones((2, 2)))


@pytest.mark.parametrize("N", [2, 5, 10])
def test_3m_counts_and_values(N):
    parts = [seeded_random_matrix(N, N, "int", s) for s in range(4)]
    c = OpCounter()
    C1, C2 = complex_mm_3m(*parts, counter=c)
    R1, R2 = complex_mm_4m(*parts)
    assert exact_equal(C1, R1) and exact_equal(C2, R2)
    assert c.counts == (3 * N**3, 3 * N**3 + 2 * N**2)
    assert c.events["inner_mm"] == 3


def test_3m_dimension_check():
    with pytest.raises(DimensionError):
        complex_mm_3m(np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2)), np.ones((2, 2)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=40), st.lists(st.floats(-10, 10), min_size=1, max_size=40))
def test_convolution_property(a, b):
    a, b = np.array(a), np.array(b)
    assert np.abs(convolve(a, b) - straight_convolve(a, b)).max() <= 1e-9 * max(1.0, np.abs(a).sum() * np.abs(b).sum())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 12), st.integers(0, 10**6))
def test_fft_linearity(logk, seed):
    K = 2**logk
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=K), rng.normal(size=K)
    assert np.allclose(fft(2 * x + y), 2 * fft(x) + fft(y), atol=1e-9 * K)
