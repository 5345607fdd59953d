"""Radix-2 FFT, convolution, polynomial matrix products and 3M complex MM.

Conventions: omega_K = exp(2 pi i / K); the forward transform evaluates
p(x) = sum_j v_j x^j at omega_K^0, ..., omega_K^(K-1) without normalization,
and the inverse applies the conjugate transform followed by a 1/K scaling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .engine import DecompositionAlgorithm, apply_recursive
from .ring import DimensionError, OpCounter, straightforward_mm


def _is_pow2(K):
    return K >= 1 and K & (K - 1) == 0


def _twiddles(K, inverse=False):
    j = np.arange(max(K // 2, 1))
    sign = -1.0 if inverse else 1.0
    return np.exp(sign * 2j * np.pi * j / K)


def _transform(v, inverse, counter, backend):
    x = np.asarray(v, dtype=np.complex128)
    if x.ndim != 1:
        raise DimensionError("fft expects a vector")
    K = x.shape[0]
    if not _is_pow2(K):
        raise ValueError(f"length {K} is not a power of two")
    x = x[kernels.bit_reverse_permutation(K)].copy()
    kernels.fft_inplace(x, _twiddles(K, inverse), backend=backend)
    if counter is not None:
        stages = K.bit_length() - 1
        counter.tally(muls=(K // 2) * stages, adds=K * stages)
    return x


def fft(v, counter: OpCounter | None = None, backend=None):
    """Values of sum_j v_j x^j at the K-th roots of unity omega_K^t, t = 0..K-1.

    Uses (K/2) log2 K multiplications and K log2 K additions.
    """
    return _transform(v, False, counter, backend)


def ifft(v, counter: OpCounter | None = None, backend=None):
    """Inverse of :func:`fft`: conjugate transform, then division by K."""
    x = _transform(v, True, counter, backend)
    K = x.shape[0]
    if counter is not None:
        counter.tally(const=K)
    return x / K


def select_fft_size(deg_a, deg_b=None):
    """Least power of two strictly greater than the product degree.

    For two degree-n inputs this is 2^(2 + floor(log2 n)), which lies in (2n, 4n].
    """
    deg_b = deg_a if deg_b is None else deg_b
    if deg_a < 0 or deg_b < 0:
        raise ValueError("degrees must be non-negative")
    total = deg_a + deg_b
    K = 1
    while K <= total:
        K *= 2
    return K


def straight_convolve(a, b, counter: OpCounter | None = None):
    """c_h = sum_g a_g b_(h-g) by the definition; exact for exact entries."""
    a, b = np.asarray(a), np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("convolution of an empty sequence")
    dt = object if object in (a.dtype, b.dtype) else np.result_type(a, b)
    c = np.zeros(a.size + b.size - 1, dtype=dt)
    if dt == object:
        c[:] = 0
    for g in range(a.size):
        c[g:g + b.size] = c[g:g + b.size] + a[g] * b
    if counter is not None:
        counter.tally(muls=a.size * b.size, adds=a.size * b.size - c.size)
    return c


def convolve(a, b, counter: OpCounter | None = None, backend=None):
    """Coefficients of the product polynomial.

    Float and complex inputs go through evaluation at K roots of unity,
    pointwise products and interpolation; exact inputs use the definition.
    """
    a, b = np.asarray(a), np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("convolution of an empty sequence")
    if a.dtype == object or b.dtype == object or a.dtype.kind in "iub" and b.dtype.kind in "iub":
        return straight_convolve(a.astype(object) if a.dtype.kind in "iub" else a,
                                 b.astype(object) if b.dtype.kind in "iub" else b, counter)
    K = select_fft_size(a.size - 1, b.size - 1)
    fa = fft(_pad(a, K), counter, backend)
    fb = fft(_pad(b, K), counter, backend)
    if counter is not None:
        counter.tally(muls=K)
    c = ifft(fa * fb, counter, backend)[: a.size + b.size - 1]
    if a.dtype.kind != "c" and b.dtype.kind != "c":
        return c.real.copy()
    return c


def _pad(v, K):
    out = np.zeros(K, dtype=np.complex128)
    out[: v.size] = v
    return out


# -- polynomials with matrix coefficients --------------------------------------------------


@dataclass(frozen=True)
class MatrixPolynomial:
    """sum_t coeffs[t] x^t with coeffs of shape (d, rows, cols); d is the degree bound."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 3 or c.shape[0] < 1:
            raise DimensionError("coefficients must have shape (d, rows, cols) with d >= 1")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree_bound(self):
        return self.coeffs.shape[0]

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def __call__(self, x):
        acc = self.coeffs[-1] * 1
        for t in range(self.degree_bound - 2, -1, -1):
            acc = acc * x + self.coeffs[t]
        return acc


def inner_from_algorithm(alg: DecompositionAlgorithm, cutoff=1):
    """Matrix-product callable backed by recursive application of ``alg``."""

    def inner(A, B, counter=None):
        return apply_recursive(alg, A, B, cutoff=cutoff, counter=counter)

    inner.__name__ = f"recursive[{alg.name}, cutoff={cutoff}]"
    return inner


def _call_inner(inner_mm, A, B, counter):
    if counter is not None:
        counter.note("inner_mm")
    return inner_mm(A, B, counter)


POLY_METHODS = ("straight", "coeff-fft", "matrix-coeff-fft")


def poly_mm(Ax: MatrixPolynomial, Bx: MatrixPolynomial, method="straight", inner_mm=None,
            counter: OpCounter | None = None, backend=None) -> MatrixPolynomial:
    """C(x) = A(x) B(x).

    straight:          C_t = sum_{s+u=t} A_s B_u, one inner product per pair
    coeff-fft:         one FFT convolution per scalar term a_ij(x) b_jh(x)
    matrix-coeff-fft:  evaluate A and B at K roots of unity, K inner products,
                       then interpolate

    ``inner_mm(A, B, counter)`` multiplies matrices (default: straightforward).
    Each call is recorded as an ``inner_mm`` event on the counter.
    """
    if method not in POLY_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {POLY_METHODS}")
    inner_mm = inner_mm or straightforward_mm
    A, B = Ax.coeffs, Bx.coeffs
    if A.shape[2] != B.shape[1]:
        raise DimensionError(f"cannot multiply {A.shape[1:]} by {B.shape[1:]} coefficients")
    dA, dB = A.shape[0], B.shape[0]
    rows, cols = A.shape[1], B.shape[2]
    exact = A.dtype == object or B.dtype == object or (A.dtype.kind in "iub" and B.dtype.kind in "iub")

    if method == "straight":
        dt = object if exact else np.result_type(A, B)
        C = np.zeros((dA + dB - 1, rows, cols), dtype=dt)
        if dt == object:
            C[...] = 0
        A_ = A.astype(object) if exact else A
        B_ = B.astype(object) if exact else B
        for s in range(dA):
            for u in range(dB):
                C[s + u] = C[s + u] + _call_inner(inner_mm, A_[s], B_[u], counter)
        return MatrixPolynomial(C)

    if exact:
        raise TypeError(f"method {method!r} needs float or complex coefficients")
    real = A.dtype.kind != "c" and B.dtype.kind != "c"

    if method == "coeff-fft":
        inner_dim = A.shape[2]
        C = np.zeros((dA + dB - 1, rows, cols), dtype=np.complex128)
        for i in range(rows):
            for h in range(cols):
                for j in range(inner_dim):
                    C[:, i, h] += convolve(A[:, i, j].astype(np.complex128), B[:, j, h].astype(np.complex128),
                                           counter, backend)
        return MatrixPolynomial(C.real.copy() if real else C)

    K = select_fft_size(dA - 1, dB - 1)
    Ahat = _fft_axis0(A, K, counter, backend)
    Bhat = _fft_axis0(B, K, counter, backend)
    Chat = np.empty((K, rows, cols), dtype=np.complex128)
    for t in range(K):
        Chat[t] = _call_inner(inner_mm, Ahat[t], Bhat[t], counter)
    C = _fft_axis0(Chat, K, counter, backend, inverse=True)[: dA + dB - 1]
    return MatrixPolynomial(C.real.copy() if real else C)


def _fft_axis0(X, K, counter, backend, inverse=False):
    out = np.empty((K,) + X.shape[1:], dtype=np.complex128)
    for idx in np.ndindex(X.shape[1:]):
        col = _pad(np.asarray(X[(slice(None),) + idx]), K)
        out[(slice(None),) + idx] = (ifft if inverse else fft)(col, counter, backend)
    return out


# -- complex products with three real ones -----------------------------------------------


def complex_mm_3m(A1, A2, B1, B2, inner_mm=None, counter: OpCounter | None = None):
    """(A1 + i A2)(B1 + i B2) = C1 + i C2 with three real matrix products.

    P1 = A1 B1, P2 = A2 B2, P3 = (A1 + A2)(B1 + B2);
    C1 = P1 - P2, C2 = P3 - P1 - P2.
    """
    inner_mm = inner_mm or straightforward_mm
    A1, A2, B1, B2 = (np.asarray(X) for X in (A1, A2, B1, B2))
    if A1.shape != A2.shape or B1.shape != B2.shape or A1.ndim != 2 or A1.shape[1] != B1.shape[0]:
        raise DimensionError("real and imaginary parts must conform")
    k, m = A1.shape
    n = B1.shape[1]
    counter = counter if counter is not None else OpCounter()
    P1 = _call_inner(inner_mm, A1, B1, counter)
    P2 = _call_inner(inner_mm, A2, B2, counter)
    SA = A1 + A2
    SB = B1 + B2
    counter.tally(adds=k * m + m * n)
    P3 = _call_inner(inner_mm, SA, SB, counter)
    C1 = P1 - P2
    C2 = P3 - P1 - P2
    counter.tally(adds=3 * k * n)
    return C1, C2


def complex_mm_4m(A1, A2, B1, B2, counter: OpCounter | None = None):
    """Reference: C1 = A1 B1 - A2 B2, C2 = A1 B2 + A2 B1 with four products."""
    C1 = straightforward_mm(A1, B1, counter) - straightforward_mm(A2, B2, counter)
    C2 = straightforward_mm(A1, B2, counter) + straightforward_mm(A2, B1, counter)
    if counter is not None:
        counter.tally(adds=2 * C1.size)
    return C1, C2
