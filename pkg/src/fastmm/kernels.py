"""Hot float kernels, each with a numba and a pure-numpy implementation.

Both implementations of a kernel perform the same floating point operations
in the same order. Real kernels agree bit for bit; complex products may round
differently in the last bit (vectorized numpy loops can fuse multiply-adds).
The numpy versions also accept object arrays (exact rings).
"""
import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = ["matmul", "fft_inplace", "brent_residual", "KERNELS", "bit_reverse_permutation"]


# -- straightforward matrix product ----------------------------------------


def _matmul_numpy(A, B):
    k, m = A.shape
    n = B.shape[1]
    C = np.zeros((k, n), dtype=np.result_type(A, B))
    for j in range(m):
        C += np.multiply.outer(A[:, j], B[j, :])
    return C


def _matmul_loops(A, B):
    k, m = A.shape
    n = B.shape[1]
    C = np.zeros((k, n), dtype=A.dtype)
    for i in range(k):
        for h in range(n):
            acc = C[i, h]
            for j in range(m):
                acc += A[i, j] * B[j, h]
            C[i, h] = acc
    return C


# -- radix-2 FFT ------------------------------------------------------------


def bit_reverse_permutation(K):
    bits = K.bit_length() - 1
    idx = np.arange(K)
    rev = np.zeros(K, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _fft_numpy(x, tw):
    # x is bit-reversed; tw[j] = omega_K**j for j < K/2
    K = x.shape[0]
    L = 2
    while L <= K:
        half = L // 2
        w = tw[:: K // L][:half]
        X = x.reshape(K // L, L)
        even = X[:, :half].copy()
        odd = X[:, half:] * w
        X[:, :half] = even + odd
        X[:, half:] = even - odd
        L *= 2
    return x


def _fft_loops(x, tw):
    K = x.shape[0]
    L = 2
    while L <= K:
        half = L // 2
        stride = K // L
        for start in range(0, K, L):
            for j in range(half):
                t = x[start + j + half] * tw[j * stride]
                u = x[start + j]
                x[start + j] = u + t
                x[start + j + half] = u - t
        L *= 2
    return x


# -- Brent residual (float validation) ---------------------------------------


def _brent_residual_numpy(U, V, W, T):
    return float(np.max(np.abs(np.einsum("iq,jq,hq->ijh", U, V, W) - T), initial=0.0))


def _brent_residual_loops(U, V, W, T):
    a, b, g = T.shape
    r = U.shape[1]
    worst = 0.0
    for i in range(a):
        for j in range(b):
            for h in range(g):
                s = 0.0
                for q in range(r):
                    s += U[i, q] * V[j, q] * W[h, q]
                d = abs(s - T[i, j, h])
                if d > worst:
                    worst = d
    return worst


if njit is not None:
    _matmul_nb = njit(_matmul_loops)
    _fft_nb = njit(_fft_loops)
    _brent_nb = njit(_brent_residual_loops)
else:  # pragma: no cover
    _matmul_nb = _fft_nb = _brent_nb = None

KERNELS = {
    "numpy": {"matmul": _matmul_numpy, "fft": _fft_numpy, "brent": _brent_residual_numpy},
    "numba": {"matmul": _matmul_nb, "fft": _fft_nb, "brent": _brent_nb},
}

_ACTIVE = KERNELS["numba" if USE_NUMBA else "numpy"]


def matmul(A, B, backend=None):
    """Definition-order product of two float or complex matrices."""
    if A.dtype == object or B.dtype == object:
        return _matmul_numpy(A, B)
    kern = KERNELS[backend]["matmul"] if backend else _ACTIVE["matmul"]
    dt = np.result_type(A.dtype, B.dtype)
    return kern(np.ascontiguousarray(A, dtype=dt), np.ascontiguousarray(B, dtype=dt))


def fft_inplace(x, tw, backend=None):
    kern = KERNELS[backend]["fft"] if backend else _ACTIVE["fft"]
    return kern(x, tw)


def brent_residual(U, V, W, T, backend=None):
    kern = KERNELS[backend]["brent"] if backend else _ACTIVE["brent"]
    args = [np.ascontiguousarray(M, dtype=np.float64) for M in (U, V, W, T)]
    return float(kern(*args))
