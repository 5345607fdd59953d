"""Scalar rings, dense matrices, operation counting and the straightforward MM oracle.

Matrices are plain 2-D numpy arrays. The ring is carried by the dtype:

=========  ==============================================
ring       representation
=========  ==============================================
f64        ``float64``
complex    ``complex128``
rational   ``object`` array of ``gmpy2.mpq``
bigint     ``object`` array of Python ``int``
=========  ==============================================

Exact rings are the ground truth for correctness checks; floats are used for
timing and stability measurements only.
"""
from __future__ import annotations

import contextlib
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import gmpy2
import numpy as np

from . import kernels

RINGS = ("f64", "complex", "rational", "bigint")
EXACT_RINGS = ("rational", "bigint")

mpq = gmpy2.mpq


class DimensionError(ValueError):
    """Operands do not conform."""


class NonRecursableError(ValueError):
    """The algorithm relies on commutativity and cannot take matrix blocks."""


# -- rings --------------------------------------------------------------------


def _is_integral(x):
    if isinstance(x, (int, np.integer)):
        return True
    if isinstance(x, (Fraction, type(mpq(0)))):
        return x.denominator == 1
    return False


def ring_of(A) -> str:
    A = np.asarray(A)
    if A.dtype == np.float64 or A.dtype.kind in "f":
        return "f64"
    if A.dtype.kind == "c":
        return "complex"
    if A.dtype.kind in "iub":
        return "bigint"
    if A.dtype == object:
        flat = A.ravel()
        if all(isinstance(x, (int, np.integer)) for x in flat):
            return "bigint"
        return "rational"
    raise TypeError(f"unsupported dtype {A.dtype}")


def to_scalar(x, ring):
    if ring == "f64":
        return float(x)
    if ring == "complex":
        return complex(x)
    if ring == "rational":
        if isinstance(x, float):
            return mpq(x)  # exact binary value
        if isinstance(x, Fraction):
            return mpq(x.numerator, x.denominator)
        return mpq(x)
    if ring == "bigint":
        if not _is_integral(x):
            raise ValueError(f"{x!r} is not an integer")
        return int(x)
    raise ValueError(f"unknown ring {ring!r}")


def to_ring(A, ring):
    """Return a copy of ``A`` with entries in ``ring``."""
    A = np.asarray(A)
    if ring == "f64":
        if A.dtype == object:
            return np.array([float(x) for x in A.ravel()], dtype=np.float64).reshape(A.shape)
        return A.astype(np.float64)
    if ring == "complex":
        if A.dtype == object:
            return np.array([complex(x) for x in A.ravel()], dtype=np.complex128).reshape(A.shape)
        return A.astype(np.complex128)
    if ring in EXACT_RINGS:
        if A.dtype.kind == "f" and ring == "rational":
            vals = [mpq(float(x)) for x in A.ravel()]
        elif A.dtype.kind in "iub":
            vals = [to_scalar(int(x), ring) for x in A.ravel()]
        else:
            vals = [to_scalar(x, ring) for x in A.ravel()]
        out = np.empty(A.shape, dtype=object)
        out.ravel()[:] = vals if vals else []
        return out
    raise ValueError(f"unknown ring {ring!r}")


def zeros(shape, ring):
    if ring == "f64":
        return np.zeros(shape)
    if ring == "complex":
        return np.zeros(shape, dtype=np.complex128)
    out = np.empty(shape, dtype=object)
    out.fill(mpq(0) if ring == "rational" else 0)
    return out


def identity(n, ring="bigint"):
    return to_ring(np.eye(n, dtype=np.int64), ring)


def is_exact(A) -> bool:
    return np.asarray(A).dtype == object


def seeded_random_matrix(rows, cols, distribution="int", seed=0, ring=None):
    """Deterministic random matrix from numpy's PCG64 generator.

    ``distribution="int"`` draws integers uniformly from [-9, 9]
    (default ring ``bigint``); ``"float"`` draws uniformly from [-1, 1)
    (default ring ``f64``).
    """
    if rows < 1 or cols < 1:
        raise DimensionError(f"invalid dimensions {rows}x{cols}")
    rng = np.random.default_rng(seed)
    if distribution == "int":
        raw = rng.integers(-9, 10, size=(rows, cols))
        return to_ring(raw, ring or "bigint")
    if distribution == "float":
        raw = rng.uniform(-1.0, 1.0, size=(rows, cols))
        return to_ring(raw, ring or "f64")
    raise ValueError(f"unknown distribution {distribution!r}")


# -- operation counting ----------------------------------------------------------


@dataclass
class OpCounter:
    """Tally of ring multiplications, additions/subtractions and constant scalings.

    Multiplications by 0, 1 and -1 are free. Counts are also split by the
    currently active ``phase`` label; ``events`` records named calls.
    """

    ring_muls: int = 0
    ring_adds: int = 0
    const_muls: int = 0
    phase: str = "total"
    by_phase: dict = field(default_factory=dict)
    events: Counter = field(default_factory=Counter)

    def tally(self, muls=0, adds=0, const=0):
        if muls < 0 or adds < 0 or const < 0:
            raise ValueError("operation counts are non-negative")
        self.ring_muls += muls
        self.ring_adds += adds
        self.const_muls += const
        slot = self.by_phase.setdefault(self.phase, [0, 0, 0])
        slot[0] += muls
        slot[1] += adds
        slot[2] += const

    def note(self, event, times=1):
        self.events[event] += times

    @contextlib.contextmanager
    def in_phase(self, label):
        prev, self.phase = self.phase, label
        try:
            yield self
        finally:
            self.phase = prev

    def merge(self, other: "OpCounter"):
        self.ring_muls += other.ring_muls
        self.ring_adds += other.ring_adds
        self.const_muls += other.const_muls
        for k, v in other.by_phase.items():
            slot = self.by_phase.setdefault(k, [0, 0, 0])
            for t in range(3):
                slot[t] += v[t]
        self.events.update(other.events)
        return self

    def __add__(self, other):
        return OpCounter().merge(self).merge(other)

    @property
    def counts(self):
        return (self.ring_muls, self.ring_adds)

    def as_dict(self):
        return {
            "ring_muls": self.ring_muls,
            "ring_adds": self.ring_adds,
            "const_muls": self.const_muls,
            "by_phase": {k: list(v) for k, v in self.by_phase.items()},
            "events": dict(self.events),
        }


def _tally(counter, muls=0, adds=0, const=0):
    if counter is not None:
        counter.tally(muls, adds, const)


# -- matrix multiplication oracles ------------------------------------------------------------


def _check_mm(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or B.ndim != 2:
        raise DimensionError("matrix operands must be 2-D")
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply {A.shape[0]}x{A.shape[1]} by {B.shape[0]}x{B.shape[1]}")
    return A, B


def straightforward_mm(A, B, counter=None):
    """C = AB by the definition c_ih = sum_j a_ij b_jh.

    Costs kmn multiplications and kmn - kn additions.
    """
    A, B = _check_mm(A, B)
    k, m = A.shape
    n = B.shape[1]
    _tally(counter, muls=k * m * n, adds=k * n * (m - 1))
    if A.dtype == object or B.dtype == object:
        return kernels.matmul(A.astype(object), B.astype(object))
    return kernels.matmul(A, B)


def commutative_mm_even(A, B, counter=None, recurse=False):
    """Winograd's 1968 commutative scheme for n x n matrices with n even.

    Every inner product is rewritten as
    sum_i (a_{2i-1} + b_{2i})(b_{2i-1} + a_{2i}) - sum_i a_{2i-1} a_{2i} - sum_i b_{2i-1} b_{2i},
    with the two correction sums shared along rows of A and columns of B.
    Uses 0.5 n^3 + n^2 multiplications and 1.5 n^3 + 2 n^2 - 2 n additions.

    The identity needs ``a b = b a`` for the entries, so it cannot be applied
    to matrix blocks; ``recurse=True`` raises :class:`NonRecursableError`.
    """
    if recurse:
        raise NonRecursableError(
            "commutative_mm_even multiplies entries of A with entries of A and relies on "
            "commuting scalars; substituting matrix blocks breaks the identity"
        )
    A, B = _check_mm(A, B)
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n):
        raise DimensionError("commutative_mm_even needs square matrices of equal size")
    if n % 2:
        raise DimensionError(f"commutative_mm_even needs even n, got {n}")
    half = n // 2
    odd_a, even_a = A[:, 0::2], A[:, 1::2]  # a_{i,2t-1}, a_{i,2t}
    odd_b, even_b = B[0::2, :], B[1::2, :]  # b_{2t-1,h}, b_{2t,h}

    row_corr = [_pair_sum(odd_a[i, :], even_a[i, :]) for i in range(n)]
    col_corr = [_pair_sum(odd_b[:, h], even_b[:, h]) for h in range(n)]
    _tally(counter, muls=2 * n * half, adds=2 * n * (half - 1))

    C = np.empty((n, n), dtype=np.result_type(A, B))
    for i in range(n):
        for h in range(n):
            acc = None
            for t in range(half):
                term = (odd_a[i, t] + even_b[t, h]) * (odd_b[t, h] + even_a[i, t])
                acc = term if acc is None else acc + term
            C[i, h] = acc - row_corr[i] - col_corr[h]
    # per entry: n aggregate sums, half-1 accumulations, 2 corrections
    _tally(counter, muls=n * n * half, adds=n * n * (n + half - 1 + 2))
    return C


def _pair_sum(x, y):
    acc = x[0] * y[0]
    for t in range(1, len(x)):
        acc = acc + x[t] * y[t]
    return acc


# -- norms -----------------------------------------------------------------------------


class ExactSquaredNorm(NamedTuple):
    """Exact squared norm(s) of an exact-ring matrix; no square root is taken."""

    value: object
    squared: bool = True


def _abs2(A):
    if A.dtype.kind == "c":
        return (A.real**2 + A.imag**2)
    return A * A


def frobenius_norm(A):
    A = np.asarray(A)
    if A.dtype == object:
        return ExactSquaredNorm(sum(_abs2(A).ravel(), mpq(0)))
    return float(np.sqrt(np.sum(_abs2(A))))


def column_norms(A):
    A = np.asarray(A)
    if A.dtype == object:
        return ExactSquaredNorm(np.array([sum(col, mpq(0)) for col in _abs2(A).T], dtype=object))
    return np.sqrt(np.sum(_abs2(A), axis=0))


def row_norms(A):
    A = np.asarray(A)
    if A.dtype == object:
        return ExactSquaredNorm(np.array([sum(row, mpq(0)) for row in _abs2(A)], dtype=object))
    return np.sqrt(np.sum(_abs2(A), axis=1))
