"""Timing, crossover search and float-versus-exact stability measurements."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .aggregation import apa_apply, apa_pair
from .engine import DecompositionAlgorithm, apply_recursive, recursive_counts
from .ring import OpCounter, mpq, seeded_random_matrix, straightforward_mm, to_ring

# Float error of a recursive algorithm may grow by at most this factor per
# extra recursion level before the stability report flags it.
STABILITY_RATIO_BOUND = 16.0


def time_min(fn, reps=3, warmup=1):
    """Minimum wall time of ``reps`` calls after ``warmup`` untimed calls."""
    for _ in range(warmup):
        fn()
    best = float("inf")
    for _ in range(max(reps, 1)):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


# -- crossover --------------------------------------------------------------------------


@dataclass
class CrossoverRow:
    size: int
    cutoff: int
    fast_muls: int
    fast_adds: int
    fast_ops: int
    straight_ops: int
    opcount_win: bool
    fast_seconds: float
    straight_seconds: float
    time_win: bool


def crossover_table(alg: DecompositionAlgorithm, sizes, cutoff=1, reps=3, time_limit_size=256, seed=0):
    """Fast recursion versus the straightforward method per size.

    Operation counts come from a data-free dry run and are exact for every
    size. Wall times (float64, machine dependent) are measured only up to
    ``time_limit_size``; larger sizes report NaN.
    """
    rows = []
    for n in sorted(set(int(s) for s in sizes)):
        c = recursive_counts(alg, n, cutoff)
        straight = n**3 + (n**3 - n**2)
        fast = c.ring_muls + c.ring_adds + c.const_muls
        ft = st = float("nan")
        if n <= time_limit_size:
            A = seeded_random_matrix(n, n, "float", seed)
            B = seeded_random_matrix(n, n, "float", seed + 1)
            ft = time_min(lambda: apply_recursive(alg, A, B, cutoff), reps)
            st = time_min(lambda: straightforward_mm(A, B), reps)
        rows.append(CrossoverRow(n, cutoff, c.ring_muls, c.ring_adds, fast, straight, fast < straight,
                                 ft, st, bool(ft < st)))
    return rows


def first_win(rows, key):
    for r in rows:
        if getattr(r, key):
            return r.size
    return None


# -- stability ------------------------------------------------------------------------------


@dataclass
class StabilityReport:
    size: int
    algorithm: str
    cutoff: int
    distribution: str
    max_rel_error: float
    input_bound: float
    levels: int


def _binary_scale(X):
    """(integer object array, s) with X == ints / 2**s exactly."""
    s = 0
    for x in X.reshape(-1):
        den = float(x).as_integer_ratio()[1]
        s = max(s, den.bit_length() - 1)
    ints = np.empty(X.shape, dtype=object)
    ints.reshape(-1)[:] = [int(float(x) * 2**s) if s < 1000 else int(mpq(float(x)) * 2**s) for x in X.reshape(-1)]
    return ints, s


def _exact_reference(A, B):
    """Exact product of two float matrices, as Python ints or mpq entries."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    integral = np.all(A == np.round(A)) and np.all(B == np.round(B))
    if integral and np.abs(A).max(initial=0) * np.abs(B).max(initial=0) * A.shape[1] < 2**62:
        C = A.astype(np.int64) @ B.astype(np.int64)
        return C.astype(object)
    Ai, sa = _binary_scale(A)
    Bi, sb = _binary_scale(B)
    C = Ai.dot(Bi)
    den = mpq(2) ** (sa + sb)
    return np.array([mpq(x) / den for x in C.reshape(-1)], dtype=object).reshape(C.shape)


def max_relative_error(C, exact):
    """max |C - exact| / max |exact|, evaluated exactly where C is float."""
    Cq = to_ring(C, "rational")
    diff = max(abs(x) for x in (Cq - exact).reshape(-1))
    scale = max(abs(x) for x in exact.reshape(-1))
    if scale == 0:
        return float(diff)
    return float(diff / scale)


def stability_report(alg: DecompositionAlgorithm | None, sizes, cutoff=1, seed=0, distribution="int"):
    """Float run versus exact rational run on identical inputs.

    ``alg=None`` measures the straightforward method. Integer inputs lie in
    [-9, 9]; float inputs are uniform in [-1, 1) and enter the rational run
    with their exact binary values.
    """
    out = []
    for n in sizes:
        A = seeded_random_matrix(n, n, distribution, seed, ring="f64")
        B = seeded_random_matrix(n, n, distribution, seed + 1, ring="f64")
        exact = _exact_reference(A, B)
        if alg is None:
            C = straightforward_mm(A, B)
            name, levels = "straightforward", 0
        else:
            C = apply_recursive(alg, A, B, cutoff)
            name = alg.name
            levels, N = 0, n
            while N > cutoff:
                N = -(-N // alg.target.k)
                levels += 1
        bound = float(max(np.abs(A).max(), np.abs(B).max()))
        out.append(StabilityReport(n, name, cutoff, distribution, max_relative_error(C, exact), bound, levels))
    return out


def growth_ratios(reports):
    """Error ratio between consecutive recursion levels (zero errors are skipped)."""
    ratios = []
    for prev, cur in zip(reports, reports[1:]):
        if prev.max_rel_error > 0 and cur.levels > prev.levels:
            ratios.append((cur.max_rel_error / prev.max_rel_error) ** (1 / (cur.levels - prev.levels)))
    return ratios


def apa_lambda_ladder(k=2, m=2, n=2, exponents=range(4, 31), seed=0):
    """Float error of the APA pair at lambda = 2^-t against the exact products.

    Returns (rows, knee) where knee is the t with the smallest error: beyond
    it cancellation in the lambda^-2 scaling dominates.
    """
    alg = apa_pair(k, m, n)
    A = seeded_random_matrix(k, m, "float", seed)
    U = seeded_random_matrix(m, n, "float", seed + 1)
    B = seeded_random_matrix(m, n, "float", seed + 2)
    V = seeded_random_matrix(n, k, "float", seed + 3)
    ref = [_exact_reference(A, B), _exact_reference(U, V)]
    rows = []
    for t in exponents:
        lam = 2.0**-t
        C1, C2 = apa_apply(alg, [A, U], [B, V], lam)
        err = max(max_relative_error(C1, ref[0]), max_relative_error(C2, ref[1]))
        rows.append({"t": int(t), "lambda": lam, "error": err})
    knee = min(rows, key=lambda r: r["error"])["t"]
    return rows, knee


# -- kernel benchmark ------------------------------------------------------------------------------


def kernel_benchmark(mm_sizes=(32, 64, 128), fft_sizes=(256, 1024, 4096), reps=5, seed=0):
    """Wall time of each hot kernel under the numba and numpy implementations."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in mm_sizes:
        A = rng.uniform(-1, 1, (n, n))
        B = rng.uniform(-1, 1, (n, n))
        for backend in ("numba", "numpy"):
            t = time_min(lambda: kernels.matmul(A, B, backend=backend), reps)
            rows.append({"kernel": "matmul", "size": n, "backend": backend, "seconds": t})
    for K in fft_sizes:
        x = rng.normal(size=K) + 1j * rng.normal(size=K)
        tw = np.exp(2j * np.pi * np.arange(K // 2) / K)
        perm = kernels.bit_reverse_permutation(K)
        for backend in ("numba", "numpy"):
            t = time_min(lambda: kernels.fft_inplace(x[perm].copy(), tw, backend=backend), reps)
            rows.append({"kernel": "fft", "size": K, "backend": backend, "seconds": t})
    for r in (7, 49):
        dim = 4 if r == 7 else 16
        U, V, W = (rng.integers(-1, 2, (dim, r)).astype(float) for _ in range(3))
        T = np.zeros((dim, dim, dim))
        for backend in ("numba", "numpy"):
            t = time_min(lambda: kernels.brent_residual(U, V, W, T, backend=backend), reps)
            rows.append({"kernel": "brent", "size": r, "backend": backend, "seconds": t})
    return rows


def as_rows(items):
    return [asdict(x) if hasattr(x, "__dataclass_fields__") else dict(x) for x in items]


def count_check(alg, n, cutoff):
    """(measured, predicted) op counts of one exact recursive product of size n."""
    A = seeded_random_matrix(n, n, "int", 0)
    B = seeded_random_matrix(n, n, "int", 1)
    c = OpCounter()
    apply_recursive(alg, A, B, cutoff, c)
    p = recursive_counts(alg, n, cutoff)
    return (c.ring_muls, c.ring_adds), (p.ring_muls, p.ring_adds)
