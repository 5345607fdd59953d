"""Bilinear algorithms as coefficient triples (U, V, W).

Index convention (0-based, row index fastest):

* first operand  A (k x m):  a_ij   -> row j*k + i of U
* second operand B (m x n):  b_jh   -> row h*m + j of V
* output C = AB  (k x n):    c_ih   -> row i*n + h of W

The W index is the column-major index of the auxiliary n x k matrix D in the
trilinear form Trace(ABD), which is the row-major index of C. With these
choices the three roles are related by a plain cyclic shift, so duality is a
permutation of (U, V, W).

A triple decomposes the target tensor T when
``sum_q U[a, q] V[b, q] W[c, q] == T[a, b, c]`` for every (a, b, c).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .ring import (
    DimensionError,
    NonRecursableError,
    OpCounter,
    mpq,
    straightforward_mm,
    zeros,
)


class MMShape(NamedTuple):
    k: int
    m: int
    n: int

    @property
    def alpha(self):
        return self.k * self.m

    @property
    def beta(self):
        return self.m * self.n

    @property
    def gamma(self):
        return self.n * self.k

    @property
    def is_square(self):
        return self.k == self.m == self.n

    def __str__(self):
        return f"MM({self.k},{self.m},{self.n})"


class DisjointSpec(tuple):
    """Ordered list of MM shapes computed simultaneously."""

    def __new__(cls, shapes):
        shapes = tuple(MMShape(*s) for s in shapes)
        if not shapes:
            raise ValueError("a disjoint spec needs at least one shape")
        return super().__new__(cls, shapes)

    @property
    def alpha(self):
        return sum(s.alpha for s in self)

    @property
    def beta(self):
        return sum(s.beta for s in self)

    @property
    def gamma(self):
        return sum(s.gamma for s in self)

    def offsets(self, role):
        """Start offsets of each block along role 'alpha', 'beta' or 'gamma'."""
        out, pos = [], 0
        for s in self:
            out.append(pos)
            pos += getattr(s, role)
        return out

    def __repr__(self):
        return "DisjointSpec(" + ", ".join(str(s) for s in self) + ")"


def _dims_of(target):
    if isinstance(target, (MMShape, DisjointSpec)):
        return target.alpha, target.beta, target.gamma
    return tuple(np.asarray(target).shape)


# -- exact coefficient matrices ------------------------------------------------------


def exact_matrix(M):
    """Object array of mpq from ints, Fractions, strings or mpq."""
    M = np.asarray(M, dtype=object) if not isinstance(M, np.ndarray) else M
    out = np.empty(M.shape, dtype=object)
    flat = out.reshape(-1)
    for t, x in enumerate(M.reshape(-1)):
        if isinstance(x, (float, np.floating)):
            if not float(x).is_integer():
                raise ValueError(f"coefficient {x!r} is not an exact value")
            x = int(x)
        elif isinstance(x, np.integer):
            x = int(x)
        if hasattr(x, "numerator") and not isinstance(x, int):
            x = mpq(int(x.numerator), int(x.denominator))
        flat[t] = mpq(x)
    return out


def _common_denominator(M):
    den = 1
    for x in M.reshape(-1):
        den = math.lcm(den, int(x.denominator))
    return den


def _scaled_int(M):
    """(integer object array, denominator) with M == ints / den."""
    den = _common_denominator(M)
    ints = np.empty(M.shape, dtype=object)
    ints.reshape(-1)[:] = [int(x * den) for x in M.reshape(-1)]
    return ints, den


def _max_abs(M):
    return max((abs(int(x)) for x in M.reshape(-1)), default=0)


# -- straight-line linear programs -------------------------------------------------


@dataclass(frozen=True)
class LinearProgram:
    """Straight-line program computing linear forms with shared subexpressions.

    Values 0..n_inputs-1 are the inputs; step s defines value n_inputs+s as
    ``sum(c * value[src] for src, c in terms)``. ``outputs`` lists the value
    index of every form. A step with t terms costs t-1 additions and one
    constant multiplication per coefficient outside {1, -1}.
    """

    n_inputs: int
    steps: tuple
    outputs: tuple

    @classmethod
    def from_columns(cls, M):
        """One independent step per column of M (no sharing)."""
        n_in, r = M.shape
        steps = []
        for q in range(r):
            steps.append(tuple((i, M[i, q]) for i in range(n_in) if M[i, q] != 0))
        return cls(n_in, tuple(steps), tuple(n_in + q for q in range(r)))

    @property
    def adds(self):
        return sum(max(len(s) - 1, 0) for s in self.steps)

    @property
    def const_muls(self):
        return sum(1 for s in self.steps for _, c in s if c != 1 and c != -1)

    def run(self, inputs, coef=None, zero=None):
        """Evaluate on a sequence of values (scalars or array blocks)."""
        if len(inputs) != self.n_inputs:
            raise DimensionError(f"program expects {self.n_inputs} inputs, got {len(inputs)}")
        vals = list(inputs)
        for terms in self.steps:
            acc = None
            for src, c in terms:
                x = vals[src]
                if c == 1:
                    t = x
                elif c == -1:
                    if acc is not None:
                        acc = acc - x
                        continue
                    t = -x
                else:
                    t = (coef(c) if coef else c) * x
                acc = t if acc is None else acc + t
            if acc is None:
                acc = zero() if zero else 0
            vals.append(acc)
        return [vals[o] for o in self.outputs]

    def matrix(self):
        """The n_inputs x len(outputs) coefficient matrix this program computes."""
        basis = []
        for i in range(self.n_inputs):
            e = np.empty(self.n_inputs, dtype=object)
            e[:] = mpq(0)
            e[i] = mpq(1)
            basis.append(e)
        zero = lambda: np.array([mpq(0)] * self.n_inputs, dtype=object)  # noqa: E731
        cols = self.run(basis, coef=mpq, zero=zero)
        return np.stack(cols, axis=1) if cols else np.zeros((self.n_inputs, 0), dtype=object)


# -- algorithms ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DecompositionAlgorithm:
    """A rank-r triple (U, V, W) of exact coefficient matrices for a target.

    ``target`` is an MMShape, a DisjointSpec or a raw order-3 tensor.
    ``programs`` optionally gives (U, V, W-transpose) straight-line schedules
    that share subexpressions; they must compute exactly the columns of U, V
    and the rows of W.
    """

    name: str
    target: object
    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    recursable: bool = True
    programs: tuple | None = None
    notes: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        U, V, W = (exact_matrix(X) for X in (self.U, self.V, self.W))
        if not (U.ndim == V.ndim == W.ndim == 2):
            raise DimensionError("U, V, W must be 2-D")
        if not (U.shape[1] == V.shape[1] == W.shape[1]):
            raise DimensionError(f"rank mismatch: {U.shape[1]}, {V.shape[1]}, {W.shape[1]}")
        target = self.target
        if isinstance(target, MMShape) or (isinstance(target, tuple) and len(target) == 3
                                            and all(isinstance(x, (int, np.integer)) for x in target)
                                            and not isinstance(target, DisjointSpec)):
            target = MMShape(*map(int, target))
        elif not isinstance(target, DisjointSpec):
            target = exact_matrix(np.asarray(target, dtype=object))
            if target.ndim != 3:
                raise DimensionError("raw targets must be order-3 tensors")
        a, b, g = _dims_of(target)
        if U.shape[0] != a or V.shape[0] != b or W.shape[0] != g:
            raise DimensionError(
                f"coefficient rows {U.shape[0]}, {V.shape[0]}, {W.shape[0]} do not match target dims {a}, {b}, {g}"
            )
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "target", target)
        if self.programs is not None:
            pu, pv, pw = self.programs
            checks = ((pu, U, "U"), (pv, V, "V"), (pw, W.T, "W"))
            for prog, M, label in checks:
                got = prog.matrix()
                if got.shape != M.shape or not all(x == y for x, y in zip(got.reshape(-1), M.reshape(-1))):
                    raise ValueError(f"{self.name}: program for {label} does not compute the coefficient matrix")

    @property
    def rank(self):
        return self.U.shape[1]

    @property
    def kind(self):
        if isinstance(self.target, MMShape):
            return "mm"
        if isinstance(self.target, DisjointSpec):
            return "disjoint"
        return "raw"

    @property
    def dims(self):
        return _dims_of(self.target)

    def linear_programs(self):
        if self.programs is not None:
            return self.programs
        if "programs" not in self._cache:
            self._cache["programs"] = (
                LinearProgram.from_columns(self.U),
                LinearProgram.from_columns(self.V),
                LinearProgram.from_columns(self.W.T),
            )
        return self._cache["programs"]

    def float_coefficients(self):
        if "float" not in self._cache:
            self._cache["float"] = tuple(np.array(M, dtype=np.float64) for M in (self.U, self.V, self.W))
        return self._cache["float"]

    def target_tensor(self):
        if "tensor" not in self._cache:
            if isinstance(self.target, MMShape):
                T = mm_tensor(self.target)
            elif isinstance(self.target, DisjointSpec):
                T = disjoint_tensor(self.target)
            else:
                T = self.target
            self._cache["tensor"] = T
        return self._cache["tensor"]

    def with_coefficients(self, U=None, V=None, W=None, name=None, **kw):
        """Copy with some coefficient matrices replaced (schedules are dropped)."""
        return DecompositionAlgorithm(
            name=name or self.name,
            target=kw.get("target", self.target),
            U=self.U if U is None else U,
            V=self.V if V is None else V,
            W=self.W if W is None else W,
            recursable=kw.get("recursable", self.recursable),
            notes=kw.get("notes", self.notes),
        )

    def same_coefficients(self, other):
        return all(
            X.shape == Y.shape and all(x == y for x, y in zip(X.reshape(-1), Y.reshape(-1)))
            for X, Y in ((self.U, other.U), (self.V, other.V), (self.W, other.W))
        )

    @property
    def target_label(self):
        if self.kind == "raw":
            return "raw(" + ",".join(str(d) for d in self.dims) + ")"
        return repr(self.target) if self.kind == "disjoint" else str(self.target)

    def __repr__(self):
        return f"DecompositionAlgorithm({self.name!r}, target={self.target_label}, rank={self.rank})"


# -- target tensors --------------------------------------------------------------------


def mm_tensor(shape) -> np.ndarray:
    """The (km) x (mn) x (nk) tensor of k x m by m x n matrix multiplication (int64)."""
    k, m, n = MMShape(*shape)
    if min(k, m, n) < 1:
        raise DimensionError(f"invalid shape {shape}")
    T = np.zeros((k * m, m * n, n * k), dtype=np.int64)
    for i in range(k):
        for j in range(m):
            for h in range(n):
                T[j * k + i, h * m + j, i * n + h] = 1
    return T


def disjoint_tensor(specs) -> np.ndarray:
    """Block-diagonal direct sum of MM tensors; offsets come from DisjointSpec.offsets."""
    spec = DisjointSpec(specs)
    T = np.zeros((spec.alpha, spec.beta, spec.gamma), dtype=np.int64)
    oa, ob, og = spec.offsets("alpha"), spec.offsets("beta"), spec.offsets("gamma")
    for s, a, b, g in zip(spec, oa, ob, og):
        T[a:a + s.alpha, b:b + s.beta, g:g + s.gamma] = mm_tensor(s)
    return T


# -- validation -------------------------------------------------------------------------------


@dataclass
class ValidationReport:
    ok: bool
    residual: object
    violations: list
    rank: int
    mode: str
    tolerance: float = 0.0

    def __bool__(self):
        return self.ok


_INT64_SAFE = 2**62


def exact_trilinear_sum(U, V, W):
    """sum_q U[a, q] V[b, q] W[c, q] exactly, as (integer array, denominator).

    Uses int64 arithmetic when the scaled coefficients cannot overflow and
    Python integers otherwise.
    """
    Ui, du = _scaled_int(U)
    Vi, dv = _scaled_int(V)
    Wi, dw = _scaled_int(W)
    bound = _max_abs(Ui) * _max_abs(Vi) * _max_abs(Wi) * max(U.shape[1], 1)
    if bound < _INT64_SAFE:
        S = np.einsum("aq,bq,cq->abc", Ui.astype(np.int64), Vi.astype(np.int64), Wi.astype(np.int64))
    else:
        S = np.einsum("aq,bq,cq->abc", Ui, Vi, Wi)
    return S, du * dv * dw


def brent_residual_tensor(alg: DecompositionAlgorithm):
    """Exact residual tensor sum_q u v w - T as (integer array, denominator)."""
    S, den = exact_trilinear_sum(alg.U, alg.V, alg.W)
    T = alg.target_tensor()
    if T.dtype == object:
        tden = _common_denominator(T)
        Tn = np.array([int(x * tden) for x in T.reshape(-1)], dtype=object).reshape(T.shape)
    else:
        tden = 1
        Tn = T
    if S.dtype != object and max(int(np.abs(S).max(initial=0)), _max_abs(Tn)) * tden * den < _INT64_SAFE:
        return S * tden - Tn.astype(np.int64) * den, den * tden
    return S.astype(object) * tden - Tn.astype(object) * den, den * tden


def validate_decomposition(alg: DecompositionAlgorithm, exact=True, tol=1e-9, max_violations=50):
    """Check Brent's equations for ``alg`` against its target tensor.

    Exact mode returns the max absolute residual as an mpq (0 iff valid) and
    the violated index triples. Float mode evaluates in float64 and compares
    the max residual with ``tol``.
    """
    if exact:
        R, den = brent_residual_tensor(alg)
        nz = np.argwhere(R != 0)
        worst = mpq(max((abs(int(x)) for x in R.reshape(-1)), default=0), den)
        viol = [tuple(int(t) for t in idx) for idx in nz[:max_violations]]
        return ValidationReport(len(nz) == 0, worst, viol, alg.rank, "exact")
    U, V, W = alg.float_coefficients()
    T = np.array(alg.target_tensor(), dtype=np.float64)
    res = kernels.brent_residual(U, V, W, T)
    viol = []
    if res > tol:
        R = np.einsum("aq,bq,cq->abc", U, V, W) - T
        viol = [tuple(int(t) for t in idx) for idx in np.argwhere(np.abs(R) > tol)[:max_violations]]
    return ValidationReport(res <= tol, res, viol, alg.rank, "float", tol)


# -- evaluation -------------------------------------------------------------------------------


def _coef_converter(sample):
    """Map an exact coefficient into the ring of ``sample`` values."""
    dt = np.asarray(sample).dtype
    if dt.kind == "f":
        return float
    if dt.kind == "c":
        return complex
    if dt.kind in "iu":
        return lambda c: int(c) if c.denominator == 1 else c

    def exact(c):
        return int(c) if c.denominator == 1 else c

    return exact


def flatten_operand(X, role):
    """Operand matrix -> vector in the module's index order.

    role 'A' and 'B' use column-major order, role 'C' uses row-major order.
    """
    X = np.asarray(X)
    if X.ndim != 2:
        raise DimensionError("operands must be 2-D")
    return X.T.reshape(-1) if role in ("A", "B", "D") else X.reshape(-1)


def _split_operands(alg, first, second):
    """Return the flattened input vectors and a function assembling outputs."""
    tgt = alg.target
    if isinstance(tgt, MMShape):
        A, B = np.asarray(first), np.asarray(second)
        if A.shape != (tgt.k, tgt.m) or B.shape != (tgt.m, tgt.n):
            raise DimensionError(f"{tgt} needs {tgt.k}x{tgt.m} and {tgt.m}x{tgt.n} operands, got {A.shape} and {B.shape}")
        return (
            flatten_operand(A, "A"),
            flatten_operand(B, "B"),
            lambda c: np.array(c).reshape(tgt.k, tgt.n),
        )
    if isinstance(tgt, DisjointSpec):
        if len(first) != len(tgt) or len(second) != len(tgt):
            raise DimensionError(f"{tgt!r} needs {len(tgt)} operand pairs")
        a_parts, b_parts = [], []
        for s, A, B in zip(tgt, first, second):
            A, B = np.asarray(A), np.asarray(B)
            if A.shape != (s.k, s.m) or B.shape != (s.m, s.n):
                raise DimensionError(f"{s} block got operands {A.shape} and {B.shape}")
            a_parts.append(flatten_operand(A, "A"))
            b_parts.append(flatten_operand(B, "B"))
        offs = tgt.offsets("gamma")

        def assemble(c):
            c = np.array(c)
            return [c[o:o + s.gamma].reshape(s.k, s.n) for s, o in zip(tgt, offs)]

        return np.concatenate(a_parts), np.concatenate(b_parts), assemble
    a, b = np.asarray(first).reshape(-1), np.asarray(second).reshape(-1)
    alpha, beta, _ = alg.dims
    if a.size != alpha or b.size != beta:
        raise DimensionError(f"raw target needs vectors of length {alpha} and {beta}")
    return a, b, lambda c: np.array(c)


def _exact_if_integer(x):
    # fixed-width integers become Python ints so results never overflow
    x = np.asarray(x)
    return x.astype(object) if x.dtype.kind in "iub" else x


def apply_bilinear(alg: DecompositionAlgorithm, first, second, counter: OpCounter | None = None):
    """Evaluate ``alg`` once on scalar operands.

    MM targets take (A, B) and return C. Disjoint targets take lists of A's
    and B's and return a list of products. Raw targets take and return vectors.
    """
    a, b, assemble = _split_operands(alg, first, second)
    a, b = _exact_if_integer(a), _exact_if_integer(b)
    pu, pv, pw = alg.linear_programs()
    coef = _coef_converter(a if a.size else b)
    counter = counter if counter is not None else OpCounter()
    with counter.in_phase("forms"):
        l1 = pu.run(list(a), coef)
        l2 = pv.run(list(b), coef)
        counter.tally(adds=pu.adds + pv.adds, const=pu.const_muls + pv.const_muls)
    with counter.in_phase("products"):
        prods = [x * y for x, y in zip(l1, l2)]
        counter.tally(muls=alg.rank)
    with counter.in_phase("outputs"):
        zero = (lambda: 0.0) if np.asarray(a).dtype.kind in "fc" else (lambda: 0)
        c = pw.run(prods, coef, zero=zero)
        counter.tally(adds=pw.adds, const=pw.const_muls)
    exact = a.dtype == object or b.dtype == object
    out = np.empty(len(c), dtype=object if exact else np.result_type(a, b))
    out[:] = c
    return assemble(out)


def trilinear_value(alg: DecompositionAlgorithm, A, B, D):
    """sum_q l_q(A) l'_q(B) l''_q(D), evaluated exactly from the coefficients."""
    tgt = alg.target
    if not isinstance(tgt, MMShape):
        raise ValueError("trilinear values are defined for MM targets")
    A, B, D = (np.asarray(X) for X in (A, B, D))
    if A.shape != (tgt.k, tgt.m) or B.shape != (tgt.m, tgt.n) or D.shape != (tgt.n, tgt.k):
        raise DimensionError("operands do not match the target shape")
    a = flatten_operand(A, "A").astype(object)
    b = flatten_operand(B, "B").astype(object)
    d = flatten_operand(D, "D").astype(object)
    l1 = a @ alg.U
    l2 = b @ alg.V
    l3 = d @ alg.W
    return sum((x * y * z for x, y, z in zip(l1, l2, l3)), mpq(0))


# -- recursion ----------------------------------------------------------------------------


def _check_recursable(alg):
    if not alg.recursable:
        raise NonRecursableError(f"{alg.name} is not recursable: its products rely on commuting entries")
    if not isinstance(alg.target, MMShape) or not alg.target.is_square:
        raise ValueError(f"{alg.name}: recursion needs a square MM target, got {alg.target}")
    if alg.target.k < 2:
        raise ValueError("recursion needs a base dimension of at least 2")
    return alg.target.k


def padded_size(n0, size, cutoff):
    """Size after zero padding: ``size`` itself if no recursion happens, else the next power of n0."""
    if size <= cutoff:
        return size
    N = 1
    while N < size:
        N *= n0
    return N


def apply_recursive(alg: DecompositionAlgorithm, A, B, cutoff=1, counter: OpCounter | None = None):
    """Multiply A and B by substituting blocks into ``alg`` recursively.

    Operands are zero padded to a power of the base dimension n0. Blocks of
    size at most ``cutoff`` are multiplied by the straightforward method.
    Sub-products are formed in index order and outputs are combined in
    program order, so exact results and float rounding are deterministic.
    """
    n0 = _check_recursable(alg)
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    A, B = _exact_if_integer(A), _exact_if_integer(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    k, m = A.shape
    n = B.shape[1]
    size = max(k, m, n)
    N = padded_size(n0, size, cutoff)
    dt = np.result_type(A, B) if A.dtype != object and B.dtype != object else object
    if (k, m, n) != (N, N, N):
        Ap = _zeros_like_ring((N, N), dt, A)
        Bp = _zeros_like_ring((N, N), dt, B)
        Ap[:k, :m] = A
        Bp[:m, :n] = B
    else:
        Ap, Bp = A.astype(dt, copy=False), B.astype(dt, copy=False)
    counter = counter if counter is not None else OpCounter()
    progs = alg.linear_programs()
    coef = _coef_converter(Ap)
    C = _recurse(alg, progs, coef, Ap, Bp, N, n0, cutoff, counter)
    return C[:k, :n]


def _zeros_like_ring(shape, dt, sample):
    if dt != object:
        return np.zeros(shape, dtype=dt)
    x = next(iter(sample.reshape(-1)), 0)
    return zeros(shape, "bigint" if isinstance(x, int) else "rational")


def _recurse(alg, progs, coef, A, B, N, n0, cutoff, counter):
    if N <= cutoff:
        with counter.in_phase("base"):
            if N == 1:
                counter.tally(muls=1)
                return A * B
            return straightforward_mm(A, B, counter)
    pu, pv, pw = progs
    s = N // n0
    blocks_a = [A[i * s:(i + 1) * s, j * s:(j + 1) * s] for j in range(n0) for i in range(n0)]
    blocks_b = [B[j * s:(j + 1) * s, h * s:(h + 1) * s] for h in range(n0) for j in range(n0)]
    area = s * s
    with counter.in_phase("forms"):
        l1 = pu.run(blocks_a, coef)
        l2 = pv.run(blocks_b, coef)
        counter.tally(adds=(pu.adds + pv.adds) * area, const=(pu.const_muls + pv.const_muls) * area)
    prods = [_recurse(alg, progs, coef, x, y, s, n0, cutoff, counter) for x, y in zip(l1, l2)]
    with counter.in_phase("outputs"):
        dt = prods[0].dtype
        c = pw.run(prods, coef, zero=lambda: np.zeros((s, s), dtype=dt) if dt != object else prods[0] * 0)
        counter.tally(adds=pw.adds * area, const=pw.const_muls * area)
    C = np.empty((N, N), dtype=prods[0].dtype)
    for i in range(n0):
        for h in range(n0):
            C[i * s:(i + 1) * s, h * s:(h + 1) * s] = c[i * n0 + h]
    return C


def recursive_counts(alg: DecompositionAlgorithm, size, cutoff=1) -> OpCounter:
    """Operation counts apply_recursive would record, without touching data."""
    n0 = _check_recursable(alg)
    pu, pv, pw = alg.linear_programs()
    N = padded_size(n0, size, cutoff)
    counter = OpCounter()
    r = alg.rank
    mult = 1
    while N > cutoff:
        s = N // n0
        area = s * s
        with counter.in_phase("forms"):
            counter.tally(adds=mult * (pu.adds + pv.adds) * area, const=mult * (pu.const_muls + pv.const_muls) * area)
        with counter.in_phase("outputs"):
            counter.tally(adds=mult * pw.adds * area, const=mult * pw.const_muls * area)
        mult *= r
        N = s
    with counter.in_phase("base"):
        counter.tally(muls=mult * N**3, adds=mult * (N**3 - N**2))
    return counter


# -- composition and transforms ---------------------------------------------------------


def _require_mm(*algs):
    for a in algs:
        if not isinstance(a.target, MMShape):
            raise ValueError(f"{a.name}: this operation needs an MM target, got {a.kind}")


def _kron_roles(X, outer, inner, Y, outer2, inner2):
    # X rows are indexed outer_idx*inner + inner_idx; blocks nest as (x, y)
    r1, r2 = X.shape[1], Y.shape[1]
    Xr = X.reshape(outer, inner, r1)
    Yr = Y.reshape(outer2, inner2, r2)
    P = np.einsum("abq,cdp->acbdqp", Xr, Yr)
    return P.reshape(outer * outer2 * inner * inner2, r1 * r2)


def tensor_product(alg1: DecompositionAlgorithm, alg2: DecompositionAlgorithm, name=None):
    """Algorithm for MM(kk', mm', nn') of rank r r' from two MM algorithms.

    Block (i, i') of the product shape sits at row i*k' + i'; product q*r' + q'
    pairs product q of alg1 with product q' of alg2.
    """
    _require_mm(alg1, alg2)
    k, m, n = alg1.target
    k2, m2, n2 = alg2.target
    U = _kron_roles(alg1.U, m, k, alg2.U, m2, k2)
    V = _kron_roles(alg1.V, n, m, alg2.V, n2, m2)
    W = _kron_roles(alg1.W, k, n, alg2.W, k2, n2)
    return DecompositionAlgorithm(
        name=name or f"({alg1.name})x({alg2.name})",
        target=MMShape(k * k2, m * m2, n * n2),
        U=U,
        V=V,
        W=W,
        recursable=alg1.recursable and alg2.recursable,
    )


DUAL_MODES = ("cycle", "cycle2", "transpose")


def dualize(alg: DecompositionAlgorithm, mode="cycle"):
    """Dual algorithm of the same rank.

    cycle:     MM(k,m,n) -> MM(m,n,k), roles (U, V, W) -> (V, W, U)
    cycle2:    cycle applied twice, MM(k,m,n) -> MM(n,k,m)
    transpose: MM(k,m,n) -> MM(n,m,k) from (AB)^T = B^T A^T
    """
    _require_mm(alg)
    k, m, n = alg.target
    if mode == "cycle":
        return DecompositionAlgorithm(f"{alg.name}^cycle", MMShape(m, n, k), alg.V, alg.W, alg.U, alg.recursable)
    if mode == "cycle2":
        return dualize(dualize(alg, "cycle"), "cycle").with_coefficients(name=f"{alg.name}^cycle2")
    if mode == "transpose":
        r = alg.rank
        U = np.empty((n * m, r), dtype=object)
        V = np.empty((m * k, r), dtype=object)
        W = np.empty((k * n, r), dtype=object)
        for j in range(m):
            for h in range(n):
                U[j * n + h] = alg.V[h * m + j]
        for i in range(k):
            for j in range(m):
                V[i * m + j] = alg.U[j * k + i]
        for i in range(k):
            for h in range(n):
                W[h * k + i] = alg.W[i * n + h]
        return DecompositionAlgorithm(f"{alg.name}^T", MMShape(n, m, k), U, V, W, alg.recursable)
    raise ValueError(f"unknown dual mode {mode!r}; expected one of {DUAL_MODES}")


class NonInvertiblePairError(ValueError):
    """An equivalence pair whose product is not the identity."""

    def __init__(self, which, product):
        self.which = which
        self.product = product
        super().__init__(f"pair {which} does not multiply to the identity; product is\n{product}")


def _exact_square(M, size, label):
    M = exact_matrix(M)
    if M.shape != (size, size):
        raise DimensionError(f"{label} must be {size}x{size}, got {M.shape}")
    return M


def equivalence_transform(alg: DecompositionAlgorithm, pairs, perm=None):
    """Apply the change of bases A -> P A Q etc. that preserves MM.

    ``pairs`` holds three pairs ((S1, G1), (S2, G2), (S3, G3)) of size k, m, n
    with S G = I for each. With U_q, V_q, W_q reshaped to k x m, m x n and
    n x k, the new products are

        U'_q = S1 U_t(q) S2^T,  V'_q = G2^T V_t(q) S3^T,  W'_q = G3^T W_t(q) G1

    where t is the product permutation ``perm``.
    """
    _require_mm(alg)
    k, m, n = alg.target
    sizes = (k, m, n)
    mats = []
    for idx, ((S, G), size) in enumerate(zip(pairs, sizes)):
        S = _exact_square(S, size, f"pair {idx} first")
        G = _exact_square(G, size, f"pair {idx} second")
        prod = S.dot(G)
        ident = np.equal(prod, exact_matrix(np.eye(size, dtype=np.int64)))
        if not ident.all():
            raise NonInvertiblePairError(idx, prod)
        mats.append((S, G))
    (S1, G1), (S2, G2), (S3, G3) = mats
    r = alg.rank
    t = list(range(r)) if perm is None else [int(x) for x in perm]
    if sorted(t) != list(range(r)):
        raise ValueError("perm must be a permutation of range(rank)")
    U = np.empty((k * m, r), dtype=object)
    V = np.empty((m * n, r), dtype=object)
    W = np.empty((n * k, r), dtype=object)
    for q in range(r):
        src = t[q]
        Uq = alg.U[:, src].reshape(m, k).T  # k x m
        Vq = alg.V[:, src].reshape(n, m).T  # m x n
        Wq = alg.W[:, src].reshape(k, n).T  # n x k
        U[:, q] = S1.dot(Uq).dot(S2.T).T.reshape(-1)
        V[:, q] = G2.T.dot(Vq).dot(S3.T).T.reshape(-1)
        W[:, q] = G3.T.dot(Wq).dot(G1).T.reshape(-1)
    return DecompositionAlgorithm(f"{alg.name}~", alg.target, U, V, W, alg.recursable)


# -- census -------------------------------------------------------------------------------


@dataclass(frozen=True)
class OperationCensus:
    nnz_U: int
    nnz_V: int
    nnz_W: int
    nstar_U: int
    nstar_V: int
    nstar_W: int
    rank: int
    gamma: int
    const_mul_bound: int
    add_bound: int
    schedule_adds: int
    schedule_const_muls: int

    def as_dict(self):
        return dict(self.__dict__)


def _nnz(M):
    return sum(1 for x in M.reshape(-1) if x != 0)


def _nstar(M):
    return sum(1 for x in M.reshape(-1) if x not in (0, 1, -1))


def operation_census(alg: DecompositionAlgorithm) -> OperationCensus:
    """Nonzero and non-unit coefficient counts with the derived cost bounds.

    ``add_bound`` is (nnz(U) - r) + (nnz(V) - r) + (nnz(W) - gamma);
    ``schedule_adds`` is what the algorithm's linear programs actually use.
    """
    nu, nv, nw = _nnz(alg.U), _nnz(alg.V), _nnz(alg.W)
    su, sv, sw = _nstar(alg.U), _nstar(alg.V), _nstar(alg.W)
    r = alg.rank
    gamma = alg.W.shape[0]
    pu, pv, pw = alg.linear_programs()
    return OperationCensus(
        nu, nv, nw, su, sv, sw, r, gamma,
        const_mul_bound=su + sv + sw,
        add_bound=max(nu - r, 0) + max(nv - r, 0) + max(nw - gamma, 0),
        schedule_adds=pu.adds + pv.adds + pw.adds,
        schedule_const_muls=pu.const_muls + pv.const_muls + pw.const_muls,
    )


def straightforward_algorithm(k, m, n) -> DecompositionAlgorithm:
    """Rank-kmn triple with one product a_ij b_jh per (i, j, h)."""
    shape = MMShape(k, m, n)
    if min(shape) < 1:
        raise DimensionError(f"invalid shape {shape}")
    r = k * m * n
    U = np.zeros((shape.alpha, r), dtype=np.int64)
    V = np.zeros((shape.beta, r), dtype=np.int64)
    W = np.zeros((shape.gamma, r), dtype=np.int64)
    q = 0
    for i in range(k):
        for j in range(m):
            for h in range(n):
                U[j * k + i, q] = 1
                V[h * m + j, q] = 1
                W[i * n + h, q] = 1
                q += 1
    return DecompositionAlgorithm(f"straightforward({k},{m},{n})", shape, U, V, W, True)
