"""Trilinear aggregation for disjoint products, APA (border rank) algorithms and
exact recovery from APA evaluations by interpolation in lambda.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    DecompositionAlgorithm,
    DisjointSpec,
    MMShape,
    _split_operands,
    disjoint_tensor,
    exact_matrix,
    exact_trilinear_sum,
    mm_tensor,
)
from .ring import DimensionError, OpCounter, mpq

# -- polynomials in lambda --------------------------------------------------------------


class LambdaPoly:
    """Polynomial in lambda with exact coefficients; ``coeffs[t]`` multiplies lambda**t."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=(0,)):
        cs = [mpq(int(c)) if isinstance(c, np.integer) else mpq(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs) if cs else (mpq(0),)

    @classmethod
    def monomial(cls, c, power):
        return cls([0] * power + [c])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def leading(self):
        return self.coeffs[-1]

    def is_zero(self):
        return self.coeffs == (0,)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (mpq(0),) * (n - len(self.coeffs))
        b = other.coeffs + (mpq(0),) * (n - len(other.coeffs))
        return LambdaPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return LambdaPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        out = [mpq(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for s, x in enumerate(self.coeffs):
            if x == 0:
                continue
            for t, y in enumerate(other.coeffs):
                out[s + t] += x * y
        return LambdaPoly(out)

    __rmul__ = __mul__

    def __call__(self, lam):
        acc = 0 * lam
        for c in reversed(self.coeffs):
            acc = acc * lam + (float(c) if isinstance(lam, (float, complex)) else c)
        return acc

    def __eq__(self, other):
        try:
            return self.coeffs == _as_poly(other).coeffs
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"LambdaPoly({format_poly(self)})"


def _as_poly(x):
    if isinstance(x, LambdaPoly):
        return x
    if isinstance(x, (int, np.integer)) or hasattr(x, "denominator"):
        return LambdaPoly([x])
    raise TypeError(f"cannot treat {x!r} as a polynomial in lambda")


def format_poly(p: LambdaPoly) -> str:
    """'c@t' terms joined by '+', e.g. '1@0+-1/2@2'; zero is '0'."""
    terms = [f"{c}@{t}" for t, c in enumerate(p.coeffs) if c != 0]
    return "+".join(terms) if terms else "0"


def parse_poly(text: str) -> LambdaPoly:
    text = text.strip()
    if text == "0":
        return LambdaPoly()
    out = {}
    for term in text.split("+"):
        c, _, t = term.partition("@")
        t = int(t) if t else 0
        out[t] = out.get(t, mpq(0)) + mpq(c)
    deg = max(out)
    return LambdaPoly([out.get(t, 0) for t in range(deg + 1)])


# -- APA algorithms -----------------------------------------------------------------------


def _cube_from_polys(P):
    """Matrix of LambdaPoly -> (deg+1, rows, r) exact cube."""
    P = np.asarray(P, dtype=object)
    deg = max((p.degree for p in P.reshape(-1)), default=0)
    cube = np.empty((deg + 1,) + P.shape, dtype=object)
    cube.fill(mpq(0))
    for idx in np.ndindex(P.shape):
        for t, c in enumerate(P[idx].coeffs):
            cube[(t,) + idx] = c
    return cube


def _trim_cube(cube):
    cube = np.asarray(cube, dtype=object)
    while cube.shape[0] > 1 and all(x == 0 for x in cube[-1].reshape(-1)):
        cube = cube[:-1]
    return cube


@dataclass(frozen=True, eq=False)
class ApaAlgorithm:
    """Triple whose coefficients are polynomials in lambda.

    ``Uc[t]`` holds the lambda**t coefficients of U (likewise V, W). The
    algorithm reproduces the target tensor in the lambda**scale coefficient
    and has no lower-order terms; the output is multiplied by lambda**-scale.
    """

    name: str
    target: object
    Uc: np.ndarray
    Vc: np.ndarray
    Wc: np.ndarray
    scale: int
    recursable: bool = False
    notes: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        cubes = []
        for X in (self.Uc, self.Vc, self.Wc):
            X = np.asarray(X, dtype=object)
            if X.ndim == 2:
                X = X[None]
            cubes.append(_trim_cube(exact_matrix(X)))
        Uc, Vc, Wc = cubes
        if not (Uc.shape[2] == Vc.shape[2] == Wc.shape[2]):
            raise DimensionError("rank mismatch between U, V, W")
        target = self.target
        if not isinstance(target, DisjointSpec):
            target = MMShape(*target)
        if (Uc.shape[1], Vc.shape[1], Wc.shape[1]) != (target.alpha, target.beta, target.gamma):
            raise DimensionError("coefficient rows do not match the target dimensions")
        if self.scale < 0:
            raise ValueError("scale must be non-negative")
        object.__setattr__(self, "Uc", Uc)
        object.__setattr__(self, "Vc", Vc)
        object.__setattr__(self, "Wc", Wc)
        object.__setattr__(self, "target", target)

    @property
    def rank(self):
        return self.Uc.shape[2]

    border_rank = rank

    @property
    def degree(self):
        """Degree in lambda of the expanded trilinear sum (upper bound)."""
        return sum(X.shape[0] - 1 for X in (self.Uc, self.Vc, self.Wc))

    @property
    def dims(self):
        t = self.target
        return t.alpha, t.beta, t.gamma

    @property
    def kind(self):
        return "disjoint" if isinstance(self.target, DisjointSpec) else "mm"

    @property
    def target_label(self):
        return repr(self.target) if self.kind == "disjoint" else str(self.target)

    def target_tensor(self):
        if "tensor" not in self._cache:
            t = self.target
            self._cache["tensor"] = disjoint_tensor(t) if isinstance(t, DisjointSpec) else mm_tensor(t)
        return self._cache["tensor"]

    def poly(self, role, row, q) -> LambdaPoly:
        cube = {"U": self.Uc, "V": self.Vc, "W": self.Wc}[role]
        return LambdaPoly(cube[:, row, q])

    def polys(self, role):
        cube = {"U": self.Uc, "V": self.Vc, "W": self.Wc}[role]
        out = np.empty(cube.shape[1:], dtype=object)
        for idx in np.ndindex(out.shape):
            out[idx] = LambdaPoly(cube[(slice(None),) + idx])
        return out

    def evaluate(self, lam):
        """(U, V, W) with lambda substituted; float lambda gives float64 matrices."""
        return tuple(_eval_cube(X, lam) for X in (self.Uc, self.Vc, self.Wc))

    def with_cubes(self, Uc=None, Vc=None, Wc=None, name=None):
        return ApaAlgorithm(
            name or self.name,
            self.target,
            self.Uc if Uc is None else Uc,
            self.Vc if Vc is None else Vc,
            self.Wc if Wc is None else Wc,
            self.scale,
            self.recursable,
            self.notes,
        )

    def __repr__(self):
        return f"ApaAlgorithm({self.name!r}, target={self.target_label}, rank={self.rank}, scale={self.scale})"


def _eval_cube(cube, lam):
    if isinstance(lam, (float, complex, np.floating, np.complexfloating)):
        F = np.array(cube, dtype=np.float64 if not isinstance(lam, complex) else np.complex128)
        out = np.zeros(F.shape[1:], dtype=F.dtype)
        for t in range(F.shape[0] - 1, -1, -1):
            out = out * lam + F[t]
        return out
    lam = mpq(lam)
    out = np.empty(cube.shape[1:], dtype=object)
    out.fill(mpq(0))
    for t in range(cube.shape[0] - 1, -1, -1):
        out = out * lam + cube[t]
    return out


def from_exact(alg: DecompositionAlgorithm) -> ApaAlgorithm:
    """Degenerate APA form of an exact algorithm (degree 0, scale 0)."""
    if alg.kind == "raw":
        raise ValueError("APA algorithms need MM or disjoint targets")
    return ApaAlgorithm(alg.name + "[apa]", alg.target, alg.U[None], alg.V[None], alg.W[None], scale=0)


# -- construction helpers ----------------------------------------------------------------


class _Columns:
    """Accumulates product columns given as {row: {power: coef}} dicts."""

    def __init__(self, alpha, beta, gamma):
        self.dims = (alpha, beta, gamma)
        self.cols = []

    def add(self, u, v, w):
        self.cols.append(tuple(_terms(x) for x in (u, v, w)))

    def __len__(self):
        return len(self.cols)

    def cubes(self):
        r = len(self.cols)
        out = []
        for role, size in enumerate(self.dims):
            deg = max((p for col in self.cols for terms in col[role].values() for p in terms), default=0)
            cube = np.empty((deg + 1, size, r), dtype=object)
            cube.fill(mpq(0))
            for q, col in enumerate(self.cols):
                for row, terms in col[role].items():
                    for p, c in terms.items():
                        cube[p, row, q] += c
            out.append(cube)
        return out

    def exact(self):
        cubes = self.cubes()
        if any(c.shape[0] != 1 for c in cubes):
            raise ValueError("columns carry powers of lambda")
        return [c[0] for c in cubes]


def _terms(spec):
    # spec: iterable of (row, coef) or (row, coef, power)
    out = {}
    for item in spec:
        row, c = item[0], item[1]
        p = item[2] if len(item) > 2 else 0
        slot = out.setdefault(row, {})
        slot[p] = slot.get(p, 0) + c
    return out


class _PairIndex:
    """Global row indices for the disjoint pair MM(k,m,n) + MM(m,n,k).

    First set:  A (k x m) then U (m x n); second set: B (m x n) then V (n x k);
    third set: D (n x k) then W (k x m). Outputs are AB (k x n) and UV (m x k).
    """

    def __init__(self, k, m, n):
        self.k, self.m, self.n = k, m, n

    def a(self, i, j):
        return j * self.k + i

    def u(self, j, h):
        return self.k * self.m + h * self.m + j

    def b(self, j, h):
        return h * self.m + j

    def v(self, h, i):
        return self.m * self.n + i * self.n + h

    def d(self, h, i):
        return i * self.n + h

    def w(self, i, j):
        return self.n * self.k + j * self.k + i


def _pair_spec(k, m, n):
    for x in (k, m, n):
        if int(x) < 1:
            raise DimensionError(f"dimensions must be positive, got {(k, m, n)}")
    return DisjointSpec([(k, m, n), (m, n, k)])


def aggregation_pair(k, m, n) -> DecompositionAlgorithm:
    """Exact algorithm for AB and UV with kmn + km + mn + nk products.

    Aggregates (a_ij + u_jh)(b_jh + v_hi)(d_hi + w_ij) summed over (i, j, h)
    give Trace(ABD) + Trace(UVW) plus six cross families. These are removed by
    three groups of corrections:

        T1 = sum_ij a_ij (sum_h b_jh + v_hi) w_ij
        T2 = sum_jh u_jh b_jh (sum_i d_hi + w_ij)
        T3 = sum_hi (sum_j a_ij + u_jh) v_hi d_hi
    """
    spec = _pair_spec(k, m, n)
    ix = _PairIndex(k, m, n)
    cols = _Columns(spec.alpha, spec.beta, spec.gamma)
    for i, j, h in itertools.product(range(k), range(m), range(n)):
        cols.add([(ix.a(i, j), 1), (ix.u(j, h), 1)],
                 [(ix.b(j, h), 1), (ix.v(h, i), 1)],
                 [(ix.d(h, i), 1), (ix.w(i, j), 1)])
    for i, j in itertools.product(range(k), range(m)):
        cols.add([(ix.a(i, j), 1)],
                 [(ix.b(j, h), 1) for h in range(n)] + [(ix.v(h, i), 1) for h in range(n)],
                 [(ix.w(i, j), -1)])
    for j, h in itertools.product(range(m), range(n)):
        cols.add([(ix.u(j, h), 1)],
                 [(ix.b(j, h), 1)],
                 [(ix.d(h, i), -1) for i in range(k)] + [(ix.w(i, j), -1) for i in range(k)])
    for h, i in itertools.product(range(n), range(k)):
        cols.add([(ix.a(i, j), -1) for j in range(m)] + [(ix.u(j, h), -1) for j in range(m)],
                 [(ix.v(h, i), 1)],
                 [(ix.d(h, i), 1)])
    U, V, W = cols.exact()
    return DecompositionAlgorithm(f"aggregation_pair({k},{m},{n})", spec, U, V, W, recursable=False)


def apa_pair(k, m, n) -> ApaAlgorithm:
    """APA algorithm for AB and UV with kmn + km + mn products, scale 2.

    Aggregates (a_ij + L u_jh)(b_jh + L v_hi)(L^2 d_hi + w_ij) carry both
    traces at L^2. The terms of order below L^2 are removed by

        T1 = sum_ij a_ij (sum_h b_jh + L v_hi) w_ij
        T2 = sum_jh L u_jh b_jh (sum_i L^2 d_hi + w_ij)

    and everything left over is O(L^3).
    """
    spec = _pair_spec(k, m, n)
    ix = _PairIndex(k, m, n)
    cols = _Columns(spec.alpha, spec.beta, spec.gamma)
    for i, j, h in itertools.product(range(k), range(m), range(n)):
        cols.add([(ix.a(i, j), 1, 0), (ix.u(j, h), 1, 1)],
                 [(ix.b(j, h), 1, 0), (ix.v(h, i), 1, 1)],
                 [(ix.d(h, i), 1, 2), (ix.w(i, j), 1, 0)])
    for i, j in itertools.product(range(k), range(m)):
        cols.add([(ix.a(i, j), 1, 0)],
                 [(ix.b(j, h), 1, 0) for h in range(n)] + [(ix.v(h, i), 1, 1) for h in range(n)],
                 [(ix.w(i, j), -1, 0)])
    for j, h in itertools.product(range(m), range(n)):
        cols.add([(ix.u(j, h), 1, 1)],
                 [(ix.b(j, h), 1, 0)],
                 [(ix.d(h, i), -1, 2) for i in range(k)] + [(ix.w(i, j), -1, 0) for i in range(k)])
    Uc, Vc, Wc = cols.cubes()
    return ApaAlgorithm(f"apa_pair({k},{m},{n})", spec, Uc, Vc, Wc, scale=2)


# -- three disjoint products ------------------------------------------------------------

# Block r computes Trace(P Q R) = sum p_ab q_bc r_ca with (a, b, c) a cyclic
# relabelling of the loop indices (i, j, k) = (0, 1, 2).
_BLOCK_ROLES = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _triple_pair(f, r):
    a, b, c = _BLOCK_ROLES[r]
    return ((a, b), (b, c), (c, a))[f]


def _triple_row(n, f, r, idx):
    a, b, c = (idx[x] for x in _BLOCK_ROLES[r])
    base = r * n * n
    if f == 0:
        return base + b * n + a
    if f == 1:
        return base + c * n + b
    return base + a * n + c


def triple_families():
    """Classify the 27 row choices of the 3-row aggregate.

    Returns (targets, full, grouped): ``full`` lists row triples whose three
    factors use three different index pairs (genuine trace forms over all of
    i, j, k); ``grouped`` maps (p, q, pair) to the row triples in which
    factors p and q share the index pair.
    """
    targets, full, grouped = [], [], {}
    for rows in itertools.product(range(3), repeat=3):
        if rows[0] == rows[1] == rows[2]:
            targets.append(rows)
            continue
        pairs = [frozenset(_triple_pair(f, rows[f])) for f in range(3)]
        if len(set(pairs)) == 3:
            full.append(rows)
        elif len(set(pairs)) == 1:
            grouped.setdefault((0, 1, pairs[0]), []).append(rows)
        else:
            p, q = next((p, q) for p, q in ((0, 1), (0, 2), (1, 2)) if pairs[p] == pairs[q])
            grouped.setdefault((p, q, pairs[p]), []).append(rows)
    return targets, full, grouped


def aggregation_triple(n) -> DecompositionAlgorithm:
    """Exact algorithm for three disjoint n x n products from 3-row aggregates.

    The n^3 aggregates (x_ij + u_jk + a_ki)(y_jk + v_ki + b_ij)(z_ki + w_ij + c_jk)
    contain the three traces plus 24 cross families. Families in which two
    factors share an index pair are summed over the free index and grouped into
    9 correction sums of n^2 products each. The 3 remaining families involve
    all three indices (each is itself a trace of a product of three n x n
    matrices) and are subtracted term by term, n^3 products each.

    Product count: n^3 + 9 n^2 + 3 n^3.
    """
    n = int(n)
    if n < 1:
        raise DimensionError("n must be positive")
    spec = DisjointSpec([(n, n, n)] * 3)
    cols = _Columns(spec.alpha, spec.beta, spec.gamma)
    loops = list(itertools.product(range(n), repeat=3))
    for idx in loops:
        cols.add(*[[(_triple_row(n, f, r, idx), 1) for r in range(3)] for f in range(3)])
    _, full, grouped = triple_families()
    for (p, q, pair), fams in sorted(grouped.items(), key=lambda kv: (kv[0][0], kv[0][1], sorted(kv[0][2]))):
        o = 3 - p - q
        free = 3 - sum(pair)
        rp = next(r for r in range(3) if frozenset(_triple_pair(p, r)) == pair)
        rq = next(r for r in range(3) if frozenset(_triple_pair(q, r)) == pair)
        e0, e1 = sorted(pair)
        for x0, x1 in itertools.product(range(n), repeat=2):
            idx = [0, 0, 0]
            idx[e0], idx[e1] = x0, x1
            third = []
            for rows in fams:
                ro = rows[o]
                if frozenset(_triple_pair(o, ro)) == pair:
                    third.append((_triple_row(n, o, ro, idx), -n))
                    continue
                for t in range(n):
                    idx[free] = t
                    third.append((_triple_row(n, o, ro, idx), -1))
            idx[free] = 0
            factors = [None, None, None]
            factors[p] = [(_triple_row(n, p, rp, idx), 1)]
            factors[q] = [(_triple_row(n, q, rq, idx), 1)]
            factors[o] = third
            cols.add(*factors)
    for rows in full:
        for idx in loops:
            cols.add([(_triple_row(n, 0, rows[0], idx), -1)],
                     [(_triple_row(n, 1, rows[1], idx), 1)],
                     [(_triple_row(n, 2, rows[2], idx), 1)])
    U, V, W = cols.exact()
    return DecompositionAlgorithm(f"aggregation_triple({n})", spec, U, V, W, recursable=False)


# -- evaluation --------------------------------------------------------------------------


def _plain_apply(U, V, W, a, b, counter):
    """Evaluate a numeric triple on flat operands, counting like apply_bilinear."""
    l1 = a.dot(U)
    l2 = b.dot(V)
    p = l1 * l2
    c = W.dot(p)
    if counter is not None:
        adds = 0
        const = 0
        for M, axis_len in ((U, U.shape[1]), (V, V.shape[1])):
            nz = M != 0
            adds += int(nz.sum()) - int(np.count_nonzero(nz.any(axis=0)))
            const += int((nz & (M != 1) & (M != -1)).sum())
        with counter.in_phase("forms"):
            counter.tally(adds=adds, const=const)
        with counter.in_phase("products"):
            counter.tally(muls=U.shape[1])
        nz = W != 0
        with counter.in_phase("outputs"):
            counter.tally(adds=int(nz.sum()) - int(np.count_nonzero(nz.any(axis=1))),
                          const=int((nz & (W != 1) & (W != -1)).sum()))
    return c


def _flat_operands(alg, first, second):
    a, b, assemble = _split_operands(alg, first, second)
    if a.dtype.kind in "iub":
        a = a.astype(object)
    if b.dtype.kind in "iub":
        b = b.astype(object)
    return a, b, assemble


def apa_apply(alg: ApaAlgorithm, first, second, lam, counter: OpCounter | None = None):
    """Approximate outputs: evaluate at lambda and multiply by lambda**-scale.

    Float lambda with float operands runs in float64; exact lambda (int,
    Fraction, mpq) with exact operands runs exactly. The error is O(lambda).
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero: the output is scaled by lambda**-scale")
    a, b, assemble = _flat_operands(alg, first, second)
    floaty = a.dtype.kind in "fc" or b.dtype.kind in "fc" or isinstance(lam, (float, np.floating))
    if floaty:
        lam = float(lam)
        a = np.asarray(a, dtype=np.result_type(a.dtype if a.dtype != object else np.float64, np.float64))
        b = np.asarray(b, dtype=np.result_type(b.dtype if b.dtype != object else np.float64, np.float64))
    else:
        lam = mpq(lam)
    U, V, W = alg.evaluate(lam)
    c = _plain_apply(U, V, W, a, b, counter)
    c = c * (lam ** -alg.scale) if floaty else c * (mpq(1) / lam**alg.scale)
    return assemble(c)


class InterpolationError(ValueError):
    """Sample values are inconsistent with the assumed polynomial degree."""


def _poly_from_roots(roots):
    coeffs = [mpq(1)]
    for x in roots:
        nxt = [mpq(0)] * (len(coeffs) + 1)
        for t, c in enumerate(coeffs):
            nxt[t + 1] += c
            nxt[t] -= c * x
        coeffs = nxt
    return coeffs


def lagrange_coefficients(points):
    """Matrix L with L[t][j] = coefficient of lambda**j in the t-th Lagrange basis polynomial."""
    pts = [mpq(x) for x in points]
    out = []
    for t, xt in enumerate(pts):
        others = pts[:t] + pts[t + 1:]
        num = _poly_from_roots(others)
        den = mpq(1)
        for x in others:
            den *= xt - x
        out.append([c / den for c in num])
    return out


def apa_recover_exact(alg: ApaAlgorithm, first, second, points=None, degree=None):
    """Exact outputs from evaluations at distinct nonzero lambda values.

    The un-scaled outputs are polynomials in lambda of degree at most
    ``degree`` (default: the algorithm's degree). They are interpolated from
    the first degree+1 points and the lambda**scale coefficient is returned.
    Any further points are used as a consistency check. The default points
    are 1, 2, ..., degree+2, so one check point is always included.
    """
    deg = alg.degree if degree is None else int(degree)
    if points is None:
        points = range(1, deg + 3)
    pts = [mpq(x) for x in points]
    if len(set(pts)) != len(pts):
        raise ValueError("sample points must be pairwise distinct")
    if any(x == 0 for x in pts):
        raise ValueError("sample points must be nonzero")
    if len(pts) < deg + 1:
        raise ValueError(f"need at least {deg + 1} sample points for degree {deg}, got {len(pts)}")
    a, b, assemble = _flat_operands(alg, first, second)
    if a.dtype != object or b.dtype != object:
        raise TypeError("exact recovery needs exact (integer or rational) operands")
    values = []
    for lam in pts:
        U, V, W = alg.evaluate(lam)
        values.append(_plain_apply(U, V, W, a, b, None))
    base, extra = pts[: deg + 1], pts[deg + 1:]
    L = lagrange_coefficients(base)
    coeffs = []
    for j in range(deg + 1):
        acc = values[0] * L[0][j]
        for t in range(1, deg + 1):
            acc = acc + values[t] * L[t][j]
        coeffs.append(acc)
    for e, lam in enumerate(extra):
        pred = coeffs[-1]
        for j in range(deg - 1, -1, -1):
            pred = pred * lam + coeffs[j]
        if not np.array_equal(pred, values[deg + 1 + e]):
            raise InterpolationError(f"value at lambda={lam} disagrees with the degree-{deg} interpolant")
    if alg.scale > deg:
        raise InterpolationError("degree is below the scaling exponent")
    return assemble(coeffs[alg.scale])


# -- symbolic border-rank validation ----------------------------------------------------------


@dataclass
class BorderRankReport:
    ok: bool
    border_rank: int
    scale: int
    degree: int
    failures: list

    def __bool__(self):
        return self.ok


def lambda_coefficient_tensor(alg: ApaAlgorithm, power):
    """Exact coefficient of lambda**power in sum_q u(L) v(L) w(L), as an mpq tensor."""
    total = None
    du, dv, dw = (X.shape[0] - 1 for X in (alg.Uc, alg.Vc, alg.Wc))
    for pa in range(min(du, power) + 1):
        for pb in range(min(dv, power - pa) + 1):
            pc = power - pa - pb
            if pc > dw:
                continue
            S, den = exact_trilinear_sum(alg.Uc[pa], alg.Vc[pb], alg.Wc[pc])
            term = S.astype(object) * mpq(1, den) if den != 1 else S.astype(object)
            total = term if total is None else total + term
    if total is None:
        a, b, g = alg.dims
        total = np.zeros((a, b, g), dtype=np.int64).astype(object)
    return total


def validate_border_rank(alg: ApaAlgorithm, max_failures=50) -> BorderRankReport:
    """Symbolic check: coefficients of lambda**t vanish for t < scale and equal
    the target tensor at t = scale. Failures are (power, (a, b, c), got, expected)."""
    T = alg.target_tensor()
    failures = []
    for t in range(alg.scale + 1):
        C = lambda_coefficient_tensor(alg, t)
        expected = T if t == alg.scale else np.zeros_like(T)
        bad = np.argwhere(C != expected)
        for idx in bad:
            if len(failures) >= max_failures:
                break
            key = tuple(int(x) for x in idx)
            failures.append((t, key, C[key], int(expected[key])))
    return BorderRankReport(not failures, alg.rank, alg.scale, alg.degree, failures)
