"""Exponents of matrix multiplication implied by bilinear algorithms."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class ExponentReport:
    value: float
    formula: str
    inputs: tuple
    tolerance: float = 0.0
    iterations: int = 0
    residual: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def omega_bound(self):
        """3 tau for the tau solver, the exponent itself otherwise."""
        return 3 * self.value if self.formula == "schonhage-tau" else self.value


def exponent_square(n, r) -> ExponentReport:
    """log_n(r): exponent of recursive use of a rank-r algorithm for MM(n)."""
    if n <= 1:
        raise ValueError("n must be at least 2")
    if r < 1:
        raise ValueError("rank must be positive")
    if r == n**3:
        value = 3.0
    else:
        value = math.log(r) / math.log(n)
    return ExponentReport(value, "square", (n, n, n, r))


def exponent_rect(k, m, n, r) -> ExponentReport:
    """3 log_{kmn}(r): exponent from a rank-r algorithm for MM(k,m,n) and its duals."""
    kmn = k * m * n
    if kmn <= 1:
        raise ValueError("kmn must exceed 1")
    if r < 1:
        raise ValueError("rank must be positive")
    value = 3.0 if r == kmn else 3 * math.log(r) / math.log(kmn)
    return ExponentReport(value, "rectangular", (k, m, n, r))


def schonhage_tau(problems, r, tol=1e-10, max_iter=400) -> ExponentReport:
    """Solve sum_i (k_i m_i n_i)^tau = r by bisection; the exponent bound is 3 tau.

    ``problems`` lists the (k, m, n) shapes computed together by one algorithm
    of (border) rank ``r``. Bisection starts on [0, 3] and stops once the
    relative residual |f(tau) - r| / r is at most ``tol`` and the bracket no
    longer moves.
    """
    sizes = [k * m * n for k, m, n in problems]
    if not sizes:
        raise ValueError("need at least one problem")
    if any(v < 2 for v in sizes):
        raise ValueError("every problem needs k*m*n >= 2")
    s = len(sizes)
    if r <= s:
        raise ValueError(
            f"rank {r} does not exceed the number of problems {s}: the left side is at least {s} "
            "for every tau >= 0, so no positive solution exists"
        )

    def f(tau):
        return sum(v**tau for v in sizes)

    lo, hi = 0.0, 3.0
    while f(hi) < r:
        hi *= 2
    it = 0
    while it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < r:
            lo = mid
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    resid = abs(f(tau) - r) / r
    if resid > tol:
        raise ArithmeticError(f"bisection stalled with relative residual {resid:g}")
    return ExponentReport(tau, "schonhage-tau", (tuple(map(tuple, problems)), r), tol, it, resid,
                          {"omega_bound": 3 * tau})


RANK_FAMILIES = {
    # name: (year, numerator coefficients (n^3, n^2, n, 1), denominator, n, printed bound)
    "P78": (1978, (1, 18, -4, 0), 3, 70, 2.7952),
    "P80": (1980, (2, 27, -2, 0), 6, 48, 2.7802),
    "P81": (1981, (1, 12, 26, 0), 3, 46, 2.7762),
    "P82": (1982, (4, 45, 128, 108), 12, 44, 2.7734),
}

# the n = 70 bound also appears as 2.7962 where the same construction is quoted
ALTERNATE_BOUNDS = {"P78": (2.7962,)}


def family_rank(n, family) -> Fraction:
    if family not in RANK_FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(RANK_FAMILIES)}")
    _, (c3, c2, c1, c0), den, _, _ = RANK_FAMILIES[family]
    return Fraction(c3 * n**3 + c2 * n**2 + c1 * n + c0, den)


def family_rank_formula(n, family):
    """(rank, ExponentReport) for the closed-form rank of an aggregation family."""
    if n < 2 or n % 2:
        raise ValueError("n must be even and at least 2")
    rank = family_rank(n, family)
    if rank.denominator != 1:
        warnings.warn(f"{family} rank at n={n} is not an integer: {rank}", stacklevel=2)
        value = math.log(rank.numerator / rank.denominator) / math.log(n)
        return rank, ExponentReport(value, "table-formula", (n, family, str(rank)), extra={"integral": False})
    rep = exponent_square(n, int(rank))
    return int(rank), ExponentReport(rep.value, "table-formula", (n, family, int(rank)), extra={"integral": True})


@dataclass(frozen=True)
class TableRow:
    year: int
    family: str
    n: int
    rank: int
    exponent: float
    bound: float
    passed: bool
    alternate_bounds: tuple = ()


def rank_table_rows(slack=1e-3):
    """Closed-form ranks and exponents versus the printed bounds.

    A row passes when the computed exponent is at most the bound and within
    ``slack`` below it.
    """
    rows = []
    for fam, (year, _, _, n, bound) in RANK_FAMILIES.items():
        rank, rep = family_rank_formula(n, fam)
        ok = rep.value <= bound and bound - rep.value <= slack
        rows.append(TableRow(year, fam, n, rank, rep.value, bound, ok, ALTERNATE_BOUNDS.get(fam, ())))
    return rows


def record_exponent(algorithms):
    """Smallest exponent over MM algorithms, with the algorithm attaining it.

    Square targets use log_n(r); rectangular ones 3 log_{kmn}(r).
    """
    best = None
    for alg in algorithms:
        if getattr(alg, "kind", None) != "mm":
            continue
        k, m, n = alg.target
        if k * m * n <= 1:
            continue
        rep = exponent_square(k, alg.rank) if k == m == n else exponent_rect(k, m, n, alg.rank)
        if best is None or rep.value < best[0].value:
            best = (rep, alg.name)
    if best is None:
        raise ValueError("no MM algorithms given")
    return best
