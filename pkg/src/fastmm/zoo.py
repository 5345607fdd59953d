"""Concrete decompositions: Strassen, Winograd, straightforward, complex multiplication."""
from __future__ import annotations

import re
from importlib import resources

import numpy as np

from .engine import (
    DecompositionAlgorithm,
    DimensionError,
    LinearProgram,
    MMShape,
    flatten_operand,
    straightforward_algorithm,
    trilinear_value,
)
from .ring import mpq, straightforward_mm

# A = [[a11, a12], [a21, a22]] flattens to (a11, a21, a12, a22); likewise B.
# C flattens row-major to (c11, c12, c21, c22).

STRASSEN_U = [
    # p1 p2 p3 p4 p5 p6 p7
    [1, 0, 1, 0, 1, -1, 0],  # a11
    [0, 1, 0, 0, 0, 1, 0],  # a21
    [0, 0, 0, 0, 1, 0, 1],  # a12
    [1, 1, 0, 1, 0, 0, -1],  # a22
]
STRASSEN_V = [
    [1, 1, 0, -1, 0, 1, 0],  # b11
    [0, 0, 0, 1, 0, 0, 1],  # b21
    [0, 0, 1, 0, 0, 1, 0],  # b12
    [1, 0, -1, 0, 1, 0, 1],  # b22
]
STRASSEN_W = [
    [1, 0, 0, 1, -1, 0, 1],  # c11 = p1 + p4 - p5 + p7
    [0, 0, 1, 0, 1, 0, 0],  # c12 = p3 + p5
    [0, 1, 0, 1, 0, 0, 0],  # c21 = p2 + p4
    [1, -1, 1, 0, 0, 1, 0],  # c22 = p1 - p2 + p3 + p6
]


def strassen2x2() -> DecompositionAlgorithm:
    return DecompositionAlgorithm(
        "strassen2x2", MMShape(2, 2, 2), STRASSEN_U, STRASSEN_V, STRASSEN_W, recursable=True
    )


def _winograd_programs():
    # inputs a11=0, a21=1, a12=2, a22=3
    pu = LinearProgram(
        4,
        (
            ((1, 1), (3, 1)),  # 4: s1 = a21 + a22
            ((4, 1), (0, -1)),  # 5: s2 = s1 - a11
            ((0, 1), (1, -1)),  # 6: s3 = a11 - a21
            ((2, 1), (5, -1)),  # 7: s4 = a12 - s2
        ),
        (5, 0, 2, 6, 4, 7, 3),
    )
    # inputs b11=0, b21=1, b12=2, b22=3
    pv = LinearProgram(
        4,
        (
            ((2, 1), (0, -1)),  # 4: s5 = b12 - b11
            ((3, 1), (4, -1)),  # 5: s6 = b22 - s5
            ((3, 1), (2, -1)),  # 6: s7 = b22 - b12
            ((5, 1), (1, -1)),  # 7: s8 = s6 - b21
        ),
        (5, 0, 1, 6, 4, 3, 7),
    )
    # inputs p1..p7 = 0..6
    pw = LinearProgram(
        7,
        (
            ((0, 1), (1, 1)),  # 7: t1 = p1 + p2
            ((7, 1), (3, 1)),  # 8: t2 = t1 + p4
            ((7, 1), (4, 1)),  # 9: t3 = t1 + p5
            ((1, 1), (2, 1)),  # 10: c11 = p2 + p3
            ((9, 1), (5, 1)),  # 11: c12 = t3 + p6
            ((8, 1), (6, -1)),  # 12: c21 = t2 - p7
            ((8, 1), (4, 1)),  # 13: c22 = t2 + p5
        ),
        (10, 11, 12, 13),
    )
    return pu, pv, pw


def winograd2x2() -> DecompositionAlgorithm:
    """Seven products with 15 additions when the shared sums are reused."""
    pu, pv, pw = _winograd_programs()
    U, V, WT = pu.matrix(), pv.matrix(), pw.matrix()
    return DecompositionAlgorithm(
        "winograd2x2", MMShape(2, 2, 2), U, V, WT.T, recursable=True, programs=(pu, pv, pw)
    )


def complex_mult_tensor():
    """(a1 + i a2)(b1 + i b2) = (a1 b1 - a2 b2) + i (a1 b2 + a2 b1)."""
    t = np.zeros((2, 2, 2), dtype=np.int64)
    t[0, 0, 0] = 1
    t[1, 1, 0] = -1
    t[0, 1, 1] = 1
    t[1, 0, 1] = 1
    return t


def complex_mult_rank3() -> DecompositionAlgorithm:
    """a1 b1, a2 b2 and (a1 + a2)(b1 + b2)."""
    U = [[1, 0, 1], [0, 1, 1]]
    V = [[1, 0, 1], [0, 1, 1]]
    W = [[1, -1, 0], [-1, -1, 1]]
    return DecompositionAlgorithm("complex_mult_rank3", complex_mult_tensor(), U, V, W, recursable=False)


def complex_mult_dual_tensor():
    # t'[j, h, i] = t[i, j, h]
    t = complex_mult_tensor()
    return np.transpose(t, (1, 2, 0)).copy()


def complex_mult_dual() -> DecompositionAlgorithm:
    """Rank 3 with products b1 (d1 - d2), b2 (d1 + d2), (b1 + b2) d2."""
    U = [[1, 0, 1], [0, 1, 1]]
    V = [[1, 1, 0], [-1, 1, 1]]
    W = [[1, 0, 1], [0, -1, 1]]
    return DecompositionAlgorithm("complex_mult_dual", complex_mult_dual_tensor(), U, V, W, recursable=False)


# -- registry -----------------------------------------------------------------------------

BUILTIN_NAMES = (
    "strassen2x2",
    "winograd2x2",
    "straightforward(k,m,n)",
    "complex_mult_rank3",
    "complex_mult_dual",
    "aggregation_pair(k,m,n)",
    "aggregation_triple(n)",
    "apa_pair(k,m,n)",
)

_NAME_RE = re.compile(r"^\s*([a-z_0-9]+?)\s*(?:\(([\d\s,]*)\))?\s*$")


def parse_name(name):
    """'straightforward(2,3,4)' -> ('straightforward', (2, 3, 4))."""
    m = _NAME_RE.match(name)
    if not m:
        raise KeyError(f"unknown builtin {name!r}")
    base, args = m.group(1), m.group(2)
    params = tuple(int(x) for x in args.split(",") if x.strip()) if args else ()
    return base, params


def load_builtin(name, *params):
    """Construct a builtin by name, e.g. ``load_builtin("aggregation_pair(2,3,4)")``.

    ``apa_pair`` returns an ApaAlgorithm; all other names return a
    DecompositionAlgorithm.
    """
    from . import aggregation

    base, parsed = parse_name(name)
    params = parsed or tuple(int(p) for p in params)
    if any(p < 1 for p in params):
        raise DimensionError(f"shape parameters must be positive, got {params}")
    fixed = {
        "strassen2x2": strassen2x2,
        "winograd2x2": winograd2x2,
        "complex_mult_rank3": complex_mult_rank3,
        "complex_mult_dual": complex_mult_dual,
    }
    shaped = {
        "straightforward": (3, straightforward_algorithm),
        "aggregation_pair": (3, aggregation.aggregation_pair),
        "aggregation_triple": (1, aggregation.aggregation_triple),
        "apa_pair": (3, aggregation.apa_pair),
    }
    if base in fixed:
        if params:
            raise KeyError(f"{base} takes no parameters")
        return fixed[base]()
    if base in shaped:
        arity, ctor = shaped[base]
        if len(params) != arity:
            raise KeyError(f"{base} needs {arity} parameter(s), got {params}")
        return ctor(*params)
    raise KeyError(f"unknown builtin {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def data_files():
    """Shipped algorithm files, as a name -> path mapping."""
    root = resources.files("fastmm") / "data"
    return {p.name[:-4]: p for p in root.iterdir() if p.name.endswith(".alg")}


# stem of each shipped file -> builtin name it must reproduce
DATA_FILE_BUILTINS = {
    "strassen2x2": "strassen2x2",
    "winograd2x2": "winograd2x2",
    "straightforward_2x2x2": "straightforward(2,2,2)",
    "complex_mult_rank3": "complex_mult_rank3",
    "complex_mult_dual": "complex_mult_dual",
    "aggregation_pair_2x2x2": "aggregation_pair(2,2,2)",
    "aggregation_triple_2": "aggregation_triple(2)",
    "apa_pair_2x2x2": "apa_pair(2,2,2)",
}


def trilinear_form_check(alg: DecompositionAlgorithm, A, B, D):
    """(Trace(ABD), sum_q l_q(A) l'_q(B) l''_q(D)); equal for every valid MM algorithm."""
    if not isinstance(alg.target, MMShape):
        raise ValueError("trilinear_form_check needs an MM target")
    k, m, n = alg.target
    A, B, D = (np.asarray(X).astype(object) for X in (A, B, D))
    if A.shape != (k, m) or B.shape != (m, n) or D.shape != (n, k):
        raise DimensionError(f"need {k}x{m}, {m}x{n}, {n}x{k} operands")
    ABD = straightforward_mm(straightforward_mm(A, B), D)
    trace = sum((ABD[i, i] for i in range(k)), mpq(0))
    return trace, trilinear_value(alg, A, B, D)


__all__ = [
    "BUILTIN_NAMES",
    "DATA_FILE_BUILTINS",
    "complex_mult_dual",
    "complex_mult_rank3",
    "complex_mult_tensor",
    "complex_mult_dual_tensor",
    "data_files",
    "flatten_operand",
    "load_builtin",
    "parse_name",
    "straightforward_algorithm",
    "strassen2x2",
    "trilinear_form_check",
    "winograd2x2",
]
