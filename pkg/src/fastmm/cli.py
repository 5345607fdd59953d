"""Command-line front end.

Every command prints a CSV (default) or JSON table to stdout, or to ``--out``.
Exit codes: 0 success, 1 computational failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import algfile, report
from .aggregation import ApaAlgorithm, apa_apply, apa_recover_exact, validate_border_rank
from .bench import (STABILITY_RATIO_BOUND, _exact_reference, apa_lambda_ladder, as_rows, crossover_table,
                    first_win, growth_ratios, max_relative_error, stability_report)
from .engine import (DUAL_MODES, DisjointSpec, apply_bilinear, apply_recursive,
                     dualize, equivalence_transform, operation_census, recursive_counts, tensor_product,
                     validate_decomposition)
from .exponents import exponent_rect, exponent_square, schonhage_tau, rank_table_rows
from .fft import (POLY_METHODS, MatrixPolynomial, complex_mm_3m, complex_mm_4m, convolve, inner_from_algorithm,
                  poly_mm, select_fft_size, straight_convolve)
from .randomized import error_stats
from .ring import RINGS, DimensionError, OpCounter, mpq, seeded_random_matrix, straightforward_mm
from .zoo import load_builtin

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad arguments detected after parsing; exits with code 2."""


# -- helpers ------------------------------------------------------------------------------


def resolve_algorithm(name=None, path=None):
    """Builtin name or algorithm file; a bare name that is an existing file also works."""
    if path:
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"algorithm file not found: {path}")
        try:
            return algfile.load(p)
        except algfile.AlgorithmFileError as exc:
            raise UsageError(f"cannot read algorithm file {path}: {exc}") from exc
    if not name:
        raise UsageError("give an algorithm with --alg NAME or --file PATH")
    try:
        return load_builtin(name)
    except KeyError as exc:
        if Path(name).is_file():
            return resolve_algorithm(path=name)
        raise UsageError(f"unknown algorithm {name!r}: not a builtin name and not a file ({exc.args[0]})") from exc


def _dims(args, default=None):
    if getattr(args, "dims", None):
        return tuple(args.dims)
    n = args.n[0] if isinstance(args.n, list) else args.n
    k = args.k if args.k is not None else n
    m = args.m if args.m is not None else n
    if n is None or k is None or m is None:
        if default is not None:
            return default
        raise UsageError("give matrix dimensions with --n, --k/--m/--n or --dims K M N")
    return k, m, n


def _sizes(args, default):
    if args.n is None:
        return list(default)
    return args.n if isinstance(args.n, list) else [args.n]


def _matrix(rows, cols, ring, seed):
    if ring in ("rational", "bigint"):
        return seeded_random_matrix(rows, cols, "int", seed, ring=ring)
    X = seeded_random_matrix(rows, cols, "float", seed)
    if ring == "complex":
        X = X + 1j * seeded_random_matrix(rows, cols, "float", seed + 10_000)
    return X


def _agrees(C, ref, ring):
    if ring in ("rational", "bigint"):
        return bool(np.array_equal(np.asarray(C, dtype=object), np.asarray(ref, dtype=object)))
    C = np.asarray(C, dtype=np.complex128)
    ref = np.asarray(ref, dtype=np.complex128)
    scale = max(np.abs(ref).max(initial=0.0), 1.0)
    return bool(np.abs(C - ref).max(initial=0.0) <= 1e-9 * scale)


def _parse_lambda(text):
    """'0.001', '1/1000' or '2^-10'."""
    s = text.strip().replace("**", "^")
    if "^" in s:
        base, exp = s.split("^", 1)
        return float(base) ** float(exp)
    if "/" in s:
        return float(mpq(s))
    return float(s)


def _emit(rows, args):
    text = report.emit(rows, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg):
    print(msg, file=sys.stderr)


# -- commands ----------------------------------------------------------------------------------


def cmd_multiply(args):
    ring = args.ring
    if args.alg == "straightforward" and not args.file:
        k, m, n = _dims(args)
        A, B = _matrix(k, m, ring, args.seed), _matrix(m, n, ring, args.seed + 1)
        c = OpCounter()
        t0 = time.perf_counter()
        straightforward_mm(A, B, c)
        secs = time.perf_counter() - t0
        _emit([{"algorithm": "straightforward", "k": k, "m": m, "n": n, "cutoff": None, "ring": ring,
                "ring_muls": c.ring_muls, "ring_adds": c.ring_adds, "const_muls": c.const_muls,
                "predicted_muls": k * m * n, "predicted_adds": k * n * (m - 1), "correct": True,
                "seconds": secs}], args)
        return EXIT_OK

    alg = resolve_algorithm(args.alg, args.file)
    if isinstance(alg, ApaAlgorithm):
        return _multiply_apa(alg, args)
    if alg.kind == "raw":
        raise UsageError(f"{alg.name} has a raw tensor target; use 'validate' for it")

    c = OpCounter()
    row = {"algorithm": alg.name, "cutoff": args.cutoff, "ring": ring}
    if alg.kind == "mm" and alg.recursable and alg.target.is_square and alg.target.k >= 2:
        k, m, n = _dims(args, tuple(alg.target))
        if not k == m == n:
            raise UsageError("recursive multiplication needs square operands (use --n)")
        A, B = _matrix(n, n, ring, args.seed), _matrix(n, n, ring, args.seed + 1)
        t0 = time.perf_counter()
        C = apply_recursive(alg, A, B, args.cutoff, c)
        secs = time.perf_counter() - t0
        pred = recursive_counts(alg, n, args.cutoff)
        row.update(k=n, m=n, n=n)
        ok = _agrees(C, straightforward_mm(A, B), ring)
    elif alg.kind == "mm":
        k, m, n = _dims(args, tuple(alg.target))
        if (k, m, n) != tuple(alg.target):
            raise UsageError(f"{alg.name} is not recursable and multiplies {alg.target} only, not {k}x{m}x{n}")
        A, B = _matrix(k, m, ring, args.seed), _matrix(m, n, ring, args.seed + 1)
        t0 = time.perf_counter()
        C = apply_bilinear(alg, A, B, c)
        secs = time.perf_counter() - t0
        pred = c
        row.update(k=k, m=m, n=n)
        ok = _agrees(C, straightforward_mm(A, B), ring)
    else:
        first = [_matrix(s.k, s.m, ring, args.seed + 2 * t) for t, s in enumerate(alg.target)]
        second = [_matrix(s.m, s.n, ring, args.seed + 2 * t + 1) for t, s in enumerate(alg.target)]
        t0 = time.perf_counter()
        outs = apply_bilinear(alg, first, second, c)
        secs = time.perf_counter() - t0
        pred = c
        row.update(k=None, m=None, n=None, target=alg.target_label)
        ok = all(_agrees(C, straightforward_mm(A, B), ring) for C, A, B in zip(outs, first, second))
    row.update(ring_muls=c.ring_muls, ring_adds=c.ring_adds, const_muls=c.const_muls,
               predicted_muls=pred.ring_muls, predicted_adds=pred.ring_adds,
               correct=ok and (c.ring_muls, c.ring_adds) == (pred.ring_muls, pred.ring_adds), seconds=secs)
    _emit([row], args)
    return EXIT_OK if row["correct"] else EXIT_FAIL


def _apa_operands(alg, ring, seed):
    first = [_matrix(s.k, s.m, ring, seed + 2 * t) for t, s in enumerate(alg.target)]
    second = [_matrix(s.m, s.n, ring, seed + 2 * t + 1) for t, s in enumerate(alg.target)]
    return first, second


def _multiply_apa(alg: ApaAlgorithm, args):
    if not isinstance(alg.target, DisjointSpec):
        raise UsageError("APA multiplication supports disjoint targets")
    if args.points:
        first, second = _apa_operands(alg, "bigint", args.seed)
        outs = apa_recover_exact(alg, first, second, points=range(1, args.points + 1))
        ok = all(np.array_equal(C, straightforward_mm(A, B)) for C, A, B in zip(outs, first, second))
        row = {"algorithm": alg.name, "mode": "exact-recovery", "points": args.points, "lambda": None,
               "max_rel_error": 0.0 if ok else None, "correct": ok}
    else:
        lam = _parse_lambda(args.lam) if args.lam else 2.0**-10
        first, second = _apa_operands(alg, "f64", args.seed)
        outs = apa_apply(alg, first, second, lam)
        err = max(max_relative_error(C, _exact_reference(A, B)) for C, A, B in zip(outs, first, second))
        row = {"algorithm": alg.name, "mode": "float", "points": None, "lambda": lam, "max_rel_error": err,
               "correct": True}
    _emit([row], args)
    return EXIT_OK if row["correct"] else EXIT_FAIL


def cmd_validate(args):
    alg = resolve_algorithm(args.alg, args.file)
    if isinstance(alg, ApaAlgorithm):
        rep = validate_border_rank(alg)
        row = {"name": alg.name, "kind": "apa", "target": alg.target_label, "status": "PASS" if rep.ok else "FAIL",
               "rank": alg.rank, "border_rank": rep.border_rank, "scale": rep.scale, "degree": rep.degree,
               "residual": None,
               "violations": ";".join(f"lambda^{t}@{a},{b},{c}" for t, (a, b, c), _, _ in rep.failures)}
        _emit([row], args)
        return EXIT_OK if rep.ok else EXIT_FAIL
    rep = validate_decomposition(alg, exact=True)
    cen = operation_census(alg)
    row = {"name": alg.name, "kind": "exact", "target": alg.target_label, "status": "PASS" if rep.ok else "FAIL",
           "rank": rep.rank, "residual": str(rep.residual),
           "violations": ";".join(",".join(str(i) for i in v) for v in rep.violations)}
    row.update({f"census_{k}": v for k, v in cen.as_dict().items()})
    _emit([row], args)
    return EXIT_OK if rep.ok else EXIT_FAIL


def _random_pairs(alg, seed):
    """Diagonal (D, D^-1) pairs with entries in {1, 2, 1/2, -1} for each role."""
    rng = np.random.default_rng(seed)
    k, m, n = alg.target
    choices = [mpq(1), mpq(2), mpq(1, 2), mpq(-1)]
    pairs = []
    for size in (k, m, n):
        d = [choices[int(i)] for i in rng.integers(0, len(choices), size)]
        D = np.diag(np.array(d, dtype=object))
        Di = np.diag(np.array([1 / x for x in d], dtype=object))
        pairs.append((D, Di))
    return pairs


def cmd_compose(args):
    alg = resolve_algorithm(args.alg, args.file)
    if isinstance(alg, ApaAlgorithm):
        raise UsageError("compose works on exact algorithms")
    try:
        if args.op == "product":
            other = resolve_algorithm(args.alg2, args.file2) if (args.alg2 or args.file2) else alg
            if isinstance(other, ApaAlgorithm):
                raise UsageError("compose works on exact algorithms")
            out = tensor_product(alg, other)
        elif args.op == "dual":
            out = dualize(alg, args.mode)
        else:
            perm = np.random.default_rng(args.seed).permutation(alg.rank)
            out = equivalence_transform(alg, _random_pairs(alg, args.seed), perm)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    rep = validate_decomposition(out)
    if args.save:
        algfile.save(out, args.save)
    _emit([{"name": out.name, "op": args.op, "target": out.target_label, "rank": out.rank,
            "status": "PASS" if rep.ok else "FAIL", "residual": str(rep.residual), "saved": args.save}], args)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_exponent(args):
    if args.r is None:
        raise UsageError("exponent needs --r")
    if args.dims:
        k, m, n = args.dims
        rep = exponent_rect(k, m, n, args.r)
    else:
        if args.n is None:
            raise UsageError("exponent needs --n or --dims")
        rep = exponent_square(args.n, args.r)
    _emit([{"formula": rep.formula, "inputs": " ".join(str(x) for x in rep.inputs), "rank": args.r,
            "exponent": rep.value}], args)
    return EXIT_OK


def cmd_tau(args):
    if not args.problem or args.r is None:
        raise UsageError("tau needs at least one --problem K M N and --r")
    try:
        rep = schonhage_tau([tuple(p) for p in args.problem], args.r)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit([{"problems": ";".join(f"{k}x{m}x{n}" for k, m, n in args.problem), "rank": args.r,
            "tau": rep.value, "omega_bound": rep.omega_bound, "residual": rep.residual,
            "iterations": rep.iterations}], args)
    return EXIT_OK


def cmd_tables(args):
    rows = rank_table_rows()
    out = []
    for r in rows:
        out.append({"year": r.year, "family": r.family, "n": r.n, "rank": r.rank, "exponent": r.exponent,
                    "bound": r.bound, "status": "PASS" if r.passed else "FAIL",
                    "alternate_bounds": " ".join(str(b) for b in r.alternate_bounds)})
    _emit(out, args)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def cmd_convolve(args):
    rows = []
    rng = np.random.default_rng(args.seed)
    for deg in _sizes(args, [15, 63, 255, 511]):
        a = rng.uniform(-1, 1, deg + 1)
        b = rng.uniform(-1, 1, deg + 1)
        c = OpCounter()
        got = convolve(a, b, c)
        ref = straight_convolve(a, b)
        err = float(np.abs(got - ref).max())
        rows.append({"degree": deg, "K": select_fft_size(deg), "max_abs_error": err, "ring_muls": c.ring_muls,
                     "ring_adds": c.ring_adds, "const_muls": c.const_muls,
                     "status": "PASS" if err <= 1e-9 else "FAIL"})
    _emit(rows, args)
    return EXIT_OK if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def cmd_polymm(args):
    n = args.n if args.n is not None else 4
    d = args.degree
    rng = np.random.default_rng(args.seed)
    Ax = MatrixPolynomial(rng.uniform(-1, 1, (d, n, n)))
    Bx = MatrixPolynomial(rng.uniform(-1, 1, (d, n, n)))
    ref = poly_mm(Ax, Bx, "straight").coeffs
    inner = inner_from_algorithm(resolve_algorithm(args.alg, args.file), args.cutoff) \
        if (args.alg or args.file) else None

    rows = []
    for method in ([args.method] if args.method else POLY_METHODS):
        c = OpCounter()
        got = poly_mm(Ax, Bx, method, inner, c).coeffs
        err = float(np.abs(got - ref).max())
        rows.append({"method": method, "n": n, "degree_bound": d, "K": select_fft_size(d - 1),
                     "inner_mm_calls": c.events.get("inner_mm", 0), "ring_muls": c.ring_muls,
                     "ring_adds": c.ring_adds, "max_abs_error": err, "status": "PASS" if err <= 1e-9 else "FAIL"})
    _emit(rows, args)
    return EXIT_OK if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def cmd_complexmm(args):
    rows = []
    for N in _sizes(args, [2, 5, 10]):
        parts = [seeded_random_matrix(N, N, "int", args.seed + t) for t in range(4)]
        c3, c4 = OpCounter(), OpCounter()
        C3 = complex_mm_3m(*parts, counter=c3)
        C4 = complex_mm_4m(*parts, counter=c4)
        ok = all(np.array_equal(x, y) for x, y in zip(C3, C4))
        ok = ok and (c3.ring_muls, c3.ring_adds) == (3 * N**3, 3 * N**3 + 2 * N**2)
        rows.append({"N": N, "muls_3m": c3.ring_muls, "adds_3m": c3.ring_adds, "muls_4m": c4.ring_muls,
                     "adds_4m": c4.ring_adds, "status": "PASS" if ok else "FAIL"})
    _emit(rows, args)
    return EXIT_OK if all(r["status"] == "PASS" for r in rows) else EXIT_FAIL


def cmd_sample(args):
    n = args.n if args.n is not None else 50
    A = seeded_random_matrix(n, n, "float", args.seed)
    B = seeded_random_matrix(n, n, "float", args.seed + 1)
    st = error_stats(A, B, args.c, args.trials, args.seed)
    _emit([{"n": n, "c": args.c, "trials": args.trials, "seed": args.seed, "mean": st.mean, "max": st.max,
            "std": st.std}], args)
    return EXIT_OK


def cmd_crossover(args):
    alg = resolve_algorithm(args.alg or "strassen2x2", args.file)
    if isinstance(alg, ApaAlgorithm) or not alg.recursable:
        raise UsageError(f"{alg.name} is not recursable")
    sizes = _sizes(args, [2**g for g in range(1, 11)])
    rows = crossover_table(alg, sizes, args.cutoff, args.reps, args.time_limit, args.seed)
    _note(f"op-count crossover: {first_win(rows, 'opcount_win')}; "
          f"wall-time crossover (machine dependent): {first_win(rows, 'time_win')}")
    _emit(as_rows(rows), args)
    return EXIT_OK


def cmd_stability(args):
    if args.apa:
        k, m, n = args.dims or (2, 2, 2)
        if args.lam:
            lams = [_parse_lambda(x) for x in args.lam]
            exps = [-int(round(np.log2(x))) for x in lams]
            if any(2.0**-t != x for t, x in zip(exps, lams)):
                raise UsageError("--lambda values for the ladder must be powers of two")
        else:
            exps = list(range(4, 31))
        rows, knee = apa_lambda_ladder(k, m, n, exps, args.seed)
        _note(f"roundoff knee at lambda = 2^-{knee}")
        _emit(rows, args)
        return EXIT_OK
    name = args.alg or "strassen2x2"
    alg = None if name == "straightforward" and not args.file else resolve_algorithm(name, args.file)
    if isinstance(alg, ApaAlgorithm) or (alg is not None and not alg.recursable):
        raise UsageError("stability needs a recursable exact algorithm (or --apa)")
    sizes = sorted(_sizes(args, [16, 32, 64]))
    reps = stability_report(alg, sizes, args.cutoff, args.seed, args.distribution)
    ratios = growth_ratios(reps)
    bad = [r for r in ratios if r > STABILITY_RATIO_BOUND]
    _note(f"growth ratios per recursion level: {[round(r, 3) for r in ratios]} (bound {STABILITY_RATIO_BOUND})")
    _emit(as_rows(reps), args)
    return EXIT_FAIL if bad else EXIT_OK


# -- parser -------------------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="fastmm", description="Bilinear matrix-multiplication algorithms.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, alg=True, sizes=False):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", help="write the table here instead of stdout")
        sp.add_argument("--seed", type=int, default=0)
        if alg:
            sp.add_argument("--alg", help="builtin name, e.g. strassen2x2 or aggregation_pair(2,3,4)")
            sp.add_argument("--file", help="algorithm file")
        if sizes:
            sp.add_argument("--n", type=int, nargs="+", help="one or more sizes")
        return sp

    sp = common(sub.add_parser("multiply", help="multiply seeded random matrices and report op counts"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--dims", type=int, nargs=3, metavar=("K", "M", "N"))
    sp.add_argument("--cutoff", type=int, default=1)
    sp.add_argument("--ring", choices=RINGS, default="bigint")
    sp.add_argument("--lambda", dest="lam", help="APA evaluation point (e.g. 2^-10)")
    sp.add_argument("--points", type=int, help="APA exact recovery from lambda = 1..POINTS")
    sp.set_defaults(func=cmd_multiply)

    sp = common(sub.add_parser("validate", help="exact Brent-equation or border-rank check"))
    sp.set_defaults(func=cmd_validate)

    sp = common(sub.add_parser("compose", help="tensor product, dual or equivalence transform"))
    sp.add_argument("--op", choices=("product", "dual", "equiv"), default="product")
    sp.add_argument("--alg2")
    sp.add_argument("--file2")
    sp.add_argument("--mode", choices=DUAL_MODES, default="cycle")
    sp.add_argument("--save", help="write the composed algorithm to this file")
    sp.set_defaults(func=cmd_compose)

    sp = common(sub.add_parser("exponent", help="log_n r or 3 log_kmn r"), alg=False)
    sp.add_argument("--n", type=int)
    sp.add_argument("--dims", type=int, nargs=3, metavar=("K", "M", "N"))
    sp.add_argument("--r", type=int)
    sp.set_defaults(func=cmd_exponent)

    sp = common(sub.add_parser("tau", help="solve sum (k m n)^tau = r"), alg=False)
    sp.add_argument("--problem", type=int, nargs=3, action="append", metavar=("K", "M", "N"))
    sp.add_argument("--r", type=float)
    sp.set_defaults(func=cmd_tau)

    sp = common(sub.add_parser("tables", help="closed-form rank/exponent table"), alg=False)
    sp.set_defaults(func=cmd_tables)

    sp = common(sub.add_parser("convolve", help="FFT convolution versus the direct sum"), alg=False, sizes=True)
    sp.set_defaults(func=cmd_convolve)

    sp = common(sub.add_parser("polymm", help="products of matrix polynomials"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--degree", type=int, default=8, help="degree bound d of each factor")
    sp.add_argument("--method", choices=POLY_METHODS)
    sp.add_argument("--cutoff", type=int, default=1)
    sp.set_defaults(func=cmd_polymm)

    sp = common(sub.add_parser("complexmm", help="3M complex products versus 4M"), alg=False, sizes=True)
    sp.set_defaults(func=cmd_complexmm)

    sp = common(sub.add_parser("sample", help="randomized column/row sampling error"), alg=False)
    sp.add_argument("--n", type=int)
    sp.add_argument("--c", type=int, default=25)
    sp.add_argument("--trials", type=int, default=200)
    sp.set_defaults(func=cmd_sample)

    sp = common(sub.add_parser("crossover", help="fast versus straightforward per size"), sizes=True)
    sp.add_argument("--cutoff", type=int, default=1)
    sp.add_argument("--reps", type=int, default=3)
    sp.add_argument("--time-limit", type=int, default=128, help="largest size that is actually timed")
    sp.set_defaults(func=cmd_crossover)

    sp = common(sub.add_parser("stability", help="float versus exact error per size"), sizes=True)
    sp.add_argument("--cutoff", type=int, default=4)
    sp.add_argument("--distribution", choices=("int", "float"), default="int")
    sp.add_argument("--apa", action="store_true", help="lambda ladder of the APA pair instead")
    sp.add_argument("--dims", type=int, nargs=3, metavar=("K", "M", "N"))
    sp.add_argument("--lambda", dest="lam", nargs="+", help="ladder points, powers of two")
    sp.set_defaults(func=cmd_stability)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for attr in ("reps", "cutoff", "trials", "c", "degree"):
        v = getattr(args, attr, None)
        if v is not None and v < 1:
            parser.error(f"--{attr} must be at least 1")
    n = getattr(args, "n", None)
    if n is not None and any(x < 1 for x in (n if isinstance(n, list) else [n])):
        parser.error("sizes must be positive")
    try:
        return args.func(args)
    except (UsageError, DimensionError) as exc:
        print(f"fastmm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
