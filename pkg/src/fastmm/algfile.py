"""Plain-text algorithm files.

Layout::

    # comment
    name: strassen2x2
    kind: exact                    (exact | apa)
    target: mm 2 2 2               (mm k m n | disjoint k m n | k m n ... | raw a b c)
    rank: 7
    recursable: true
    scale: 2                       (apa only)
    notes: free text               (optional)
    U:
    1 0 1 0 1 -1 0                 (one row per coefficient row, one column per product)
    ...
    V:
    ...
    W:
    ...
    T:                             (raw targets only: "a b c value" per nonzero entry)
    program U 4                    (optional straight-line schedule for U, V or W)
    step 1:1 3:1
    out 5 0 2 6 4 7 3

Exact coefficients are integers or fractions p/q. APA coefficients are
polynomials written as '+'-joined ``coef@power`` terms, e.g. ``1@0+-1@2``.
Saving and loading reproduces every coefficient exactly.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .aggregation import ApaAlgorithm, LambdaPoly, _cube_from_polys, format_poly, parse_poly
from .engine import DecompositionAlgorithm, DisjointSpec, LinearProgram, MMShape
from .ring import mpq


class AlgorithmFileError(ValueError):
    """Malformed algorithm file."""


def _fmt(x):
    return str(mpq(x))


def _target_line(alg):
    t = alg.target
    if isinstance(t, MMShape):
        return f"mm {t.k} {t.m} {t.n}"
    if isinstance(t, DisjointSpec):
        return "disjoint " + " | ".join(f"{s.k} {s.m} {s.n}" for s in t)
    return "raw " + " ".join(str(d) for d in np.asarray(t).shape)


def dumps(alg) -> str:
    lines = ["# fastmm algorithm file", f"name: {alg.name}"]
    apa = isinstance(alg, ApaAlgorithm)
    lines.append(f"kind: {'apa' if apa else 'exact'}")
    lines.append(f"target: {_target_line(alg)}")
    lines.append(f"rank: {alg.rank}")
    lines.append(f"recursable: {'true' if alg.recursable else 'false'}")
    if apa:
        lines.append(f"scale: {alg.scale}")
    if alg.notes:
        lines.append("notes: " + " ".join(alg.notes.split()))
    for role in ("U", "V", "W"):
        lines.append(f"{role}:")
        if apa:
            P = alg.polys(role)
            for row in P:
                lines.append(" ".join(format_poly(p) for p in row))
        else:
            M = getattr(alg, role)
            for row in M:
                lines.append(" ".join(_fmt(x) for x in row))
    if not apa and alg.kind == "raw":
        lines.append("T:")
        T = alg.target
        for idx in np.ndindex(T.shape):
            if T[idx] != 0:
                lines.append(" ".join(str(i) for i in idx) + " " + _fmt(T[idx]))
    if not apa and alg.programs is not None:
        for role, prog in zip(("U", "V", "W"), alg.programs):
            lines.append(f"program {role} {prog.n_inputs}")
            for terms in prog.steps:
                lines.append("step " + " ".join(f"{src}:{_fmt(c)}" for src, c in terms))
            lines.append("out " + " ".join(str(o) for o in prog.outputs))
    return "\n".join(lines) + "\n"


def save(alg, path):
    Path(path).write_text(dumps(alg))


def _parse_target(text):
    parts = text.split(None, 1)
    if not parts:
        raise AlgorithmFileError("empty target")
    kind = parts[0]
    rest = parts[1] if len(parts) > 1 else ""
    try:
        if kind == "mm":
            return "mm", MMShape(*(int(x) for x in rest.split()))
        if kind == "disjoint":
            return "disjoint", DisjointSpec([tuple(int(x) for x in blk.split()) for blk in rest.split("|")])
        if kind == "raw":
            return "raw", tuple(int(x) for x in rest.split())
    except TypeError as exc:
        raise AlgorithmFileError(f"bad target {text!r}") from exc
    raise AlgorithmFileError(f"unknown target kind {kind!r}")


def loads(text: str):
    header = {}
    sections = {}
    programs = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in ("U:", "V:", "W:", "T:"):
            current = sections.setdefault(line[0], [])
            continue
        if line.startswith("program "):
            parts = line.split()
            if len(parts) != 3 or parts[1] not in ("U", "V", "W"):
                raise AlgorithmFileError(f"line {lineno}: bad program header {line!r}")
            current = programs.setdefault(parts[1], {"n": int(parts[2]), "steps": [], "out": None})
            continue
        if isinstance(current, dict):
            if line.startswith("step"):
                terms = []
                for tok in line.split()[1:]:
                    src, _, c = tok.partition(":")
                    terms.append((int(src), mpq(c)))
                current["steps"].append(tuple(terms))
                continue
            if line.startswith("out"):
                current["out"] = tuple(int(x) for x in line.split()[1:])
                continue
        if current is None or (":" in line and line.split(":", 1)[0] in ("name", "kind", "target", "rank",
                                                                            "recursable", "scale", "notes")):
            key, sep, val = line.partition(":")
            if not sep:
                raise AlgorithmFileError(f"line {lineno}: expected 'key: value', got {line!r}")
            header[key.strip()] = val.strip()
            continue
        if isinstance(current, dict):
            raise AlgorithmFileError(f"line {lineno}: unexpected {line!r} inside a program")
        current.append((lineno, line.split()))

    for key in ("name", "kind", "target", "rank"):
        if key not in header:
            raise AlgorithmFileError(f"missing header field {key!r}")
    kind = header["kind"]
    tkind, target = _parse_target(header["target"])
    rank = int(header["rank"])
    recursable = header.get("recursable", "false").lower() == "true"
    for role in "UVW":
        if role not in sections:
            raise AlgorithmFileError(f"missing section {role}:")

    def grid(role, parse):
        rows = []
        for lineno, toks in sections[role]:
            if len(toks) != rank:
                raise AlgorithmFileError(f"line {lineno}: {role} row has {len(toks)} entries, rank is {rank}")
            try:
                rows.append([parse(t) for t in toks])
            except ValueError as exc:
                raise AlgorithmFileError(f"line {lineno}: {exc}") from exc
        out = np.empty((len(rows), rank), dtype=object)
        for i, row in enumerate(rows):
            out[i, :] = row
        return out

    if kind == "apa":
        if tkind == "raw":
            raise AlgorithmFileError("APA algorithms need MM or disjoint targets")
        cubes = [_cube_from_polys(grid(r, parse_poly)) for r in "UVW"]
        return ApaAlgorithm(header["name"], target, *cubes, scale=int(header.get("scale", 0)),
                            recursable=recursable, notes=header.get("notes", ""))
    if kind != "exact":
        raise AlgorithmFileError(f"unknown kind {kind!r}")
    U, V, W = (grid(r, mpq) for r in "UVW")
    if tkind == "raw":
        T = np.empty(target, dtype=object)
        T.fill(mpq(0))
        for lineno, toks in sections.get("T", []):
            if len(toks) != 4:
                raise AlgorithmFileError(f"line {lineno}: tensor entries are 'a b c value'")
            T[int(toks[0]), int(toks[1]), int(toks[2])] = mpq(toks[3])
        target = T
    progs = None
    if programs:
        if set(programs) != {"U", "V", "W"}:
            raise AlgorithmFileError("programs must be given for all of U, V and W")
        progs = tuple(LinearProgram(programs[r]["n"], tuple(programs[r]["steps"]), programs[r]["out"])
                      for r in "UVW")
    return DecompositionAlgorithm(header["name"], target, U, V, W, recursable=recursable, programs=progs,
                                  notes=header.get("notes", ""))


def load(path):
    return loads(Path(path).read_text())


def same_algorithm(a, b) -> bool:
    """Exact equality of name, target, flags and every coefficient."""
    if type(a) is not type(b) or a.name != b.name or a.recursable != b.recursable:
        return False
    if isinstance(a, ApaAlgorithm):
        return (a.scale == b.scale and a.target == b.target
                and all(np.array_equal(x, y) for x, y in ((a.Uc, b.Uc), (a.Vc, b.Vc), (a.Wc, b.Wc))))
    if a.kind != b.kind:
        return False
    if a.kind == "raw":
        if a.target.shape != b.target.shape or not np.array_equal(a.target, b.target):
            return False
    elif a.target != b.target:
        return False
    if (a.programs is None) != (b.programs is None):
        return False
    if a.programs is not None and a.programs != b.programs:
        return False
    return a.same_coefficients(b)


__all__ = ["AlgorithmFileError", "LambdaPoly", "dumps", "load", "loads", "same_algorithm", "save"]
