"""CSV/JSON emission of flat result rows and the matching parser."""
from __future__ import annotations

import csv
import io
import json
import math


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def emit(rows, fmt="csv") -> str:
    rows = [dict(r) for r in rows]
    if fmt == "json":
        return json.dumps(rows, indent=2, default=str) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    if not rows:
        return ""
    fields = list(rows[0])
    for r in rows[1:]:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k)) for k in fields})
    return buf.getvalue()


def _parse_cell(s):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def parse(text, fmt="csv"):
    """Rows back from :func:`emit` output, with ints, floats and booleans restored."""
    if fmt == "json":
        return json.loads(text) if text.strip() else []
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    if not text.strip():
        return []
    return [{k: _parse_cell(v) for k, v in r.items()} for r in csv.DictReader(io.StringIO(text))]


def rows_equal(a, b):
    """Row equality treating NaN as equal to NaN."""
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if set(x) != set(y):
            return False
        for k in x:
            u, v = x[k], y[k]
            if isinstance(u, float) and isinstance(v, float) and math.isnan(u) and math.isnan(v):
                continue
            if u != v:
                return False
    return True
