"""Numba versus pure-numpy timings for the hot kernels.

    python3 benchmarks/bench_kernels.py [--reps 5] [--format csv|json]

Both implementations are called explicitly, so the FASTMM_PURE_NUMPY flag
does not matter here. The first numba call per signature (compilation) is
excluded by the warmup run.
"""
import argparse
import sys

from fastmm import report
from fastmm.bench import kernel_benchmark


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    args = p.parse_args(argv)
    rows = kernel_benchmark(reps=args.reps)
    by_key = {}
    for r in rows:
        by_key.setdefault((r["kernel"], r["size"]), {})[r["backend"]] = r["seconds"]
    for r in rows:
        t = by_key[(r["kernel"], r["size"])]
        r["speedup_vs_numpy"] = t["numpy"] / r["seconds"] if r["seconds"] > 0 else float("nan")
    sys.stdout.write(report.emit(rows, args.format))


if __name__ == "__main__":
    main()
