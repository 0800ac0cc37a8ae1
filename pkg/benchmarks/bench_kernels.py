#!/usr/bin/env python3
"""Benchmark the compiled split kernels against the numpy fallback.

Both backends return bit-identical splits; this script measures the speed
difference on raw kernel calls and on end-to-end forest/boosting fits.

    python3 benchmarks/bench_kernels.py [--rows 4000] [--dims 64] [--repeat 3]
"""
import argparse
import time

import numpy as np

from ledgerlab._kernels import _split_py

try:
    from ledgerlab._kernels import _split as _split_cy
except ImportError:
    _split_cy = None


def bench(fn, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(rows: int, dims: int, repeat: int) -> None:
    rng = np.random.default_rng(0)
    X = np.ascontiguousarray(rng.normal(size=(rows, dims)))
    y = rng.integers(0, 2, size=rows).astype(np.uint8)
    r = rng.normal(size=rows)
    w = rng.uniform(0.5, 2.0, size=rows)

    print(f"raw kernels on {rows} x {dims}:")
    for name, py_fn, cy_fn, target in (
        ("gini", _split_py.best_split_gini, getattr(_split_cy, "best_split_gini", None), y),
        ("sse ", _split_py.best_split_sse, getattr(_split_cy, "best_split_sse", None), r),
    ):
        t_py = bench(py_fn, X, target, w, repeat=repeat)
        line = f"  {name}: python {t_py * 1e3:8.1f} ms"
        if cy_fn is not None:
            t_cy = bench(cy_fn, X, target, w, repeat=repeat)
            assert py_fn(X, target, w) == cy_fn(X, target, w)
            line += f"   cython {t_cy * 1e3:8.1f} ms   speedup {t_py / t_cy:5.2f}x"
        print(line)


def bench_fits(rows: int, dims: int, repeat: int) -> None:
    import os
    import subprocess
    import sys

    script = (
        "import time, numpy as np\n"
        "from ledgerlab.classifiers import ClassifierSpec, fit\n"
        "from ledgerlab._kernels import kernel_backend\n"
        f"rng = np.random.default_rng(0)\n"
        f"X = rng.normal(size=({rows}, {dims}))\n"
        f"y = (X[:, 0] + 0.3 * rng.normal(size={rows}) > 0).astype(int).tolist()\n"
        "t0 = time.perf_counter()\n"
        "fit(ClassifierSpec('rf', {'n_trees': 20, 'max_depth': 8}, seed=0), X, y)\n"
        "rf = time.perf_counter() - t0\n"
        "t0 = time.perf_counter()\n"
        "fit(ClassifierSpec('gbm', {'n_rounds': 20, 'max_depth': 3}, seed=0), X, y)\n"
        "gbm = time.perf_counter() - t0\n"
        "print(f'{kernel_backend()},{rf:.3f},{gbm:.3f}')\n"
    )
    results = {}
    for pure in ("", "1"):
        env = dict(os.environ, LEDGERLAB_PURE_PY=pure) if pure else dict(os.environ)
        env.pop("LEDGERLAB_PURE_PY", None) if not pure else None
        out = subprocess.run(
            [sys.executable, "-c", script], env=env, capture_output=True, text=True,
            check=True,
        ).stdout.strip()
        backend, rf, gbm = out.split(",")
        results[backend] = (float(rf), float(gbm))
    print(f"end-to-end fits on {rows} x {dims} (RF 20 trees d8, GBM 20 rounds d3):")
    for backend, (rf, gbm) in results.items():
        print(f"  {backend:7s}: rf {rf:6.2f} s   gbm {gbm:6.2f} s")
    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        print(f"  speedup: rf {py[0] / cy[0]:.2f}x   gbm {py[1] / cy[1]:.2f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=4000)
    parser.add_argument("--dims", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _split_cy is None:
        print("compiled kernel not built; benchmarking the python fallback only")
    bench_kernels(args.rows, args.dims, args.repeat)
    bench_fits(args.rows, args.dims, args.repeat)


if __name__ == "__main__":
    main()
