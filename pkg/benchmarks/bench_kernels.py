"""Time the compiled mobility kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--configs 2000] [--repeats 5]

Each row evaluates ``T(q)`` for a batch of random configurations with both
kernels, checks they agree, and reports the best-of-N wall time.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from rotom import _backend
from rotom.chain import chain_from_arrays
from rotom.reference import preset


def serial_chain(n: int, seed: int = 0):
    """Spatial chain with n joints, random axes and unit links."""
    rng = np.random.default_rng(seed)
    axes = rng.normal(size=(n, 3))
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    origins = np.vstack([np.zeros(3), dirs[:-1]])
    return chain_from_arrays(axes, origins, dirs, np.ones(n), name=f"spatial{n}")


def best_time(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(configs: int, repeats: int) -> list[dict]:
    kernels = _backend.available()
    models = [preset("pendulum"), preset("double_pendulum"), preset("arm4dof"), serial_chain(6), serial_chain(12)]
    rng = np.random.default_rng(1)
    rows = []
    for model in models:
        Q = rng.uniform(-np.pi, np.pi, (configs, model.n))
        if model.name == "arm4dof":
            Q[:, 1] = np.clip(Q[:, 1], -1.4, 1.4)
            Q[:, 3] = rng.uniform(0.1, 2.6, configs)
        row = {"model": model.name, "n": model.n}
        results = {}
        for name, impl in kernels.items():
            results[name] = impl.mobility_batch(model.packed, Q)[0]
            row[name] = best_time(lambda: impl.mobility_batch(model.packed, Q), repeats)
        if len(results) == 2:
            row["max_diff"] = float(np.nanmax(np.abs(results["python"] - results["cython"])))
        rows.append(row)
    return rows


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--configs", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    rows = run(args.configs, args.repeats)
    have_c = "cython" in _backend.available()
    print(f"{args.configs} configurations per batch, best of {args.repeats}; selected kernel: {_backend.NAME}")
    print(f"{'model':<16}{'n':>3}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max |dT|':>11}")
    for r in rows:
        py = 1e3 * r["python"]
        if have_c:
            cy = 1e3 * r["cython"]
            print(f"{r['model']:<16}{r['n']:>3}{py:>14.2f}{cy:>14.3f}{py / cy:>9.0f}x{r['max_diff']:>11.1e}")
        else:
            print(f"{r['model']:<16}{r['n']:>3}{py:>14.2f}{'-':>14}{'-':>10}{'-':>11}")


if __name__ == "__main__":
    main()
