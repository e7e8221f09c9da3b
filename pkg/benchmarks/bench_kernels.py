"""Compare the compiled and numpy path kernels on representative specs.

Usage::

    python benchmarks/bench_kernels.py [--paths N] [--step H] [--repeat R]

Each row reports the best of ``R`` wall times per backend, the speedup, and
whether the two backends produced identical status codes and values within
1e-12 relative.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lapdual import _backend
from lapdual.mechanisms import env, not_up, splp, subordinator
from lapdual.paths import ProcessSpec, SimConfig, run_paths

SPECS = {
    "cb feller": (ProcessSpec.cb(splp(a=1.0)), 1.0),
    "cb stable+atoms": (ProcessSpec.cb(splp([(0.5, 1.0), (2.0, 0.3)], {"alpha": 1.5, "scale": 0.3}, a=0.5, b=0.2)), 1.0),
    "cbc": (ProcessSpec.cbc(splp(b=-1.0), not_up(a=1.0)), 1.0),
    "cbci": (
        ProcessSpec.cbci(splp(a=1.0, b=0.5), not_up([(0.2, 1.0)]), subordinator([(1.0, 1.0)], d=0.5)),
        0.5,
    ),
    "cbre": (ProcessSpec.cbre(splp(a=1.0), env([(1.0, 0.5)])), 1.0),
    "subordinator": (ProcessSpec.subordinator(subordinator([(1.0, 0.5), (2.0, 0.3)], d=0.2)), 0.0),
}


def best_time(spec, x0, cfg, backend, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = run_paths(spec, x0, cfg, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--step", type=float, default=1e-2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if "cython" not in _backend.available():
        print("compiled kernel not built; only the numpy backend is available")
        return 1
    cfg = SimConfig(step=args.step, horizon=1.0, paths=args.paths, seed=1)
    print(f"paths={args.paths} step={args.step} steps={round(1.0 / args.step)} repeat={args.repeat}")
    print(f"{'spec':<18}{'cython s':>10}{'numpy s':>10}{'speedup':>9}  agree")
    for name, (spec, x0) in SPECS.items():
        tc, a = best_time(spec, x0, cfg, "cython", args.repeat)
        tp, b = best_time(spec, x0, cfg, "python", args.repeat)
        agree = np.array_equal(a.codes, b.codes) and np.allclose(a.values, b.values, rtol=1e-12, atol=0)
        print(f"{name:<18}{tc:>10.3f}{tp:>10.3f}{tp / tc:>8.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
