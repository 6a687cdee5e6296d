"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--search]

Each kernel is called on identical inputs through both backends; the table
reports the best wall time per call and the speedup. ``--search`` also times
one full order search per backend in a subprocess (the backend is fixed at
import time).
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mixent import _kernels_py as py

try:
    from mixent import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def _cases(rng: np.random.Generator):
    logp = rng.normal(scale=20.0, size=(10_000, 8))
    v = np.sort(rng.normal(size=10_000))
    w = rng.random(10_000) + 0.1
    tiny_v = np.arange(9, dtype=float)
    tiny_c = rng.integers(1, 5, size=9).astype(np.int64)
    floor = 1e-12 * 64.0 + 1e-300
    return [
        ("log_normalize_rows 10000x8", lambda k: k.log_normalize_rows(logp)),
        ("biexp_scan m=10000", lambda k: k.biexp_scan(v, w, 0.005, 1e8)),
        ("enumerate gaussian m=9 r=3", lambda k: k.enumerate_min(tiny_v, tiny_c, 3, k.KIND_GAUSSIAN, floor, 0.0, 0.0, 1e-9)),
        ("enumerate biexp m=7 r=3", lambda k: k.enumerate_min(tiny_v[:7], tiny_c[:7], 3, k.KIND_BIEXP, 0.0, 0.005, 1e8, 1e-9)),
    ]


def _best(fn, repeat: int) -> float:
    number = 1
    while True:
        t = timeit.timeit(fn, number=number)
        if t > 0.2 or number >= 1000:
            break
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


SEARCH_SNIPPET = """
import time
from mixent import ingest, search, SearchConfig, BACKEND
from mixent.synth import sample, spec_r2
x, _ = sample(spec_r2(4.0), 2000, seed=0)
w = ingest(x)
t = time.perf_counter()
search(w, "{family}", SearchConfig(n_init=5))
print(BACKEND, time.perf_counter() - t)
"""


def _search_time(family: str, pure: bool) -> tuple[str, float]:
    env = dict(os.environ, MIXENT_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run(
        [sys.executable, "-c", SEARCH_SNIPPET.format(family=family)], env=env, capture_output=True, text=True, check=True
    )
    name, secs = out.stdout.split()
    return name, float(secs)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--search", action="store_true", help="also time an end-to-end search per backend")
    args = ap.parse_args(argv)

    if compiled is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':32s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}")
    for name, call in _cases(rng):
        t_py = _best(lambda: call(py), args.repeat)
        t_c = _best(lambda: call(compiled), args.repeat)
        print(f"{name:32s} {t_py * 1e3:10.3f}ms {t_c * 1e3:10.3f}ms {t_py / t_c:8.1f}x")
    if args.search:
        for family in ("gaussian", "biexp"):
            _, t_py = _search_time(family, pure=True)
            _, t_c = _search_time(family, pure=False)
            print(f"{'search ' + family + ' n=2000':32s} {t_py:11.2f}s {t_c:11.2f}s {t_py / t_c:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
