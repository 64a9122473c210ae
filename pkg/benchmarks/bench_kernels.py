"""Time the compiled cycle kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Each case is checked for
identical output before timing.
"""

import argparse
import timeit

import numpy as np

from leafshift import _kernels_py
from leafshift.catmap import load_model
from leafshift.shift_core import build_graph, graph_from_matrix

try:
    from leafshift import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def cases(scale):
    full3 = graph_from_matrix(np.ones((3, 3), dtype=int)).csr()
    golden = build_graph(["a", "b"], [("a", "a"), ("a", "b"), ("b", "a")]).csr()
    cat = load_model()
    ip, ix = cat.graph.csr()
    tr = np.array([cat.translation(i, int(ix[e]))
                   for i in range(cat.graph.size) for e in range(ip[i], ip[i + 1])], dtype=np.int64)
    mat = cat.matrix.tolist()
    yield (f"count_cycles full-3 n={12 + scale}",
           lambda k: k.count_cycles(*full3, 0, 12 + scale))
    yield (f"enumerate_cycles golden n={23 + scale}",
           lambda k: k.enumerate_cycles(*golden, 0, 23 + scale, 10**7))
    yield (f"cycle_translation_sums catmap n={11 + scale}",
           lambda k: k.cycle_translation_sums(ip, ix, tr, mat, 11 + scale))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=int, default=0, help="add to every cycle length")
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'case':42s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for name, fn in cases(args.scale):
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{name:42s} {py:10.4f} {'-':>11s} {'-':>8s}")
            continue
        a, b = fn(compiled), fn(_kernels_py)
        if not np.array_equal(np.asarray(a), np.asarray(b)):
            raise SystemExit(f"{name}: backends disagree")
        c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat))
        print(f"{name:42s} {py:10.4f} {c:11.4f} {py / c:7.1f}x")


if __name__ == "__main__":
    main()
