"""Compare the numba and pure-numpy kernel backends on the hot paths.

    python benchmarks/bench_kernels.py [--k 300] [--n 450] [--reps 200]
"""
import argparse
import time

import numpy as np

from fountainq import _kernels, codec, degree


def best_of(fn, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), float(np.median(times))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", type=int, default=300)
    ap.add_argument("--D", type=int, default=31)
    ap.add_argument("--n", type=int, default=450)
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    k, n = args.k, args.n
    dist = degree.ideal_soliton(k, args.D)
    x = codec.random_input(k, rng)
    degrees = degree.sample_degrees(dist, n, rng).astype(np.int64)
    draws = codec._subset_draws(degrees, k, rng)
    batch = codec.generate_batch(x, dist, n, rng)
    words, rhs = batch.matrix.words, batch.answers

    backends = [_kernels.NUMPY_KERNELS, _kernels.numba_kernels()]
    cases = {
        "build_rows": lambda kern: kern.build_rows(k, degrees, draws, np.arange(k, dtype=np.int64), x),
        "eliminate": lambda kern: kern.eliminate(words.copy(), rhs.copy(), k),
        "peel": lambda kern: kern.peel(words.copy(), rhs.copy(), k),
    }
    print(f"k={k} D={args.D} n={n} reps={args.reps}")
    print(f"{'kernel':<12}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, call in cases.items():
        med = {}
        for kern in backends:
            call(kern)  # warm-up and JIT compile
            reps = args.reps if kern.name == "numba" or name != "build_rows" else max(3, args.reps // 20)
            med[kern.name] = best_of(lambda: call(kern), reps)[1]
        print(f"{name:<12}{med['numpy'] * 1e3:>12.3f}{med['numba'] * 1e3:>12.3f}{med['numpy'] / med['numba']:>9.1f}x")


if __name__ == "__main__":
    main()
