"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so the THAITRANSLIT_PURE switch does not
matter here. Results are checked for agreement before timing.
"""

import argparse
import random
import sys
import timeit

import numpy as np

from thaitranslit import _kernels_py as pure

try:
    from thaitranslit import _kernels as compiled
except ImportError:
    compiled = None


def _cases(seed: int):
    rng = random.Random(seed)
    words = ["".join(rng.choice("abcdefghกขคงจา") for _ in range(rng.randint(3, 12))) for _ in range(200)]
    lev_pairs = list(zip(words[::2], words[1::2]))

    nprng = np.random.default_rng(seed)
    sub = nprng.random((60, 60))
    sub = (sub + sub.T) / 2
    np.fill_diagonal(sub, 0.0)
    seqs = [nprng.integers(0, 60, nprng.integers(3, 10)).astype(np.int64) for _ in range(200)]
    wed_pairs = list(zip(seqs[::2], seqs[1::2]))

    X = nprng.normal(size=(400, 9))
    y = (X[:, 0] + 0.3 * nprng.normal(size=400) > 0).astype(np.float64)
    w = np.ones(400)
    split = (X, y, w, np.arange(400, dtype=np.int64), np.array([0, 2, 5], dtype=np.int64), 4)
    return {
        "levenshtein (100 pairs)": lambda m: [m.levenshtein(a, b) for a, b in lev_pairs],
        "weighted_edit_distance (100 pairs)": lambda m: [m.weighted_edit_distance(a, b, sub, 1.0)
                                                         for a, b in wed_pairs],
        "best_split (400 rows, 3 features)": lambda m: m.best_split(*split),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repeats, best is reported (default 5)")
    parser.add_argument("--number", type=int, default=3, help="calls per repeat (default 3)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if compiled is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1

    print(f"{'kernel':38s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in _cases(args.seed).items():
        a, b = fn(pure), fn(compiled)
        if not np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), atol=1e-12):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_py = min(timeit.repeat(lambda: fn(pure), number=args.number, repeat=args.repeat)) / args.number
        t_cy = min(timeit.repeat(lambda: fn(compiled), number=args.number, repeat=args.repeat)) / args.number
        print(f"{name:38s} {t_py * 1e3:10.3f} {t_cy * 1e3:10.3f} {t_py / t_cy:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
