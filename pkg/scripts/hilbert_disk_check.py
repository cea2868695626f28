"""Hilbert distance on the unit disk against the Klein model, with timing."""
import argparse
import math
import time

import numpy as np

from cuspcert.domains import EllipsoidDomain, hilbert_distance, klein_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    D = EllipsoidDomain(np.eye(2))

    def point():
        u = rng.normal(size=2)
        return u / np.linalg.norm(u) * 0.95 * math.sqrt(rng.uniform())

    pairs = [(point(), point()) for _ in range(args.pairs)]
    t0 = time.perf_counter()
    err = np.array([abs(hilbert_distance(D, x, y) - klein_distance(x, y)) for x, y in pairs])
    dt = time.perf_counter() - t0
    print(f"pairs {args.pairs}  max |error| {err.max():.3e}  mean {err.mean():.3e}  runtime {dt:.3f} s")


if __name__ == "__main__":
    main()
