"""Run the condition checkers on every gallery group and print a verdict table."""
import argparse
import time

from cuspcert.coefficients import cusp_holonomy_verdict
from cuspcert.gallery import GALLERY

RUNS = [
    ("hyperbolic_cusp_translations", {"d": 4}, 12),
    ("jordan_unipotent", {"k": 3}, 50),
    ("jordan_unipotent", {"k": 4}, 50),
    ("weakly_unipotent_9x9", {}, 12),
    ("solvable_7x7", {}, 2),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    header = f"{'group':34s} {'L':>4s}  {'WU':12s} {'GP+':12s} {'Tr':12s} {'TRe':12s} summary"
    print(header)
    print("-" * len(header))
    for name, params, L in RUNS:
        G = GALLERY[name].build(**params)
        t0 = time.perf_counter()
        hv = cusp_holonomy_verdict(G, L, seed=args.seed)
        dt = time.perf_counter() - t0
        st = {k: v.status.replace("_on_sample", "") for k, v in hv.verdicts.items()}
        label = name + ("" if not params else "(" + ",".join(f"{k}={v}" for k, v in params.items()) + ")")
        print(f"{label:34s} {L:4d}  {st['WU']:12s} {st['GP+']:12s} {st['Tr']:12s} {st['TRe']:12s} "
              f"{hv.summary}  [{dt:.2f} s]")


if __name__ == "__main__":
    main()
