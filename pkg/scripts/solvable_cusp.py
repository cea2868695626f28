"""Exact grid check of the 7x7 solvable example over Q(sqrt 2)."""
import argparse
import json
import time

from cuspcert.cusps import solvable_cusp_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=int, default=8)
    args = ap.parse_args()
    t0 = time.perf_counter()
    rep = solvable_cusp_check(args.radius)
    rep["seconds"] = round(time.perf_counter() - t0, 3)
    print(json.dumps(rep, indent=2))


if __name__ == "__main__":
    main()
