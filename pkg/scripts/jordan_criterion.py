"""GP+ verdicts for unipotent Jordan blocks: odd sizes admit a positive generic
coefficient, even sizes do not. Small radii cannot separate large even blocks."""
import argparse

from cuspcert.coefficients import find_positive_generic_coefficient
from cuspcert.gallery import jordan_unipotent
from cuspcert.groups import enumerate_words


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="2,3,4,5,6,7,8")
    ap.add_argument("--radii", default="12,50")
    args = ap.parse_args()
    sizes = [int(k) for k in args.sizes.split(",")]
    radii = [int(r) for r in args.radii.split(",")]
    print("k  expected   " + "  ".join(f"L={r:<11d}" for r in radii))
    for k in sizes:
        expected = "certified" if k % 2 else "refuted"
        cells = []
        for L in radii:
            v = find_positive_generic_coefficient(enumerate_words(jordan_unipotent(k), L))
            cells.append(f"{v.status.replace('_on_sample', ''):13s}")
        print(f"{k:<2d} {expected:10s} " + " ".join(cells))


if __name__ == "__main__":
    main()
