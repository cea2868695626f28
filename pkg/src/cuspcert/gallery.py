"""Closed-form groups: hyperbolic cusp translations, Jordan blocks, a 9x9
weakly unipotent group and a 7x7 solvable group over Q(sqrt 2)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .groups import ClosedForm, MatrixGroup
from .numeric import FLOAT, LAMBDA, QUAD, RATIONAL, QuadSqrt2, exact_matrix


# ---------------------------------------------------------------- evaluators


def hyperbolic_translation(*Y) -> np.ndarray:
    """rho(Y) = [[1, Y^T, |Y|^2/2], [0, I, Y], [0, 0, 1]] with rational entries."""
    Y = [Fraction(y) for y in Y]
    m = len(Y)
    n = m + 2
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = 1
    for i, y in enumerate(Y):
        rows[0][1 + i] = y
        rows[1 + i][n - 1] = y
    rows[0][n - 1] = sum(y * y for y in Y) / 2
    return exact_matrix(rows)


def jordan_power(k: int, n: int) -> np.ndarray:
    """n-th power of the unipotent Jordan block of size k: entries n^j / j!."""
    rows = [[Fraction(n) ** (j - i) / math.factorial(j - i) if j >= i else 0 for j in range(k)]
            for i in range(k)]
    return exact_matrix(rows)


def _rotation(n: float) -> np.ndarray:
    c, s = math.cos(n), math.sin(n)
    return np.array([[c, s], [-s, c]])


def _j3(n: float) -> np.ndarray:
    return np.array([[1.0, n, n * n / 2], [0.0, 1.0, n], [0.0, 0.0, 1.0]])


def weakly_unipotent_9x9_element(n: int) -> np.ndarray:
    """J3(n) in the first block, the Kronecker product J3(n) x R(n) in the second."""
    M = np.zeros((9, 9))
    M[:3, :3] = _j3(n)
    M[3:, 3:] = np.kron(_j3(n), _rotation(n))
    return M


def solvable_7x7_element(a: int, b: int, n: int, m: int) -> np.ndarray:
    """Exact element with q = a + b sqrt2, lambda = (1 + sqrt2)^2."""
    q = QuadSqrt2(a, b)
    qc = q.conjugate()
    L, Li = LAMBDA ** n, LAMBDA ** (-n)
    Z, O = QuadSqrt2(0), QuadSqrt2(1)
    mm = QuadSqrt2(m)
    rows = [
        [L * L, Z, Z, Z, L * q, Z, q * q],
        [Z, Li * Li, Z, Z, Z, Li * qc, qc * qc],
        [Z, Z, O, mm, Z, Z, mm * mm],
        [Z, Z, Z, O, Z, Z, 2 * mm],
        [Z, Z, Z, Z, L, Z, 2 * q],
        [Z, Z, Z, Z, Z, Li, 2 * qc],
        [Z, Z, Z, Z, Z, Z, O],
    ]
    return exact_matrix(rows, QUAD)


# ---------------------------------------------------------------- groups


def hyperbolic_cusp_translations(d: int) -> MatrixGroup:
    if d < 3:
        raise ValueError("hyperbolic cusp translations need d >= 3")
    m = d - 2
    gens = []
    for i in range(m):
        e = [0] * m
        e[i] = 1
        gens.append((f"t{i + 1}", hyperbolic_translation(*e)))
    cf = ClosedForm("hyperbolic_cusp_translations", tuple(f"y{i + 1}" for i in range(m)),
                    hyperbolic_translation, "l1", {"d": d})
    return MatrixGroup(d, gens, RATIONAL, cf)


def jordan_unipotent(k: int) -> MatrixGroup:
    if k < 2:
        raise ValueError("Jordan block size must be >= 2")
    cf = ClosedForm("jordan_unipotent", ("n",), lambda n: jordan_power(k, n), "l1", {"k": k})
    return MatrixGroup(k, [("u", jordan_power(k, 1))], RATIONAL, cf)


def weakly_unipotent_9x9() -> MatrixGroup:
    cf = ClosedForm("weakly_unipotent_9x9", ("n",), weakly_unipotent_9x9_element, "l1", {})
    return MatrixGroup(9, [("g", weakly_unipotent_9x9_element(1))], FLOAT, cf)


def solvable_7x7() -> MatrixGroup:
    names = ("a", "b", "n", "m")
    gens = []
    for i, name in enumerate(names):
        p = [0, 0, 0, 0]
        p[i] = 1
        gens.append((name, solvable_7x7_element(*p)))
    cf = ClosedForm("solvable_7x7", names, solvable_7x7_element, "linf", {})
    return MatrixGroup(7, gens, QUAD, cf)


def cyclic_group(matrix, kind: str = FLOAT, name: str = "g") -> MatrixGroup:
    """Cyclic group of a single matrix, enumerated by BFS."""
    M = np.asarray(matrix, dtype=float) if kind == FLOAT else exact_matrix(matrix, kind)
    return MatrixGroup(M.shape[0], [(name, M)], kind)


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    builder: Callable[..., MatrixGroup]
    param_names: tuple[str, ...]
    param_defaults: dict
    param_ranges: dict
    expected: Callable[..., dict] = field(default=lambda **kw: {})

    def build(self, **params) -> MatrixGroup:
        unknown = set(params) - set(self.param_names)
        if unknown:
            raise ValueError(f"unknown parameters for {self.id}: {sorted(unknown)}")
        full = {**self.param_defaults, **params}
        for k, v in full.items():
            lo, hi = self.param_ranges[k]
            if not isinstance(v, int) or v < lo or (hi is not None and v > hi):
                raise ValueError(f"parameter {k}={v!r} out of range [{lo}, {hi}]")
        return self.builder(**full)

    def expected_verdicts(self, **params) -> dict:
        return self.expected(**{**self.param_defaults, **params})


GALLERY = {
    "hyperbolic_cusp_translations": GalleryEntry(
        "hyperbolic_cusp_translations", hyperbolic_cusp_translations, ("d",), {"d": 4}, {"d": (3, 12)},
        lambda d: {"WU": "certified_on_sample", "GP+": "certified_on_sample",
                   "Tr": "certified_on_sample", "TRe": "certified_on_sample",
                   "summary": "round_candidate"}),
    "jordan_unipotent": GalleryEntry(
        "jordan_unipotent", jordan_unipotent, ("k",), {"k": 3}, {"k": (2, 12)},
        lambda k: {"WU": "certified_on_sample",
                   "GP+": "certified_on_sample" if k % 2 else "refuted_on_sample"}),
    "weakly_unipotent_9x9": GalleryEntry(
        "weakly_unipotent_9x9", weakly_unipotent_9x9, (), {}, {},
        lambda: {"WU": "certified_on_sample", "GP+": "certified_on_sample",
                 "Tr": "refuted_on_sample", "summary": "preserves_domain_candidate"}),
    "solvable_7x7": GalleryEntry(
        "solvable_7x7", solvable_7x7, (), {}, {},
        lambda: {"WU": "refuted_on_sample", "fixed_pair": ([3], [7])}),
}


def gallery_group(name: str, **params) -> MatrixGroup:
    if name not in GALLERY:
        raise KeyError(f"unknown gallery group {name!r}; known: {', '.join(sorted(GALLERY))}")
    return GALLERY[name].build(**params)
