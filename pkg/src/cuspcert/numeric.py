"""Scalars, exact linear algebra, singular values and eigenvalue moduli.

Three scalar kinds are supported: ``float64`` (Python float / numpy
float64), ``rational`` (:class:`fractions.Fraction`, ints allowed) and
``quad_sqrt2`` (:class:`QuadSqrt2`, elements a + b*sqrt(2) of Q(sqrt 2)).
Exact matrices are numpy object arrays; float matrices are float64 arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

SQRT2 = math.sqrt(2.0)

FLOAT = "float64"
RATIONAL = "rational"
QUAD = "quad_sqrt2"
SCALAR_KINDS = (FLOAT, RATIONAL, QUAD)


class ScalarKindError(TypeError):
    """Raised when an operation receives a scalar of the wrong kind."""


def _reduce(x):
    """Canonical rational: ints stay ints, integral fractions become ints."""
    if isinstance(x, (bool, np.integer)):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, float):
        raise ScalarKindError("float cannot enter exact arithmetic")
    return _reduce(Fraction(x))


def _sign_of(a, b) -> int:
    """Exact sign of a + b*sqrt(2) for rationals a, b."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sa == 0:
        return sb
    if sb == 0 or sa == sb:
        return sa
    # opposite signs: compare a^2 with 2 b^2
    d = a * a - 2 * b * b
    sd = (d > 0) - (d < 0)
    return sa * sd


class QuadSqrt2:
    """Exact element a + b*sqrt(2) of the field Q(sqrt 2)."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        object.__setattr__(self, "a", _reduce(a))
        object.__setattr__(self, "b", _reduce(b))

    def __setattr__(self, name, value):
        raise AttributeError("QuadSqrt2 is immutable")

    @staticmethod
    def _lift(other):
        if isinstance(other, QuadSqrt2):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadSqrt2(other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QuadSqrt2(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QuadSqrt2(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return QuadSqrt2(-self.a, -self.b)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QuadSqrt2(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def norm(self):
        """Field norm a^2 - 2 b^2 (rational)."""
        return _reduce(self.a * self.a - 2 * self.b * self.b)

    def conjugate(self) -> "QuadSqrt2":
        return QuadSqrt2(self.a, -self.b)

    def inverse(self) -> "QuadSqrt2":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QuadSqrt2 division by zero")
        return QuadSqrt2(Fraction(self.a) / n, Fraction(-self.b) / n)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = QuadSqrt2(1, 0), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def sign(self) -> int:
        return _sign_of(self.a, self.b)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def _cmp(self, other) -> int:
        o = self._lift(other)
        if o is NotImplemented:
            raise TypeError("cannot compare")
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * SQRT2

    def __repr__(self):
        return f"QuadSqrt2({self.a}, {self.b})"


LAMBDA = QuadSqrt2(3, 2)  # (1 + sqrt 2)^2, a unit of Z[sqrt 2]


def galois_embed(q: QuadSqrt2, sign: int = 1) -> float:
    """Real embedding a + b*sqrt(2) (sign +1) or a - b*sqrt(2) (sign -1)."""
    if not isinstance(q, QuadSqrt2):
        raise ScalarKindError(f"galois_embed expects QuadSqrt2, got {type(q).__name__}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return float(q.a) + sign * float(q.b) * SQRT2


# ---------------------------------------------------------------- scalars


def scalar_kind(x) -> str:
    if isinstance(x, QuadSqrt2):
        return QUAD
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return RATIONAL
    if isinstance(x, (float, np.floating)):
        return FLOAT
    raise ScalarKindError(f"unsupported scalar {x!r}")


def parse_scalar(value, kind: str):
    """Decode a JSON scalar into the requested kind."""
    if kind == FLOAT:
        v = float(value)
        if not math.isfinite(v):
            raise ValueError("non-finite float scalar")
        return v
    if kind == RATIONAL:
        if isinstance(value, (float, np.floating)):
            raise ValueError("rational scalars must be given as strings or ints")
        if isinstance(value, np.integer):
            value = int(value)
        return _reduce(Fraction(value))
    if kind == QUAD:
        if isinstance(value, dict):
            return QuadSqrt2(Fraction(str(value.get("a", 0))), Fraction(str(value.get("b", 0))))
        if isinstance(value, float):
            raise ValueError("quad_sqrt2 scalars must be exact")
        return QuadSqrt2(Fraction(value), 0)
    raise ValueError(f"unknown scalar kind {kind!r}")


def _frac_str(x) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_scalar(x, kind: str):
    """Encode a scalar for JSON."""
    if kind == FLOAT:
        return float(x)
    if kind == RATIONAL:
        return _frac_str(x)
    if kind == QUAD:
        q = x if isinstance(x, QuadSqrt2) else QuadSqrt2(x, 0)
        return {"a": _frac_str(q.a), "b": _frac_str(q.b)}
    raise ValueError(f"unknown scalar kind {kind!r}")


# ---------------------------------------------------------------- matrices


def matrix_kind(M: np.ndarray) -> str:
    """Scalar kind of a matrix; exact kinds live in object arrays."""
    M = np.asarray(M)
    if M.dtype != object:
        return FLOAT
    kinds = {scalar_kind(x) for x in M.flat}
    if QUAD in kinds:
        if FLOAT in kinds:
            raise ScalarKindError("mixed exact/float entries")
        return QUAD
    if kinds <= {RATIONAL}:
        return RATIONAL
    raise ScalarKindError(f"mixed scalar kinds {kinds}")


def is_exact(M: np.ndarray) -> bool:
    return np.asarray(M).dtype == object


def exact_matrix(rows, kind: str = RATIONAL) -> np.ndarray:
    """Build an object array of exact scalars from nested lists."""
    arr = np.array(rows, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        if kind == QUAD:
            out[idx] = v if isinstance(v, QuadSqrt2) else parse_scalar(v, QUAD)
        else:
            out[idx] = _reduce(v) if isinstance(v, (int, Fraction, np.integer)) else parse_scalar(v, RATIONAL)
    return out


def to_float(M) -> np.ndarray:
    """Float64 embedding (the + embedding for quad_sqrt2)."""
    M = np.asarray(M)
    if M.dtype != object:
        return M.astype(float)
    out = np.empty(M.shape, dtype=float)
    for idx, v in np.ndenumerate(M):
        out[idx] = float(v)
    return out


def identity(n: int, kind: str = FLOAT) -> np.ndarray:
    if kind == FLOAT:
        return np.eye(n)
    one, zero = (QuadSqrt2(1), QuadSqrt2(0)) if kind == QUAD else (1, 0)
    out = np.full((n, n), zero, dtype=object)
    for i in range(n):
        out[i, i] = one
    return out


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix product valid for object and float arrays."""
    return np.dot(A, B)


def _pivot_index(col: Sequence, start: int) -> int | None:
    for r in range(start, len(col)):
        if col[r] != 0:
            return r
    return None


def rref(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Exact reduced row echelon form and pivot columns."""
    A = np.array(M, dtype=object, copy=True)
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = _pivot_index(A[:, c], r)
        if p is None:
            continue
        if p != r:
            A[[r, p]] = A[[p, r]]
        inv = _div(1, A[r, c])
        A[r] = [_reduce_any(v * inv) for v in A[r]]
        for i in range(rows):
            if i != r and A[i, c] != 0:
                f = A[i, c]
                A[i] = [_reduce_any(a - f * b) for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def _reduce_any(v):
    if isinstance(v, Fraction):
        return _reduce(v)
    return v


def _div(a, b):
    """Exact quotient of two field elements."""
    if isinstance(a, QuadSqrt2) or isinstance(b, QuadSqrt2):
        return QuadSqrt2._lift(a) / QuadSqrt2._lift(b)
    return _reduce(Fraction(a) / Fraction(b))


def exact_nullspace(M: np.ndarray) -> list[np.ndarray]:
    """Basis of the right kernel via exact elimination."""
    A, pivots = rref(M)
    cols = A.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    quad = any(isinstance(v, QuadSqrt2) for v in A.flat)
    zero, one = (QuadSqrt2(0), QuadSqrt2(1)) if quad else (0, 1)
    basis = []
    for f in free:
        v = np.full(cols, zero, dtype=object)
        v[f] = one
        for r, p in enumerate(pivots):
            v[p] = _reduce_any(-A[r, f])
        basis.append(v)
    return basis


def float_nullspace(M: np.ndarray, cutoff: float = 1e-10) -> list[np.ndarray]:
    """Basis of the right kernel from the SVD with relative cutoff."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return [row for row in np.eye(M.shape[1])]
    _, s, vt = np.linalg.svd(M)
    scale = max(1.0, float(s[0]) if s.size else 1.0)
    rank = int(np.sum(s > cutoff * scale))
    return [vt[i] for i in range(rank, M.shape[1])]


def nullspace(M: np.ndarray, cutoff: float = 1e-10) -> list[np.ndarray]:
    return exact_nullspace(M) if is_exact(M) else float_nullspace(M, cutoff)


def exact_rank(M: np.ndarray) -> int:
    return len(rref(M)[1])


def rank(M: np.ndarray, cutoff: float = 1e-10) -> int:
    if is_exact(M):
        return exact_rank(M)
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > cutoff * max(1.0, float(s[0]))))


def exact_det(M: np.ndarray):
    """Determinant by Gaussian elimination over the field."""
    A = np.array(M, dtype=object, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("determinant of non-square matrix")
    det = 1
    for c in range(n):
        p = _pivot_index(A[:, c], c)
        if p is None:
            return 0
        if p != c:
            A[[c, p]] = A[[p, c]]
            det = -det
        piv = A[c, c]
        det = det * piv
        for i in range(c + 1, n):
            if A[i, c] != 0:
                f = _div(A[i, c], piv)
                A[i] = [_reduce_any(a - f * b) for a, b in zip(A[i], A[c])]
    return _reduce_any(det)


def exact_inverse(M: np.ndarray) -> np.ndarray:
    """Inverse by exact Gauss-Jordan elimination."""
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("inverse of non-square matrix")
    kind = matrix_kind(M)
    aug = np.concatenate([np.asarray(M, dtype=object), identity(n, kind)], axis=1)
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise np.linalg.LinAlgError("singular matrix")
    return R[:, n:]


def inverse(M: np.ndarray) -> np.ndarray:
    return exact_inverse(M) if is_exact(M) else np.linalg.inv(np.asarray(M, dtype=float))


def det(M: np.ndarray):
    return exact_det(M) if is_exact(M) else float(np.linalg.det(np.asarray(M, dtype=float)))


def matrix_key(M: np.ndarray, decimals: int = 12) -> tuple:
    """Hashable key: exact entries, or floats rounded to 1e-12."""
    M = np.asarray(M)
    if M.dtype == object:
        return tuple(M.flat)
    r = np.round(M.astype(float), decimals) + 0.0
    return tuple(r.flat)


def normalize_projective(v) -> np.ndarray:
    """Scale so the max-abs coordinate is 1 and the first nonzero one is positive."""
    v = np.asarray(v)
    if v.dtype == object:
        nz = [x for x in v if x != 0]
        if not nz:
            raise ValueError("zero vector has no projective class")
        big = nz[0]
        for x in nz[1:]:
            if abs(x) > abs(big):
                big = x
        w = np.array([_div(x, big) for x in v], dtype=object)
        first = next(x for x in w if x != 0)
        if first < 0:
            w = np.array([-x for x in w], dtype=object)
        return w
    v = v.astype(float)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite vector")
    m = float(np.max(np.abs(v)))
    if m == 0.0:
        raise ValueError("zero vector has no projective class")
    w = v / m
    nz = np.flatnonzero(w)
    if w[nz[0]] < 0:
        w = -w
    return w + 0.0


# ---------------------------------------------------------------- spectra


@dataclass(frozen=True)
class SingularProfile:
    """Singular values (descending) with the left/right singular frames."""

    sigmas: np.ndarray
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)

    @property
    def ratios(self) -> np.ndarray:
        s = self.sigmas
        with np.errstate(divide="ignore"):
            return s[:-1] / s[1:]

    @property
    def attracting(self) -> np.ndarray:
        """Top left singular vector."""
        return self.left[:, 0]

    @property
    def repelling(self) -> np.ndarray:
        """Covector whose kernel is the repelling hyperplane."""
        return self.right[:, 0]


def _check_square_finite(M) -> np.ndarray:
    A = to_float(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def svd(M) -> SingularProfile:
    """Singular value decomposition M = L diag(sigmas) R^T."""
    A = _check_square_finite(M)
    u, s, vt = np.linalg.svd(A)
    return SingularProfile(sigmas=s, left=u, right=vt.T)


def block_partition(M: np.ndarray) -> list[tuple[int, int]]:
    """Finest contiguous diagonal blocks of a block upper-triangular matrix.

    Split points use exact zero tests, so a structurally triangular matrix
    decomposes even in floating point.
    """
    n = M.shape[0]
    zero_below = np.array([[M[i, j] == 0 for j in range(n)] for i in range(n)], dtype=bool)
    cuts = [0]
    for k in range(1, n):
        if zero_below[k:, :k].all():
            cuts.append(k)
    cuts.append(n)
    return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]


def _exact_block_moduli(B: np.ndarray) -> list[float]:
    """Moduli of eigenvalues of an exact block via a squarefree factorization.

    Repeated roots are what make floating-point eigenvalues inaccurate; the
    squarefree factors have simple roots, which are well conditioned.
    """
    import sympy

    def conv(v):
        if isinstance(v, QuadSqrt2):
            return sympy.Rational(Fraction(v.a).numerator, Fraction(v.a).denominator) + \
                sympy.Rational(Fraction(v.b).numerator, Fraction(v.b).denominator) * sympy.sqrt(2)
        f = Fraction(v)
        return sympy.Rational(f.numerator, f.denominator)

    lam = sympy.Symbol("lam")
    S = sympy.Matrix(B.shape[0], B.shape[1], [conv(v) for v in B.flat])
    poly = sympy.Poly(S.charpoly(lam).as_expr(), lam, extension=True)
    _, factors = sympy.sqf_list(poly)
    out: list[float] = []
    for fac, mult in factors:
        coeffs = [complex(c) for c in sympy.Poly(fac, lam).all_coeffs()]
        roots = np.roots(coeffs) if len(coeffs) > 1 else []
        out.extend(float(abs(r)) for r in roots for _ in range(mult))
    return out


def eigen_moduli(M) -> np.ndarray:
    """Descending moduli of the complex eigenvalues of a square matrix."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("eigen_moduli needs a square matrix")
    if M.dtype != object and not np.all(np.isfinite(M.astype(float))):
        raise ValueError("matrix has non-finite entries")
    moduli: list[float] = []
    for lo, hi in block_partition(M):
        B = M[lo:hi, lo:hi]
        if hi - lo == 1:
            moduli.append(abs(float(B[0, 0])))
        elif B.dtype == object:
            moduli.extend(_exact_block_moduli(B))
        else:
            moduli.extend(_float_block_moduli(B.astype(float)))
    return np.array(sorted(moduli, reverse=True))


def _float_block_moduli(B: np.ndarray) -> list[float]:
    """Eigenvalue moduli with ill-conditioned clusters replaced by their geometric mean.

    A defective eigenvalue of multiplicity k is only determined to about
    eps^(1/k), but the product over its cluster is well conditioned.
    Eigenvalues are merged when their moduli differ by less than the
    first-order perturbation bound eps * ||B|| * condition number.
    """
    import scipy.linalg

    w, vl, vr = scipy.linalg.eig(B, left=True, right=True)
    s = np.abs(np.sum(np.conj(vl) * vr, axis=0))
    with np.errstate(divide="ignore"):
        cond = np.where(s > 0, 1.0 / s, np.inf)
    mods = np.abs(w)
    order = np.argsort(mods)
    mods, cond = mods[order], cond[order]
    scale = 100 * np.finfo(float).eps * max(np.linalg.norm(B, 2), 1e-300)
    out: list[float] = []
    start = 0
    for i in range(1, len(mods) + 1):
        if i < len(mods) and mods[i] - mods[i - 1] <= scale * max(cond[i], cond[i - 1]):
            continue
        cluster = mods[start:i]
        if i - start > 1 and np.all(cluster > 0):
            cluster = np.full(i - start, float(np.exp(np.mean(np.log(cluster)))))
        out.extend(cluster.tolist())
        start = i
    return out
