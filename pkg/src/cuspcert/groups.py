"""Matrix groups: word enumeration, singular-value divergence, limit flags,
element classification, weak unipotence and fixed pairs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numeric import (
    _div,
    FLOAT,
    det,
    eigen_moduli,
    exact_rank,
    identity,
    inverse,
    is_exact,
    matmul,
    matrix_key,
    matrix_kind,
    normalize_projective,
    nullspace,
    svd,
    to_float,
)
from .projective import Flag, ProjHyperplane, ProjPoint, angle_between_lines

SAMPLE_BUDGET = 1_000_000
DIVERGENCE_THRESHOLD = 1e3
CLUSTER_RADIUS = 1e-2


class SampleBudgetError(RuntimeError):
    """Enumeration would exceed the sample budget."""


@dataclass(frozen=True)
class ClosedForm:
    """Closed-form family element(*params), params in Z^p.

    The evaluator must satisfy element(p) = g_1^{p_1} ... g_k^{p_k} for the
    group's generators in order, which fixes the word attached to a sample.
    ``norm`` selects the parameter ball used for enumeration.
    """

    gallery: str
    param_names: tuple[str, ...]
    element: Callable[..., np.ndarray]
    norm: str = "l1"
    params: dict = field(default_factory=dict)


@dataclass
class MatrixGroup:
    dim: int
    generators: list[tuple[str, np.ndarray]]
    scalar_kind: str = FLOAT
    closed_form: ClosedForm | None = None

    def __post_init__(self):
        if not self.generators and self.closed_form is None:
            self.generators = []
        for name, g in self.generators:
            g = np.asarray(g)
            if g.shape != (self.dim, self.dim):
                raise ValueError(f"generator {name!r} has shape {g.shape}, expected {(self.dim, self.dim)}")
            if is_exact(g) != (self.scalar_kind != FLOAT):
                raise ValueError(f"generator {name!r} does not match scalar kind {self.scalar_kind}")
            d = det(g)
            if d == 0:
                raise ValueError(f"generator {name!r} is singular")
            if abs(abs(float(d)) - 1.0) > 1e-9:
                raise ValueError(f"generator {name!r} has |det| = {abs(float(d)):.6g}, not 1")

    @property
    def exact(self) -> bool:
        return self.scalar_kind != FLOAT

    def identity(self) -> np.ndarray:
        return identity(self.dim, self.scalar_kind)

    def signed_generators(self) -> list[tuple[int, np.ndarray]]:
        """Generators and inverses as (signed 1-based index, matrix)."""
        out = []
        for i, (_, g) in enumerate(self.generators):
            out.append((i + 1, np.asarray(g)))
            out.append((-(i + 1), inverse(np.asarray(g))))
        return out

    def word_element(self, word: Sequence[int]) -> np.ndarray:
        table = dict(self.signed_generators())
        M = self.identity()
        for w in word:
            M = matmul(M, table[w])
        return M

    def word_label(self, word: Sequence[int]) -> str:
        names = [n for n, _ in self.generators]
        return " ".join(names[w - 1] if w > 0 else names[-w - 1] + "^-1" for w in word) or "id"


@dataclass(frozen=True)
class WordSample:
    element: np.ndarray
    word: tuple[int, ...]
    length: int
    params: tuple[int, ...] | None = None


def _ball(p: int, L: int, norm: str):
    for v in itertools.product(range(-L, L + 1), repeat=p):
        r = sum(abs(t) for t in v) if norm == "l1" else max((abs(t) for t in v), default=0)
        if r <= L:
            yield v


def _ball_size(p: int, L: int, norm: str) -> int:
    if norm == "linf":
        return (2 * L + 1) ** p
    # lattice points in the l1 ball: sum_k 2^k C(p,k) C(L,k)
    return sum(2 ** k * math.comb(p, k) * math.comb(L, k) for k in range(p + 1))


def params_word(params: Sequence[int]) -> tuple[int, ...]:
    word: list[int] = []
    for i, t in enumerate(params):
        word.extend([(i + 1) if t > 0 else -(i + 1)] * abs(t))
    return tuple(word)


def enumerate_words(G: MatrixGroup, L: int, budget: int = SAMPLE_BUDGET) -> list[WordSample]:
    """All distinct elements of word length <= L (parameter ball for closed forms)."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    cf = G.closed_form
    if cf is not None:
        p = len(cf.param_names)
        if _ball_size(p, L, cf.norm) > budget:
            raise SampleBudgetError(f"parameter ball of radius {L} exceeds budget {budget}")
        out = []
        for v in _ball(p, L, cf.norm):
            w = params_word(v)
            out.append(WordSample(cf.element(*v), w, len(w), tuple(v)))
        return out
    I = G.identity()
    seen = {matrix_key(I)}
    out = [WordSample(I, (), 0)]
    frontier = out[:]
    gens = G.signed_generators()
    for length in range(1, L + 1):
        nxt = []
        for s in frontier:
            for idx, g in gens:
                M = matmul(s.element, g)
                k = matrix_key(M)
                if k in seen:
                    continue
                seen.add(k)
                ws = WordSample(M, s.word + (idx,), length)
                nxt.append(ws)
                if len(out) + len(nxt) > budget:
                    raise SampleBudgetError(f"more than {budget} elements up to length {L}")
        out.extend(nxt)
        frontier = nxt
    return out


def inf_norm(M) -> float:
    """Max-abs entry."""
    return float(np.max(np.abs(to_float(M))))


# ---------------------------------------------------------------- divergence


@dataclass
class DivergenceReport:
    lengths: list[int]
    min_ratios: dict[int, list[float]]  # k -> per-length minima of sigma_k / sigma_{k+1}
    max_norms: list[float]
    fit_exponent: dict[int, float]
    monotone: dict[int, bool]
    divergent: dict[int, bool]
    limit_data: dict | None = None

    def to_json(self) -> dict:
        return {
            "lengths": self.lengths,
            "min_ratios": {str(k): v for k, v in self.min_ratios.items()},
            "max_norms": self.max_norms,
            "fit_exponent": {str(k): v for k, v in self.fit_exponent.items()},
            "monotone": {str(k): v for k, v in self.monotone.items()},
            "divergent": {str(k): v for k, v in self.divergent.items()},
            "limit_data": self.limit_data,
        }

    @classmethod
    def from_json(cls, d: dict) -> "DivergenceReport":
        conv = lambda m: {int(k): v for k, v in m.items()}
        return cls(d["lengths"], conv(d["min_ratios"]), d["max_norms"], conv(d["fit_exponent"]),
                   conv(d["monotone"]), conv(d["divergent"]), d.get("limit_data"))


def fit_exponent(lengths, values) -> float:
    """Slope of log(value) against log(length) over the top half of lengths >= 1."""
    pts = [(L, v) for L, v in zip(lengths, values) if L >= 1 and v > 0 and math.isfinite(v)]
    if len(pts) < 2:
        return float("nan")
    pts = pts[len(pts) // 2:] if len(pts) >= 4 else pts
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def divergence_diagnostics(samples: Sequence[WordSample]) -> DivergenceReport:
    if not samples:
        raise ValueError("no samples")
    n = samples[0].element.shape[0]
    lengths = sorted({s.length for s in samples})
    by_len: dict[int, list[np.ndarray]] = {L: [] for L in lengths}
    norms: dict[int, float] = {L: 0.0 for L in lengths}
    for s in samples:
        sig = svd(s.element).sigmas
        with np.errstate(divide="ignore"):
            by_len[s.length].append(sig[:-1] / sig[1:])
        norms[s.length] = max(norms[s.length], inf_norm(s.element))
    min_ratios = {k: [float(np.min([r[k - 1] for r in by_len[L]])) for L in lengths] for k in range(1, n)}
    fit, mono, div = {}, {}, {}
    for k, vals in min_ratios.items():
        fit[k] = fit_exponent(lengths, vals)
        mono[k] = bool(all(b >= a * (1 - 1e-9) for a, b in zip(vals, vals[1:])))
        top = vals[len(vals) // 2:]
        div[k] = bool(len(top) >= 2 and top[-1] > 1 + 1e-6 and top[-1] > top[0] * (1 + 1e-9))
    return DivergenceReport(lengths, min_ratios, [norms[L] for L in lengths], fit, mono, div)


@dataclass
class FlagCluster:
    center: Flag
    members: int
    radius: float


def _flag_angle(f: Flag, g: Flag) -> float:
    return max(angle_between_lines(f.point.as_float(), g.point.as_float()),
               angle_between_lines(f.hyperplane.as_float(), g.hyperplane.as_float()))


def limit_flags(samples: Sequence[WordSample], radius: float = CLUSTER_RADIUS,
                threshold: float = DIVERGENCE_THRESHOLD) -> dict:
    """Cluster attracting flags of the largest-norm decile of samples.

    Returns a dict with ``status`` ("ok" or "inconclusive"), the clusters
    (point, hyperplane, size, radius), their count and the maximal radius.
    """
    profiles = [(svd(s.element), s) for s in samples]
    if not profiles:
        return {"status": "inconclusive", "reason": "no samples", "clusters": [], "count": 0, "max_radius": None}
    best = max(p.ratios[0] for p, _ in profiles)
    if not best >= threshold:
        return {"status": "inconclusive",
                "reason": f"max sigma1/sigma2 = {best:.4g} below {threshold:g}",
                "clusters": [], "count": 0, "max_radius": None, "max_ratio": float(best)}
    profiles.sort(key=lambda ps: -ps[0].sigmas[0])
    top = profiles[:max(1, math.ceil(len(profiles) / 10))]
    flags = [Flag(ProjPoint(p.attracting), ProjHyperplane(p.repelling)) for p, _ in top]
    clusters: list[list[Flag]] = []
    for f in flags:
        for c in clusters:
            if _flag_angle(c[0], f) <= radius:
                c.append(f)
                break
        else:
            clusters.append([f])
    out = []
    for c in clusters:
        r = max(_flag_angle(c[0], f) for f in c)
        out.append(FlagCluster(c[0], len(c), r))
    return {
        "status": "ok",
        "clusters": [{"point": c.center.point.as_float().tolist(),
                      "hyperplane": c.center.hyperplane.as_float().tolist(),
                      "size": c.members, "radius": c.radius} for c in out],
        "count": len(out),
        "max_radius": max(c.radius for c in out),
        "max_ratio": float(best),
    }


# ---------------------------------------------------------------- elements


@dataclass(frozen=True)
class ElementClass:
    kind: str  # elliptic | parabolic | hyperbolic
    trans: float


def classify_element(g, K_pow: int = 64) -> ElementClass:
    """Classify by eigenvalue moduli; bounded powers separate elliptic from parabolic."""
    g = np.asarray(g)
    if det(g) == 0:
        raise ValueError("element is singular")
    mods = eigen_moduli(g)
    ratio = mods[0] / mods[-1]
    trans = 0.5 * math.log(ratio)
    if ratio > 1 + 1e-9:
        return ElementClass("hyperbolic", trans)
    G = to_float(g)
    base = np.linalg.norm(G, 2)
    P = np.eye(G.shape[0])
    for _ in range(K_pow):
        P = P @ G
        if np.linalg.norm(P, 2) > 10 * base:
            return ElementClass("parabolic", 0.0)
    return ElementClass("elliptic", 0.0)


def weakly_unipotent_check(samples: Sequence[WordSample], tol: float = 1e-7, group: MatrixGroup | None = None):
    """(WU) on the sample: every eigenvalue modulus within tol of 1."""
    from .coefficients import CERTIFIED, REFUTED, ConditionVerdict

    meta = {"L": max((s.length for s in samples), default=0), "count": len(samples)}
    worst = 0.0
    offender = None
    for s in sorted(samples, key=lambda s: s.length):
        dev = float(np.max(np.abs(eigen_moduli(s.element) - 1.0)))
        worst = max(worst, dev)
        if dev > tol:
            offender = s
            break
    if offender is None:
        return ConditionVerdict("WU", CERTIFIED, {"max_deviation": worst, "tol": tol}, meta)
    word = list(offender.word)
    cert = {"word": word, "moduli": eigen_moduli(offender.element).tolist(), "tol": tol}
    if group is not None:
        cert["label"] = group.word_label(word)
    return ConditionVerdict("WU", REFUTED, cert, meta)


# ---------------------------------------------------------------- fixed pairs


@dataclass
class FixedPair:
    p: ProjPoint
    phi: ProjHyperplane
    residuals: tuple[float, float]
    p_vec: np.ndarray = field(repr=False)
    phi_vec: np.ndarray = field(repr=False)


@dataclass
class FixedSpaces:
    """Fixed subspaces when one of them has dimension > 1."""

    points: list[np.ndarray]
    covectors: list[np.ndarray]

    def candidate_pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(p, f) for p in self.points for f in self.covectors if _pairing_zero(f, p)]


def _stack_minus_identity(mats: list[np.ndarray], transpose: bool) -> np.ndarray:
    rows = []
    for g in mats:
        M = g.T if transpose else g
        I = identity(M.shape[0], matrix_kind(M)) if is_exact(M) else np.eye(M.shape[0])
        rows.append(M - I)
    return np.vstack(rows)


def _pairing_zero(f, p) -> bool:
    v = np.dot(f, p)
    if isinstance(v, (float, np.floating)):
        return abs(v) <= 1e-10 * max(1.0, float(np.linalg.norm(to_float(f)) * np.linalg.norm(to_float(p))))
    return v == 0


def _residuals(mats, p, f) -> tuple[float, float]:
    rp = max(float(np.linalg.norm(to_float(matmul(g, p) - p))) for g in mats)
    rf = max(float(np.linalg.norm(to_float(matmul(g.T, f) - f))) for g in mats)
    return rp, rf


def fixed_pair(G: MatrixGroup):
    """Common fixed vector p and fixed covector phi with phi(p) = 0.

    Returns a FixedPair when both fixed spaces are lines, FixedSpaces when
    one has dimension > 1, and None when either is trivial or the lines are
    not incident.
    """
    mats = [np.asarray(g) for _, g in G.generators]
    if not mats:
        return None
    P = nullspace(_stack_minus_identity(mats, False))
    F = nullspace(_stack_minus_identity(mats, True))
    if not P or not F:
        return None
    if len(P) > 1 or len(F) > 1:
        return FixedSpaces(P, F)
    p, f = normalize_projective(P[0]), normalize_projective(F[0])
    if not _pairing_zero(f, p):
        return None
    return FixedPair(ProjPoint(p), ProjHyperplane(f), _residuals(mats, p, f), p, f)


def _standard_vector(n: int, j: int, like) -> np.ndarray:
    if is_exact(like):
        kind = matrix_kind(np.asarray(like).reshape(1, -1))
        return identity(n, kind)[:, j].copy()
    e = np.zeros(n)
    e[j] = 1.0
    return e


def _independent(vectors: list[np.ndarray]) -> bool:
    M = np.array(vectors, dtype=object if any(is_exact(v) for v in vectors) else float)
    if M.dtype == object:
        return exact_rank(M) == len(vectors)
    return np.linalg.matrix_rank(M, tol=1e-10 * max(1.0, np.abs(M).max())) == len(vectors)


def adapted_basis(p, phi=None) -> np.ndarray:
    """Basis (as columns) with first vector p; with phi, the first n-1 span ker phi.

    Completion prefers standard basis vectors so a group already in normal
    form keeps its coordinates.
    """
    p = np.asarray(p)
    n = p.shape[0]
    vecs = [p]
    if phi is None:
        for j in range(n):
            e = _standard_vector(n, j, p)
            if _independent(vecs + [e]):
                vecs.append(e)
        return np.array(vecs, dtype=p.dtype).T
    phi = np.asarray(phi)
    ker = nullspace(phi.reshape(1, -1))
    # standard vectors inside ker phi first, then a kernel basis
    cands = [_standard_vector(n, j, p) for j in range(n)]
    cands = [e for e in cands if _pairing_zero(phi, e)] + list(ker)
    for e in cands:
        if len(vecs) == n - 1:
            break
        if _independent(vecs + [e]):
            vecs.append(e)
    for j in range(n):
        e = _standard_vector(n, j, p)
        if not _pairing_zero(phi, e):
            scale = np.dot(phi, e)
            vecs.append(e / scale if not is_exact(e) else np.array([_div(x, scale) for x in e], dtype=object))
            break
    return np.array(vecs, dtype=object if is_exact(p) else float).T


def change_basis(M, B, Binv=None):
    """Coordinates of M in the basis given by the columns of B."""
    Binv = inverse(B) if Binv is None else Binv
    return matmul(matmul(Binv, M), B)
