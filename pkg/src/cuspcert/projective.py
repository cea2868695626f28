"""Projective points, hyperplanes, flags, cross-ratios and linear actions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric import inverse, is_exact, matmul, normalize_projective, to_float

COLLINEAR_CUTOFF = 1e-10
TRANSVERSE_TOL = 1e-10


class ProjectiveError(ValueError):
    """Degenerate projective configuration."""


def _as_vector(v) -> np.ndarray:
    v = np.asarray(v)
    if v.dtype != object:
        v = v.astype(float)
    if v.ndim != 1:
        raise ProjectiveError("homogeneous coordinates must be a vector")
    return v


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """A point [v] of P(R^n), stored normalized."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", normalize_projective(_as_vector(self.coords)))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def as_float(self) -> np.ndarray:
        return to_float(self.coords)

    def __eq__(self, other):
        if not isinstance(other, ProjPoint) or other.dim != self.dim:
            return NotImplemented
        if is_exact(self.coords) and is_exact(other.coords):
            return all(a == b for a, b in zip(self.coords, other.coords))
        return bool(np.allclose(self.as_float(), other.as_float(), atol=1e-12))

    def __hash__(self):
        return hash(tuple(np.round(self.as_float(), 12)))


@dataclass(frozen=True, eq=False)
class ProjHyperplane:
    """A hyperplane P(ker phi), stored as its normalized covector."""

    covector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "covector", normalize_projective(_as_vector(self.covector)))

    @property
    def dim(self) -> int:
        return self.covector.shape[0]

    def as_float(self) -> np.ndarray:
        return to_float(self.covector)

    def __call__(self, v) -> float:
        return float(self.as_float() @ to_float(np.asarray(v)))

    def __eq__(self, other):
        if not isinstance(other, ProjHyperplane) or other.dim != self.dim:
            return NotImplemented
        if is_exact(self.covector) and is_exact(other.covector):
            return all(a == b for a, b in zip(self.covector, other.covector))
        return bool(np.allclose(self.as_float(), other.as_float(), atol=1e-12))

    def __hash__(self):
        return hash(tuple(np.round(self.as_float(), 12)))


@dataclass(frozen=True)
class Flag:
    """A point together with a hyperplane (incident or not)."""

    point: ProjPoint
    hyperplane: ProjHyperplane

    def __post_init__(self):
        if self.point.dim != self.hyperplane.dim:
            raise ProjectiveError("flag components have different dimensions")

    def pairing(self) -> float:
        return float(self.hyperplane.as_float() @ self.point.as_float())

    def is_incident(self, tol: float = 1e-12) -> bool:
        return abs(self.pairing()) <= tol


def cross_ratio(a, x, y, b) -> float:
    """Cross-ratio (|a-y|/|a-x|)(|b-x|/|b-y|) of four collinear points.

    Points may be given as :class:`ProjPoint` or homogeneous vectors; the
    value is computed in an affine chart of their common line and does not
    depend on that chart.
    """
    pts = [p.as_float() if isinstance(p, ProjPoint) else to_float(_as_vector(p)) for p in (a, x, y, b)]
    if len({p.shape for p in pts}) != 1:
        raise ProjectiveError("points live in different dimensions")
    P = np.array([p / np.linalg.norm(p) for p in pts])
    s = np.linalg.svd(P, compute_uv=False)
    if s.size > 2 and s[2] > COLLINEAR_CUTOFF * s[0]:
        raise ProjectiveError("points are not collinear")
    # coordinates on the line: express every point in an orthonormal basis of its span
    _, _, vt = np.linalg.svd(P)
    basis = vt[:2]
    coords = P @ basis.T  # each row (u, w) represents [u : w]
    # affine chart: pick a covector on the line that vanishes on none of the points
    best, chart = -1.0, None
    for theta in np.linspace(0.0, np.pi, 37)[:-1]:
        c = np.array([np.cos(theta), np.sin(theta)])
        m = float(np.min(np.abs(coords @ c)))
        if m > best:
            best, chart = m, c
    other = np.array([-chart[1], chart[0]])
    t = (coords @ other) / (coords @ chart)
    ta, tx, ty, tb = t
    if abs(ta - tx) < 1e-15 or abs(tb - ty) < 1e-15:
        raise ProjectiveError("degenerate cross-ratio (a = x or b = y)")
    return abs(ta - ty) / abs(ta - tx) * abs(tb - tx) / abs(tb - ty)


def cross_ratio_affine(a: float, x: float, y: float, b: float) -> float:
    """Cross-ratio of four numbers on the affine line."""
    if a == x or b == y:
        raise ProjectiveError("degenerate cross-ratio (a = x or b = y)")
    return abs(a - y) / abs(a - x) * abs(b - x) / abs(b - y)


def _check_invertible(g) -> np.ndarray:
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ProjectiveError("action needs a square matrix")
    if not is_exact(g):
        g = g.astype(float)
        s = np.linalg.svd(g, compute_uv=False)
        if s[-1] <= 1e-14 * s[0]:
            raise ProjectiveError("singular matrix cannot act projectively")
    return g


def act(g, obj):
    """Linear action: [v] -> [g v], [phi] -> [g^{-T} phi], flags componentwise."""
    g = _check_invertible(g)
    if isinstance(obj, Flag):
        return Flag(act(g, obj.point), act(g, obj.hyperplane))
    if isinstance(obj, ProjPoint):
        if obj.dim != g.shape[0]:
            raise ProjectiveError("dimension mismatch")
        v = matmul(g, obj.coords) if is_exact(g) == is_exact(obj.coords) else to_float(g) @ obj.as_float()
        return ProjPoint(v)
    if isinstance(obj, ProjHyperplane):
        if obj.dim != g.shape[0]:
            raise ProjectiveError("dimension mismatch")
        try:
            ginv = inverse(g)
        except np.linalg.LinAlgError as exc:
            raise ProjectiveError("singular matrix cannot act projectively") from exc
        if is_exact(ginv) == is_exact(obj.covector):
            return ProjHyperplane(matmul(obj.covector, ginv))
        return ProjHyperplane(obj.as_float() @ to_float(ginv))
    raise TypeError(f"cannot act on {type(obj).__name__}")


def transversality(f1: Flag, f2: Flag) -> tuple[float, float]:
    """Normalized pairings phi_2(p_1) and phi_1(p_2)."""
    if f1.point.dim != f2.point.dim:
        raise ProjectiveError("flags of different dimensions")
    p1, p2 = f1.point.as_float(), f2.point.as_float()
    h1, h2 = f1.hyperplane.as_float(), f2.hyperplane.as_float()
    a = abs(h2 @ p1) / (np.linalg.norm(h2) * np.linalg.norm(p1))
    b = abs(h1 @ p2) / (np.linalg.norm(h1) * np.linalg.norm(p2))
    return float(a), float(b)


def is_transverse(f1: Flag, f2: Flag, tol: float = TRANSVERSE_TOL) -> bool:
    """True iff p_1 is off H_2 and p_2 is off H_1."""
    a, b = transversality(f1, f2)
    return a > tol and b > tol


def transversality_status(f1: Flag, f2: Flag, tol: float = TRANSVERSE_TOL) -> str:
    """'transverse', 'not_transverse' or 'marginal' (a pairing within 100x of tol)."""
    a, b = transversality(f1, f2)
    m = min(a, b)
    if tol / 100 < m <= tol * 100:
        return "marginal"
    return "transverse" if m > tol else "not_transverse"


def angle_between_lines(u, v) -> float:
    """Angle in [0, pi/2] between the lines spanned by u and v."""
    u = to_float(np.asarray(u))
    v = to_float(np.asarray(v))
    c = abs(float(u @ v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.arccos(min(1.0, c)))
