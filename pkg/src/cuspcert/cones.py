"""Polyhedral cones: double description, duality, characteristic functions.

Conventions: a cone C in R^n is described by generating rays and by facet
covectors beta with beta(x) <= 0 on C. The dual cone is
C* = {alpha : alpha(x) < 0 on closure(C) - 0}; its closure is generated by
the facet covectors of C, so rays and facets trade places under duality.
"""
from __future__ import annotations

import itertools
from functools import cached_property
from math import comb

import numpy as np

from .numeric import (det, exact_nullspace, float_nullspace, is_exact, rank,
                      to_float, _div)
from .projective import ProjHyperplane

FLOAT_TOL = 1e-10
BRUTE_FORCE_LIMIT = 20_000


class NotSharpError(ValueError):
    """The cone contains a line, so its dual has empty interior."""


class NotInteriorError(ValueError):
    """A point is on or outside the boundary of a cone or domain."""


def _scale_positive(v: np.ndarray) -> np.ndarray:
    """Divide by the max-abs coordinate, keeping the direction of the ray."""
    if is_exact(v):
        big = max((abs(x) for x in v), default=0)
        if big == 0:
            raise ValueError("zero ray")
        return np.array([_div(x, big) for x in v], dtype=object)
    v = np.asarray(v, dtype=float)
    m = float(np.max(np.abs(v)))
    if m == 0.0:
        raise ValueError("zero ray")
    return v / m + 0.0


def _key(v: np.ndarray) -> tuple:
    if is_exact(v):
        return tuple(v)
    return tuple(np.round(v, 9) + 0.0)


def _pair(beta, x):
    """beta(x), exact when both are exact."""
    if is_exact(beta) and is_exact(x):
        return sum((a * b for a, b in zip(beta, x)), 0)
    return float(to_float(beta) @ to_float(x))


def _stack(vectors: list[np.ndarray]) -> np.ndarray:
    if vectors and all(is_exact(v) for v in vectors):
        return np.array([list(v) for v in vectors], dtype=object)
    return np.array([to_float(v) for v in vectors], dtype=float)


def _dedup(vectors):
    seen, out = set(), []
    for v in vectors:
        v = _scale_positive(v)
        k = _key(v)
        if k not in seen:
            seen.add(k)
            out.append(v)
    return out


def _facets_brute_force(rays: list[np.ndarray], n: int) -> list[np.ndarray]:
    """Facet covectors of cone(rays) by scanning (n-1)-subsets."""
    R = _stack(rays)
    exact = is_exact(R)
    Rf = to_float(R)
    Rf = Rf / np.linalg.norm(Rf, axis=1, keepdims=True)
    out = []
    for subset in itertools.combinations(range(len(rays)), n - 1):
        # cheap float screen; exact confirmation below
        fker = float_nullspace(Rf[list(subset)])
        if len(fker) != 1:
            continue
        fv = Rf @ fker[0]
        if fv.max() > 1e-8 and fv.min() < -1e-8:
            continue
        S = R[list(subset)]
        ker = exact_nullspace(S) if exact else fker
        if len(ker) != 1:
            continue
        beta = ker[0]
        vals = [_pair(beta, r) for r in rays]
        if exact:
            pos = any(v > 0 for v in vals)
            neg = any(v < 0 for v in vals)
        else:
            scale = float(np.max(np.abs(to_float(beta)))) * max(float(np.max(np.abs(to_float(r)))) for r in rays)
            pos = any(v > FLOAT_TOL * scale for v in vals)
            neg = any(v < -FLOAT_TOL * scale for v in vals)
        if pos and neg:
            continue
        if pos:
            beta = -beta if exact else -to_float(beta)
        elif not neg:
            continue  # every ray on the hyperplane: degenerate
        out.append(beta)
    return _dedup(out)


def _facets_qhull(rays: list[np.ndarray], n: int) -> list[np.ndarray]:
    """Facets of a pointed full cone via a convex hull in an affine section."""
    from scipy.spatial import ConvexHull

    R = np.array([to_float(r) / np.linalg.norm(to_float(r)) for r in rays])
    h = R.mean(axis=0)
    if np.any(R @ h <= 0):
        raise NotSharpError("no section meets every ray")
    P = R / (R @ h)[:, None]
    # orthonormal frame of the section h.x = 1
    _, _, vt = np.linalg.svd(h[None, :])
    frame = vt[1:]
    base = h / (h @ h)
    Q = (P - base) @ frame.T
    hull = ConvexHull(Q)
    out = []
    for eq in hull.equations:
        normal, off = eq[:-1], eq[-1]
        # normal.q + off <= 0 on the section; homogenize: x -> q = frame (x/h.x - base)
        beta = frame.T @ normal + (off - normal @ (frame @ base)) * h
        out.append(beta)
    return _dedup(out)


class PolyCone:
    """A full-dimensional polyhedral cone in R^n."""

    def __init__(self, rays, facets, sharp: bool):
        self.rays: list[np.ndarray] = list(rays)
        self.facets: list[np.ndarray] = list(facets)
        self.sharp = sharp
        ref = self.rays[0] if self.rays else self.facets[0]
        self.dim = int(np.asarray(ref).shape[0])

    # -- constructors -------------------------------------------------

    @classmethod
    def from_rays(cls, rays) -> "PolyCone":
        rays = [np.asarray(r) if np.asarray(r).dtype == object else np.asarray(r, dtype=float) for r in rays]
        if not rays:
            raise ValueError("cone needs at least one ray")
        n = rays[0].shape[0]
        if rank(_stack(rays)) < n:
            raise ValueError("rays do not span R^n; only full-dimensional cones are supported")
        rays = _dedup(rays)
        exact = all(is_exact(r) for r in rays)
        if exact or comb(len(rays), n - 1) <= BRUTE_FORCE_LIMIT:
            facets = _facets_brute_force(rays, n)
        else:
            facets = _facets_qhull(rays, n)
        sharp = bool(facets) and rank(_stack(facets)) == n
        if sharp:
            rays = cls._extreme(rays, facets, n)
        return cls(rays, facets, sharp)

    @classmethod
    def from_facets(cls, facets) -> "PolyCone":
        """Cone {x : beta(x) <= 0 for every beta}."""
        facets = [np.asarray(f) if np.asarray(f).dtype == object else np.asarray(f, dtype=float) for f in facets]
        if not facets:
            raise ValueError("at least one facet needed (R^n itself is not a sharp cone)")
        n = facets[0].shape[0]
        if rank(_stack(facets)) < n:
            return cls([], _dedup(facets), sharp=False)
        # rays of the cone are the facets of the dual, generated by the facets
        dual = cls.from_rays(facets)
        return cls(dual.facets, dual.rays, sharp=True)

    @staticmethod
    def _extreme(rays, facets, n):
        out = []
        for r in rays:
            active = [f for f in facets if _is_zero(_pair(f, r), f, r)]
            if active and rank(_stack(active)) == n - 1:
                out.append(r)
        return out

    # -- queries ------------------------------------------------------

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.rays + self.facets)

    def contains(self, x, strict: bool = True) -> bool:
        vals = [_pair(f, x) for f in self.facets]
        if strict:
            return all(v < 0 for v in vals)
        return all(v <= 0 for v in vals)

    def interior_point(self) -> np.ndarray:
        if not self.sharp:
            raise NotSharpError("cone is not sharp")
        return sum(self.rays[1:], self.rays[0])

    def ray_set(self) -> set:
        return {_key(_scale_positive(r)) for r in self.rays}

    def facet_set(self) -> set:
        return {_key(_scale_positive(f)) for f in self.facets}

    @cached_property
    def dual_triangulation(self) -> list[tuple[np.ndarray, float]]:
        """Simplicial cones (rows = covectors) covering the dual, with |det|."""
        if not self.sharp:
            raise NotSharpError("dual of a non-sharp cone has empty interior")
        gens = list(self.facets)
        # facets of the dual correspond to extreme rays of the cone
        faces = []
        for r in self.rays:
            faces.append(frozenset(i for i, f in enumerate(gens) if _is_zero(_pair(f, r), f, r)))
        simplices = _pulling_triangulation(gens, faces, self.dim)
        out = []
        for simplex in simplices:
            B = _stack(simplex)
            d = det(B)
            out.append((to_float(B), abs(float(d))))
        return out

    def __repr__(self):
        return f"PolyCone(dim={self.dim}, rays={len(self.rays)}, facets={len(self.facets)}, sharp={self.sharp})"


def _is_zero(value, f, r) -> bool:
    if isinstance(value, float):
        scale = float(np.max(np.abs(to_float(f)))) * float(np.max(np.abs(to_float(r))))
        return abs(value) <= FLOAT_TOL * max(scale, 1.0)
    return value == 0


def _pulling_triangulation(gens, faces, n):
    """Triangulate cone(gens) by coning each facet's triangulation to an interior ray."""
    pool = list(gens)

    def rec(idx: frozenset, k: int) -> list[list[np.ndarray]]:
        if len(idx) == k:
            return [[pool[i] for i in sorted(idx)]]
        members = sorted(idx)
        apex = sum((pool[i] for i in members[1:]), pool[members[0]])
        subfaces = set()
        for F in faces:
            S = idx & F
            if S == idx or len(S) < k - 1:
                continue
            if rank(_stack([pool[i] for i in S])) == k - 1:
                subfaces.add(frozenset(S))
        maximal = [S for S in subfaces if not any(S < T for T in subfaces)]
        out = []
        for S in maximal:
            for simplex in rec(S, k - 1):
                out.append(simplex + [apex])
        return out

    return rec(frozenset(range(len(gens))), n)


# ---------------------------------------------------------------- operations


def dual_cone(C: PolyCone) -> PolyCone:
    """The dual cone, recomputed from its generators (the facets of C)."""
    if not C.sharp:
        raise NotSharpError("cone contains a line; its dual has empty interior")
    return PolyCone.from_rays(C.facets)


def is_sharp(C: PolyCone) -> bool:
    return C.sharp


def transform_cone(C: PolyCone, g) -> PolyCone:
    """Image g C: rays r -> g r, facets beta -> beta g^{-1}."""
    from .numeric import inverse, matmul

    g = np.asarray(g)
    exact = is_exact(g) and C.exact
    G = g if exact else to_float(g)
    Ginv = inverse(G)
    rays = [matmul(G, r) if exact else G @ to_float(r) for r in C.rays]
    facets = [matmul(f, Ginv) if exact else to_float(f) @ Ginv for f in C.facets]
    return PolyCone([_scale_positive(r) for r in rays], [_scale_positive(f) for f in facets], C.sharp)


def characteristic_function(C: PolyCone, x) -> float:
    """f_C(x) = integral over C* of exp(alpha(x)) d alpha (Lebesgue measure).

    Evaluated as sum_j |det B_j| / prod_i (-beta_{j,i}(x)) over the dual
    triangulation.
    """
    x = to_float(np.asarray(x))
    if not C.contains(x):
        raise NotInteriorError("point is not interior to the cone")
    total = 0.0
    for B, d in C.dual_triangulation:
        vals = -(B @ x)
        if np.any(vals <= 0):
            raise NotInteriorError("point is not interior to the cone")
        total += d / float(np.prod(vals))
    return total


def characteristic_gradient(C: PolyCone, x) -> np.ndarray:
    x = to_float(np.asarray(x))
    if not C.contains(x):
        raise NotInteriorError("point is not interior to the cone")
    grad = np.zeros_like(x)
    for B, d in C.dual_triangulation:
        vals = -(B @ x)
        term = d / float(np.prod(vals))
        grad += term * (B.T @ (1.0 / vals))
    return grad


def dual_map(C: PolyCone, x) -> ProjHyperplane:
    """Tangent hyperplane of the characteristic level set through x."""
    g = characteristic_gradient(C, x)
    if not np.all(np.isfinite(g)) or np.linalg.norm(g) == 0.0:
        raise ValueError("degenerate gradient of the characteristic function")
    return ProjHyperplane(g)


def dual_map_covector(C: PolyCone, x) -> np.ndarray:
    """Gradient direction scaled to unit length; lies in the open dual cone."""
    g = characteristic_gradient(C, x)
    return g / np.linalg.norm(g)


def radial_projection(C: PolyCone, x, level: float) -> np.ndarray:
    """The multiple t x with f_C(t x) = level (f is homogeneous of degree -n)."""
    x = to_float(np.asarray(x))
    f = characteristic_function(C, x)
    return x * (f / level) ** (1.0 / C.dim)


def hull_centroid(points: np.ndarray) -> np.ndarray:
    """Centroid of the convex hull of points, in the hull's own dimension."""
    from scipy.spatial import ConvexHull, Delaunay

    P = np.asarray(points, dtype=float)
    base = P.mean(axis=0)
    Q = P - base
    if P.shape[0] == 1:
        return P[0].copy()
    _, s, vt = np.linalg.svd(Q, full_matrices=False)
    k = int(np.sum(s > 1e-12 * max(1.0, float(s[0]))))
    if k == 0:
        return base
    frame = vt[:k]
    Y = Q @ frame.T
    if k == 1:
        y = 0.5 * (Y.min() + Y.max())
        return base + y * frame[0]
    hull = ConvexHull(Y)
    V = Y[hull.vertices]
    tri = Delaunay(V)
    vols, cents = [], []
    for simplex in tri.simplices:
        S = V[simplex]
        vols.append(abs(np.linalg.det(S[1:] - S[0])))
        cents.append(S.mean(axis=0))
    vols = np.array(vols)
    c = (np.array(cents) * vols[:, None]).sum(axis=0) / vols.sum()
    return base + c @ frame


def center_of_mass(C: PolyCone, K, level: float = 1.0) -> np.ndarray:
    """Canonical interior point attached to a finite set K of interior points.

    Each point of K is pushed radially onto the level set {f_C = level};
    the centroid of the convex hull of these lifts is returned (a vector
    in the open cone, meaningful up to positive scaling).
    """
    K = [to_float(np.asarray(k)) for k in K]
    if not K:
        raise ValueError("empty point set")
    if level <= 0:
        raise ValueError("level must be positive")
    lifts = np.array([radial_projection(C, k, level) for k in K])
    return hull_centroid(lifts)
