"""Properly convex domains as membership oracles, and the Hilbert metric.

Every domain lives in an affine chart with coordinates y in R^d; the
homogeneous lift is X = T^{-1} (y, 1) for the chart's frame T (the identity
for the standard chart x_n = 1). Metric operations only use ``contains``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cones import NotInteriorError, PolyCone, characteristic_function
from .numeric import to_float

BISECT_ITERS = 60
BISECT_TOL = 1e-12
FAR = 1e12


class OracleError(RuntimeError):
    """Membership oracle behaved inconsistently along a ray."""


class DegenerateHullError(ValueError):
    """Point set spans a lower-dimensional affine subspace."""

    def __init__(self, msg: str, affine_dim: int):
        super().__init__(msg)
        self.affine_dim = affine_dim


class Chart:
    """Affine chart {X : h(X) = 1} with coordinates y = (T X)[:-1] / (T X)[-1]."""

    def __init__(self, covector=None, dim: int | None = None):
        if covector is None:
            if dim is None:
                raise ValueError("chart needs a covector or a dimension")
            covector = np.zeros(dim)
            covector[-1] = 1.0
        h = to_float(np.asarray(covector))
        n = h.size
        if not np.any(h):
            raise ValueError("chart covector is zero")
        k = n - 1 if h[-1] != 0 else int(np.argmax(np.abs(h)))
        rows = [np.eye(n)[j] for j in range(n) if j != k]
        T = np.vstack(rows + [h])
        self.covector = h
        self.T = T
        self.Tinv = np.linalg.inv(T)

    @property
    def n(self) -> int:
        return self.covector.size

    def to_chart(self, X) -> np.ndarray:
        Y = self.T @ to_float(np.asarray(X))
        if abs(Y[-1]) < 1e-300:
            raise ValueError("point lies on the hyperplane at infinity of this chart")
        return Y[:-1] / Y[-1]

    def lift(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.Tinv @ np.append(y, 1.0)


class Domain:
    """Base class: an open convex set in a chart, given by a membership oracle."""

    dim: int
    chart: Chart

    def contains(self, y) -> bool:
        raise NotImplementedError

    def interior_point(self) -> np.ndarray:
        raise NotImplementedError

    def lift(self, y) -> np.ndarray:
        return self.chart.lift(y)

    def to_chart(self, X) -> np.ndarray:
        return self.chart.to_chart(X)


class PolyDomain(Domain):
    """Interior of the convex hull of finitely many chart points."""

    def __init__(self, vertices, chart: Chart | None = None):
        from scipy.spatial import ConvexHull

        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        d = V.shape[1]
        self.chart = chart or Chart(dim=d + 1)
        if d == 1:
            lo, hi = float(V.min()), float(V.max())
            if hi - lo <= 0:
                raise DegenerateHullError("interval is a point", 0)
            self.vertices = np.array([[lo], [hi]])
            self.A = np.array([[-1.0], [1.0]])
            self.b = np.array([-lo, hi])
        else:
            centered = V - V.mean(axis=0)
            s = np.linalg.svd(centered, compute_uv=False)
            k = int(np.sum(s > 1e-12 * max(1.0, float(s[0]))))
            if k < d:
                raise DegenerateHullError(f"points span an affine subspace of dimension {k} < {d}", k)
            hull = ConvexHull(V)
            self.vertices = V[hull.vertices]
            self.A = hull.equations[:, :-1]
            self.b = -hull.equations[:, -1]
            # merge coplanar facets
            key = np.round(np.hstack([self.A, self.b[:, None]]), 9)
            _, idx = np.unique(key, axis=0, return_index=True)
            self.A, self.b = self.A[np.sort(idx)], self.b[np.sort(idx)]
        self.dim = d

    @property
    def cone(self) -> PolyCone:
        if not hasattr(self, "_cone"):
            self._cone = PolyCone.from_rays([self.chart.lift(v) for v in self.vertices])
        return self._cone

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(self.A @ y < self.b))

    def slack(self, y) -> float:
        """Smallest distance from y to a facet hyperplane (negative outside)."""
        y = np.asarray(y, dtype=float)
        norms = np.linalg.norm(self.A, axis=1)
        return float(np.min((self.b - self.A @ y) / norms))

    def interior_point(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def characteristic(self, X) -> float:
        return characteristic_function(self.cone, X)



class EllipsoidDomain(Domain):
    """{y : (y - c)^T A (y - c) < 1} for a positive definite shape matrix A."""

    def __init__(self, shape_matrix, center=None, chart: Chart | None = None):
        A = np.atleast_2d(np.asarray(shape_matrix, dtype=float))
        if A.shape[0] != A.shape[1] or not np.allclose(A, A.T):
            raise ValueError("shape matrix must be symmetric")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise ValueError("shape matrix must be positive definite")
        self.A = A
        self.dim = A.shape[0]
        self.center = np.zeros(self.dim) if center is None else np.asarray(center, dtype=float)
        self.chart = chart or Chart(dim=self.dim + 1)

    def contains(self, y) -> bool:
        z = np.asarray(y, dtype=float) - self.center
        return bool(z @ self.A @ z < 1.0)

    def interior_point(self) -> np.ndarray:
        return self.center.copy()

    def quadratic_form(self, X) -> float:
        """q(X) > 0 exactly on the cone over the ellipsoid (up to sign of X)."""
        Y = self.chart.T @ to_float(np.asarray(X))
        z = Y[:-1] - self.center * Y[-1]
        return float(Y[-1] ** 2 - z @ self.A @ z)

    def characteristic(self, X) -> float:
        """q(X)^(-n/2): the characteristic function of the cone up to a constant."""
        Y = self.chart.T @ to_float(np.asarray(X))
        q = self.quadratic_form(X)
        if q <= 0 or Y[-1] <= 0:
            raise NotInteriorError("point is not interior to the cone")
        n = self.dim + 1
        return q ** (-n / 2.0)


@dataclass(frozen=True)
class GraphFunction:
    """A strictly convex function phi on an open convex set D of R^m."""

    name: str
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    in_domain: Callable[[np.ndarray], bool] = field(default=lambda V: True)
    full_domain: bool = True


def quadratic_phi() -> GraphFunction:
    """phi(V) = |V|^2 / 2 on all of R^m."""
    return GraphFunction(
        name="quadratic",
        value=lambda V: 0.5 * float(np.dot(V, V)),
        gradient=lambda V: np.asarray(V, dtype=float).copy(),
        hessian=lambda V: np.eye(np.asarray(V).size),
    )


PHI_FUNCTIONS = {"quadratic": quadratic_phi}


class GraphDomain(Domain):
    """Epigraph {(t, V) : V in D, t > phi(V)} in the chart (t, V)."""

    def __init__(self, phi: GraphFunction, dim: int):
        if dim < 1:
            raise ValueError("graph domain needs dim >= 1")
        self.phi = phi
        self.dim = dim
        self.chart = Chart(dim=dim + 1)

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        V = y[1:]
        if not self.phi.in_domain(V):
            return False
        return bool(y[0] > self.phi.value(V))

    def interior_point(self) -> np.ndarray:
        y = np.zeros(self.dim)
        y[0] = 1.0 + self.phi.value(np.zeros(self.dim - 1))
        return y


@dataclass
class ImplicitDomain(Domain):
    """Domain known through a membership predicate and a boundary sampler."""

    membership: Callable[[np.ndarray], bool]
    sampler: Callable[[int, np.random.Generator], np.ndarray]
    tag: str
    dim: int
    chart: Chart
    base_point: np.ndarray

    def contains(self, y) -> bool:
        return bool(self.membership(np.asarray(y, dtype=float)))

    def interior_point(self) -> np.ndarray:
        return self.base_point.copy()

    def sample_boundary(self, count: int, seed: int | np.random.Generator = 0) -> np.ndarray:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return self.sampler(count, rng)


# ---------------------------------------------------------------- rays


def ray_exit(D: Domain, p, u) -> float:
    """Parameter t at which p + t u leaves D (math.inf if it never does)."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    if not D.contains(p):
        raise NotInteriorError("ray base point is not interior")
    t_in, t_out = 0.0, 1.0
    while D.contains(p + t_out * u):
        t_in = t_out
        t_out *= 2.0
        if t_out > FAR:
            return math.inf
    for _ in range(BISECT_ITERS):
        if t_out - t_in <= BISECT_TOL * max(1.0, t_in):
            break
        mid = 0.5 * (t_in + t_out)
        if D.contains(p + mid * u):
            t_in = mid
        else:
            t_out = mid
    for frac in (0.25, 0.5, 0.75):
        if not D.contains(p + frac * t_in * u):
            raise OracleError("membership is not monotone along the ray")
    return 0.5 * (t_in + t_out)


def line_boundary_intersect(D: Domain, x, y):
    """Boundary points a, b with a, x, y, b in order on the chord through x, y.

    An endpoint at infinity (unbounded chart picture) is returned as None.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not D.contains(x) or not D.contains(y):
        raise NotInteriorError("chord endpoints must be interior")
    d = y - x
    L = float(np.linalg.norm(d))
    if L == 0.0:
        raise ValueError("x and y coincide")
    u = d / L
    tb = ray_exit(D, y, u)
    ta = ray_exit(D, x, -u)
    a = None if math.isinf(ta) else x - ta * u
    b = None if math.isinf(tb) else y + tb * u
    return a, b


def hilbert_distance(D: Domain, x, y) -> float:
    """Half the log of the cross-ratio of x, y with the chord's boundary points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not D.contains(x) or not D.contains(y):
        raise NotInteriorError("points must be interior")
    L = float(np.linalg.norm(y - x))
    if L == 0.0:
        return 0.0
    u = (y - x) / L
    sb = ray_exit(D, y, u)
    sa = ray_exit(D, x, -u)
    total = 0.0
    if not math.isinf(sa):
        total += math.log1p(L / sa)
    if not math.isinf(sb):
        total += math.log1p(L / sb)
    return 0.5 * total


def klein_distance(x, y) -> float:
    """Closed-form hyperbolic distance in the Klein model of the unit ball."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    num = 1.0 - x @ y
    den = math.sqrt((1.0 - x @ x) * (1.0 - y @ y))
    return math.acosh(max(1.0, num / den))


def convex_hull_in_chart(points, chart=None) -> PolyDomain:
    """Convex hull of points as a PolyDomain.

    ``points`` are chart coordinates when ``chart`` is None, otherwise
    homogeneous vectors mapped through the chart with covector ``chart``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if chart is not None:
        ch = chart if isinstance(chart, Chart) else Chart(chart)
        vals = P @ ch.covector
        if np.any(vals <= 0) and np.any(vals >= 0):
            raise ValueError("chart hyperplane meets the point set")
        P = np.array([ch.to_chart(X) for X in P])
        return PolyDomain(P, chart=ch)
    return PolyDomain(P)


def sample_boundary(D: Domain, count: int, rng: np.random.Generator, base=None) -> np.ndarray:
    """Boundary points hit by rays in uniformly random directions from a base point."""
    p = D.interior_point() if base is None else np.asarray(base, dtype=float)
    out = []
    while len(out) < count:
        u = rng.normal(size=D.dim)
        u /= np.linalg.norm(u)
        t = ray_exit(D, p, u)
        if math.isinf(t):
            continue
        out.append(p + t * u)
    return np.array(out)


# ---------------------------------------------------------------- JSON


def domain_from_json(spec: dict) -> Domain:
    kind = spec.get("kind")
    dim = spec.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise ValueError("domain 'dim' must be a positive integer")
    if kind == "polytope":
        V = np.asarray(spec["vertices"], dtype=float)
        if V.ndim != 2 or V.shape[1] != dim:
            raise ValueError("vertex coordinates must have length dim")
        return PolyDomain(V)
    if kind == "ellipsoid":
        A = np.asarray(spec["shape_matrix"], dtype=float)
        if A.shape != (dim, dim):
            raise ValueError("shape_matrix must be dim x dim")
        return EllipsoidDomain(A, spec.get("center"))
    if kind == "graph":
        name = spec.get("phi", "quadratic")
        if name not in PHI_FUNCTIONS:
            raise ValueError(f"unknown phi {name!r}")
        return GraphDomain(PHI_FUNCTIONS[name](), dim)
    raise ValueError(f"unknown domain kind {kind!r}")


def domain_to_json(D: Domain) -> dict:
    if isinstance(D, PolyDomain):
        return {"kind": "polytope", "dim": D.dim, "vertices": D.vertices.tolist()}
    if isinstance(D, EllipsoidDomain):
        out = {"kind": "ellipsoid", "dim": D.dim, "shape_matrix": D.A.tolist()}
        if np.any(D.center != 0):
            out["center"] = D.center.tolist()
        return out
    if isinstance(D, GraphDomain):
        return {"kind": "graph", "dim": D.dim, "phi": D.phi.name}
    raise TypeError("domain has no JSON form")


# ---------------------------------------------------------------- smoothing


class SmoothedDomain(ImplicitDomain):
    """Implicit domain {y in Omega1 : h(X)^n f(X) < c} with its level function."""

    def __init__(self, level_value, **kwargs):
        super().__init__(**kwargs)
        self.level_value = level_value


def _support_data(D: Domain, h: np.ndarray):
    """Sign making h >= 0 on closure(D), and a chart point of closure(D) in H."""
    if isinstance(D, PolyDomain):
        vals = np.array([h @ D.lift(v) for v in D.vertices])
        scale = max(1.0, float(np.abs(vals).max()))
        sigma = 1.0 if vals.max() > -vals.min() else -1.0
        vals = sigma * vals
        if vals.min() < -1e-9 * scale or vals.min() > 1e-9 * scale:
            raise ValueError("hyperplane does not support the domain")
        touching = D.vertices[vals <= 1e-9 * scale]
        return sigma, touching.mean(axis=0)
    if isinstance(D, EllipsoidDomain):
        # h(lift(y)) = w.y + w0 in the chart; extremes over the ellipsoid
        w0 = float(h @ D.lift(np.zeros(D.dim)))
        w = np.array([h @ D.lift(e) for e in np.eye(D.dim)]) - w0
        Ainv_w = np.linalg.solve(D.A, w)
        r = math.sqrt(float(w @ Ainv_w))
        if r == 0.0:
            raise ValueError("hyperplane is the chart's hyperplane at infinity")
        lo = float(w @ D.center) + w0 - r
        hi = lo + 2 * r
        sigma = 1.0 if abs(lo) < abs(hi) else -1.0
        extreme = lo if sigma > 0 else hi
        if abs(extreme) > 1e-9 * max(1.0, abs(hi), abs(lo)):
            raise ValueError("hyperplane does not support the domain")
        return sigma, D.center - sigma * Ainv_w / r
    raise TypeError("smoothing needs a polytope or an ellipsoid")


def smooth_domain(omega1: Domain, H, level: float) -> SmoothedDomain:
    """Slice the characteristic level set {f = c} of the cone over omega1 by a
    hyperplane through H, seen in the chart of omega1.

    A chart point y with lift X belongs to the result iff y is in omega1 and
    h(X)^n f(X) < c, where h is the covector of H signed positive on omega1.
    The function h^n f is homogeneous of degree 0 and invariant under every
    automorphism of the cone fixing h with determinant +-1.
    """
    if not level > 0:
        raise ValueError("level must be positive")
    h = to_float(np.asarray(getattr(H, "covector", H)))
    n = omega1.dim + 1
    if h.size != n:
        raise ValueError("hyperplane has the wrong dimension")
    sigma, contact = _support_data(omega1, h)
    h = sigma * h

    def level_value(y) -> float:
        y = np.asarray(y, dtype=float)
        if not omega1.contains(y):
            return math.inf
        X = omega1.lift(y)
        v = float(h @ X)
        if v <= 0:
            return math.inf
        return v ** n * omega1.characteristic(X)

    def membership(y) -> bool:
        return level_value(y) < level

    # base point: slide from the interior point towards the contact region
    p0 = omega1.interior_point()
    base = None
    for k in range(200):
        t = 1.0 - 0.5 ** (k / 4.0)
        p = (1 - t) * p0 + t * contact
        if membership(p):
            base = p
            break
    if base is None:
        raise ValueError(f"level {level} gives an empty domain")

    dom_holder = {}

    def sampler(count: int, rng: np.random.Generator) -> np.ndarray:
        return sample_boundary(dom_holder["D"], count, rng, base=base)

    D = SmoothedDomain(
        level_value,
        membership=membership,
        sampler=sampler,
        tag=f"smoothed level set, level {level:g}",
        dim=omega1.dim,
        chart=omega1.chart,
        base_point=base,
    )
    dom_holder["D"] = D
    D.covector = h
    D.contact = contact
    return D


def midpoint_convexity_check(D: Domain, boundary: np.ndarray, rng: np.random.Generator,
                             chords: int = 1000, rel_depth: float = 1e-9) -> dict:
    """Strict midpoint test: the midpoint of two boundary points is interior.

    ``rel_depth`` is how far (relative to the chord length) the midpoint must
    sit inside; a chord lying in a flat boundary piece fails.
    """
    m = len(boundary)
    failures = 0
    worst = math.inf
    for _ in range(chords):
        i, j = rng.choice(m, size=2, replace=False)
        a, b = boundary[i], boundary[j]
        L = float(np.linalg.norm(b - a))
        if L < 1e-9:
            continue
        mid = 0.5 * (a + b)
        if not D.contains(mid):
            failures += 1
            worst = min(worst, 0.0)
            continue
        # depth of the midpoint along the chord normal (in the chord's plane)
        u = rng.normal(size=D.dim)
        u -= (u @ (b - a)) / L ** 2 * (b - a)
        nu = float(np.linalg.norm(u))
        if nu < 1e-12:
            continue
        u /= nu
        depth = min(ray_exit(D, mid, u), ray_exit(D, mid, -u))
        worst = min(worst, depth / L)
        if depth <= rel_depth * L:
            failures += 1
    return {"chords": chords, "failures": failures, "min_relative_depth": worst}
