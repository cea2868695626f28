"""Algebraic horosphere flows, the genRep block construction with its
horofunction, and orbit-hull domains."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .domains import GraphFunction, PolyDomain, Chart, convex_hull_in_chart, quadratic_phi, ray_exit
from .groups import MatrixGroup, adapted_basis, enumerate_words, fixed_pair, inf_norm
from .numeric import (
    LAMBDA,
    QuadSqrt2,
    identity,
    inverse,
    exact_matrix,
    is_exact,
    matmul,
    matrix_kind,
    to_float,
)
from .projective import ProjHyperplane, ProjPoint


class FlagNotFixedError(ValueError):
    """The element does not fix the flag (xi, H)."""


class OrbitError(RuntimeError):
    """Orbit leaves the chart of the witness."""


# ---------------------------------------------------------------- flows


@dataclass
class HoroFlow:
    xi: ProjPoint
    H: ProjHyperplane
    basis: np.ndarray = field(repr=False)

    @classmethod
    def from_vectors(cls, xi, H) -> "HoroFlow":
        xi = np.asarray(xi)
        H = np.asarray(H)
        if is_exact(xi) != is_exact(H):
            xi, H = to_float(xi), to_float(H)
        val = np.dot(H, xi)
        if (abs(val) > 1e-12) if isinstance(val, float) else val != 0:
            raise ValueError("xi does not lie in H")
        B = adapted_basis(xi, H)
        return cls(ProjPoint(xi), ProjHyperplane(H), B)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact(self.basis)


def horoflow_matrix(hf: HoroFlow, t) -> np.ndarray:
    """B (I + t E_{1n}) B^{-1}."""
    n = hf.n
    if hf.exact and not isinstance(t, float):
        kind = matrix_kind(hf.basis)
        E = identity(n, kind)
        E[0, n - 1] = t if kind != "quad_sqrt2" else QuadSqrt2(t)
        return matmul(matmul(hf.basis, E), inverse(hf.basis))
    B = to_float(hf.basis)
    E = np.eye(n)
    E[0, n - 1] = float(t)
    return B @ E @ np.linalg.inv(B)


def _eigen_on(g, v, transpose: bool = False):
    """lambda with g v = lambda v (or g^T v), or None."""
    w = matmul(g.T if transpose else g, v)
    k = next(i for i in range(len(v)) if v[i] != 0)
    lam = w[k] / v[k] if not is_exact(v) else _exact_div(w[k], v[k])
    resid = w - lam * v
    if is_exact(resid):
        return lam if all(r == 0 for r in resid) else None
    scale = max(1.0, float(np.abs(to_float(w)).max()))
    return lam if float(np.abs(to_float(resid)).max()) <= 1e-10 * scale else None


def _exact_div(a, b):
    from .numeric import _div

    return _div(a, b)


def horosphere_weight(g, hf: HoroFlow):
    """tau = (eigenvalue on xi) / (eigenvalue on H)."""
    g = np.asarray(g)
    exact = is_exact(g) and hf.exact
    xi = hf.xi.coords if exact else hf.xi.as_float()
    H = hf.H.covector if exact else hf.H.as_float()
    gg = g if exact else to_float(g)
    lam = _eigen_on(gg, xi)
    mu = _eigen_on(gg, H, transpose=True)
    if lam is None or mu is None:
        raise FlagNotFixedError("g does not fix (xi, H)")
    return _exact_div(lam, mu) if exact else float(lam) / float(mu)


def flow_commutation_check(g, hf: HoroFlow, times=(1, Fraction(1, 2), 3)) -> bool:
    """tau(g) = 1 and g commutes with the flow at the given times."""
    try:
        tau = horosphere_weight(g, hf)
    except FlagNotFixedError:
        return False
    trivial = abs(tau - 1.0) <= 1e-12 if isinstance(tau, float) else tau == 1
    if not trivial:
        return False
    g = np.asarray(g)
    for t in times:
        P = horoflow_matrix(hf, t if hf.exact and is_exact(g) else float(t))
        if is_exact(g) and is_exact(P):
            if any(a != b for a, b in zip(matmul(g, P).flat, matmul(P, g).flat)):
                return False
        else:
            Gf = to_float(g)
            Pf = to_float(P)
            if np.abs(Gf @ Pf - Pf @ Gf).max() > 1e-10 * max(1.0, np.abs(Gf).max()):
                return False
    return True


def flow_direction(hf: HoroFlow, chart: Chart) -> np.ndarray:
    """Chart translation vector of the flow at unit time (chart covector proportional to H)."""
    b1 = to_float(hf.basis[:, 0])
    h = hf.H.as_float()
    if np.linalg.matrix_rank(np.vstack([h, chart.covector])) != 1:
        raise ValueError("chart must be the affine chart P - H")
    # H(b_n) = 1, so the flow adds t * H(X) * b_1 and H(X) = 1 / chart(b_n) on the chart
    chart_bn = to_float(hf.basis[:, -1]) @ chart.covector
    return (chart.T @ b1)[:-1] / chart_bn


def horosphere_time(D, y, hf: HoroFlow) -> float:
    """t with y on the horosphere H_t: distance back to the boundary along -xi."""
    u = flow_direction(hf, D.chart)
    return ray_exit(D, np.asarray(y, dtype=float), -u)


def flow_point(D, y, hf: HoroFlow, t: float) -> np.ndarray:
    """Chart image of y under the flow at time t."""
    X = D.lift(y)
    return D.to_chart(to_float(horoflow_matrix(hf, float(t))) @ X)


# ---------------------------------------------------------------- genRep


def is_normal_form(M) -> bool:
    """[[1,*,*],[0,*,*],[0,0,1]]: e_1 fixed and e_n^* fixed."""
    M = np.asarray(M)
    n = M.shape[0]
    first = [M[i, 0] for i in range(n)]
    last = [M[n - 1, j] for j in range(n)]
    if is_exact(M):
        return first == [1] + [0] * (n - 1) and last == [0] * (n - 1) + [1]
    e = np.zeros(n)
    e[0] = 1
    f = np.zeros(n)
    f[-1] = 1
    return bool(np.allclose(first, e, atol=1e-12) and np.allclose(last, f, atol=1e-12))


@dataclass
class GenCuspSpec:
    s: int
    psi: np.ndarray
    rho: MatrixGroup
    phi: GraphFunction = field(default_factory=quadratic_phi)

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=float).reshape(-1)
        if self.s < 0 or self.psi.size != self.s:
            raise ValueError(f"psi must have length s = {self.s}")
        if np.any(self.psi <= 0):
            raise ValueError("psi must be strictly positive")
        if self.rho.dim < 2:
            raise ValueError("rho must act on R^n with n >= 2")
        for name, g in self.rho.generators:
            if not is_normal_form(g):
                raise ValueError(f"generator {name!r} of rho is not of the form [[1,*,*],[0,*,*],[0,0,1]]")

    @property
    def n(self) -> int:
        return self.rho.dim

    @property
    def dim(self) -> int:
        return self.s + self.n


@dataclass
class GenRepGroup:
    spec: GenCuspSpec

    @property
    def dim(self) -> int:
        return self.spec.dim

    def element(self, X, gamma) -> np.ndarray:
        """blockdiag(exp(diag X), rho(gamma) (I - psi(X) E_{1n}))."""
        s, n = self.spec.s, self.spec.n
        X = np.asarray(X, dtype=float).reshape(-1)
        if X.size != s:
            raise ValueError(f"X must have length {s}")
        g = to_float(gamma)
        Phi = np.eye(n)
        Phi[0, n - 1] = -float(self.spec.psi @ X) if s else 0.0
        M = np.zeros((s + n, s + n))
        M[:s, :s] = np.diag(np.exp(X))
        M[s:, s:] = g @ Phi
        return M


def build_genrep(spec: GenCuspSpec) -> GenRepGroup:
    return GenRepGroup(spec)


def chart_vector(spec: GenCuspSpec, U, V, t) -> np.ndarray:
    """Homogeneous vector (U, t, V, 1) of the chart point (U, V, t)."""
    return np.concatenate([np.asarray(U, float).reshape(-1), [float(t)], np.asarray(V, float).reshape(-1), [1.0]])


def chart_point(spec: GenCuspSpec, w) -> tuple[np.ndarray, np.ndarray, float]:
    w = np.asarray(w, dtype=float)
    if w[-1] == 0:
        raise ValueError("point on the hyperplane at infinity")
    w = w / w[-1]
    s = spec.s
    return w[:s], w[s + 1:-1], float(w[s])


def _check_point(spec: GenCuspSpec, U, V):
    U = np.asarray(U, dtype=float).reshape(-1)
    V = np.asarray(V, dtype=float).reshape(-1)
    if U.size != spec.s or V.size != spec.n - 2:
        raise ValueError("wrong coordinate sizes")
    if np.any(U <= 0):
        raise ValueError("U must be componentwise positive")
    if not spec.phi.in_domain(V):
        raise ValueError("V outside the domain of phi")
    return U, V


def horofunction_eval(spec: GenCuspSpec, U, V, t) -> float:
    """phi(V) - sum psi_i log U_i - t."""
    U, V = _check_point(spec, U, V)
    return spec.phi.value(V) - float(spec.psi @ np.log(U)) - float(t)


def horosphere_hessian(spec: GenCuspSpec, U, V) -> np.ndarray:
    U, V = _check_point(spec, U, V)
    s = spec.s
    m = V.size
    Hs = np.zeros((s + m, s + m))
    Hs[:s, :s] = np.diag(spec.psi / U ** 2)
    Hs[s:, s:] = spec.phi.hessian(V)
    return Hs


def horosphere_hessian_check(spec: GenCuspSpec, U, V) -> float:
    """Minimum eigenvalue of the Hessian of phi(V) - sum psi_i log U_i."""
    if np.any(spec.psi <= 0):
        raise ValueError("psi must be strictly positive")
    H = horosphere_hessian(spec, U, V)
    return float(np.linalg.eigvalsh(H).min()) if H.size else math.inf


def domain_membership(spec: GenCuspSpec, U, V, t) -> bool:
    return horofunction_eval(spec, U, V, t) < 0


@dataclass
class BoundarySimplex:
    vertices: list[ProjPoint]
    c1: bool


def boundary_simplex(spec: GenCuspSpec) -> BoundarySimplex:
    """Vertices [e_1], ..., [e_{s+1}] of the parabolic face."""
    N = spec.dim
    verts = [ProjPoint(np.eye(N)[i]) for i in range(spec.s + 1)]
    return BoundarySimplex(verts, bool(spec.phi.full_domain))


def genrep_invariance_residuals(spec: GenCuspSpec, count: int, rng: np.random.Generator,
                                radius: int = 3) -> np.ndarray:
    """|h(g q) - h(q)| for random X on a rational grid, gamma in rho, and q inside the domain."""
    G = build_genrep(spec)
    cf = spec.rho.closed_form
    out = np.empty(count)
    for k in range(count):
        X = rng.integers(-4 * radius, 4 * radius + 1, size=spec.s) / 4.0
        if cf is not None:
            params = rng.integers(-radius, radius + 1, size=len(cf.param_names))
            gamma = cf.element(*[int(p) for p in params])
        else:
            word = rng.choice([i for i in range(-len(spec.rho.generators), len(spec.rho.generators) + 1) if i],
                              size=rng.integers(0, 2 * radius + 1))
            gamma = spec.rho.word_element([int(w) for w in word])
        U = np.exp(rng.normal(size=spec.s))
        V = rng.normal(size=spec.n - 2)
        t = spec.phi.value(V) - float(spec.psi @ np.log(U)) + rng.exponential() + 1e-3
        w = G.element(X, gamma) @ chart_vector(spec, U, V, t)
        U2, V2, t2 = chart_point(spec, w)
        out[k] = abs(horofunction_eval(spec, U2, V2, t2) - horofunction_eval(spec, U, V, t))
    return out


def genrep_homomorphism_residuals(spec: GenCuspSpec, count: int, rng: np.random.Generator,
                                  radius: int = 3) -> np.ndarray:
    """Relative residual of genRep(X+X', gg') - genRep(X,g) genRep(X',g')."""
    G = build_genrep(spec)
    cf = spec.rho.closed_form
    if cf is None:
        raise ValueError("homomorphism sampling needs a closed-form rho")
    out = np.empty(count)
    p = len(cf.param_names)
    for k in range(count):
        X1, X2 = rng.normal(size=spec.s), rng.normal(size=spec.s)
        a = rng.integers(-radius, radius + 1, size=p)
        b = rng.integers(-radius, radius + 1, size=p)
        g1, g2 = cf.element(*map(int, a)), cf.element(*map(int, b))
        g12 = matmul(g1, g2)
        lhs = G.element(X1 + X2, g12)
        rhs = G.element(X1, g1) @ G.element(X2, g2)
        out[k] = np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max())
    return out


# ---------------------------------------------------------------- orbit hulls


def seed_ball(center, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    d = rng.normal(size=(count, c.size))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(count, 1)) ** (1.0 / c.size)
    return c + r * d


@dataclass
class OrbitDomainReport:
    domain: PolyDomain
    chart: Chart
    vertex_invariance: float
    far_distance_max: float
    far_distance_mean: float
    fixed_point: np.ndarray | None
    orbit_size: int

    def to_json(self) -> dict:
        return {"vertex_invariance": self.vertex_invariance,
                "far_distance_max": self.far_distance_max,
                "far_distance_mean": self.far_distance_mean,
                "fixed_point": None if self.fixed_point is None else self.fixed_point.tolist(),
                "orbit_size": self.orbit_size,
                "hull_vertices": len(self.domain.vertices)}


def construct_invariant_orbit_domain(G: MatrixGroup, seeds, L: int, alpha,
                                     samples=None) -> OrbitDomainReport:
    """Convex hull of the orbit of the seeds in the affine chart alpha != 0.

    ``alpha`` is the covector of a positive matrix coefficient witness
    (alpha(gamma s) > 0 keeps every orbit point in one half-space).
    """
    samples = enumerate_words(G, L) if samples is None else samples
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    alpha = np.asarray(alpha, dtype=float)
    mats = np.array([to_float(s.element) for s in samples])
    pts = np.einsum("nij,kj->nki", mats, seeds)  # (N, seeds, dim)
    vals = pts @ alpha
    if np.any(vals <= 0):
        bad = np.argwhere(vals <= 0)[0]
        raise OrbitError(f"orbit point with alpha <= 0: sample {bad[0]}, seed {bad[1]}, "
                         f"value {vals[tuple(bad)]:.3g}")
    chart = Chart(alpha)
    flat = pts.reshape(-1, pts.shape[-1])
    chart_pts = np.array([chart.to_chart(X) for X in flat])
    D = convex_hull_in_chart(chart_pts)
    D.chart = chart
    # generator images of hull vertices
    gens = [to_float(g) for _, g in G.signed_generators()]
    tol = 1e-9 * max(1.0, float(np.abs(chart_pts).max()))
    inside = []
    for v in D.vertices:
        X = chart.lift(v)
        for g in gens:
            Y = g @ X
            if Y @ alpha <= 0:
                inside.append(False)
                continue
            y = chart.to_chart(Y)
            inside.append(bool(np.all(D.A @ y <= D.b + tol)))
    frac = float(np.mean(inside)) if inside else 1.0
    # far orbit versus the fixed point
    fp = fixed_pair(G)
    xi = None
    far_max = far_mean = float("nan")
    if fp is not None and hasattr(fp, "p_vec"):
        p = to_float(fp.p_vec)
        if abs(p @ alpha) > 1e-12:
            xi = chart.to_chart(p if p @ alpha > 0 else -p)
            norms = np.array([inf_norm(m) for m in mats])
            cut = np.quantile(norms, 0.9)
            far = norms >= cut
            d = np.linalg.norm(chart_pts.reshape(len(samples), len(seeds), -1)[far] - xi, axis=-1)
            far_max, far_mean = float(d.max()), float(d.mean())
    return OrbitDomainReport(D, chart, frac, far_max, far_mean, xi, len(flat))


# ---------------------------------------------------------------- solvable example


def _grid_tables(R: int):
    lam = {n: LAMBDA ** n for n in range(-2 * R, 2 * R + 1)}
    q = {(a, b): QuadSqrt2(a, b) for a in range(-R, R + 1) for b in range(-R, R + 1)}
    return lam, q


def solvable_polynomial(a: int, b: int, n: int, m: int):
    """lambda^{2n} + lambda^{-2n} + 1 + (a + b sqrt2)^2 + (a - b sqrt2)^2 + m^2 (exact)."""
    q = QuadSqrt2(a, b)
    return LAMBDA ** (2 * n) + LAMBDA ** (-2 * n) + 1 + q * q + q.conjugate() * q.conjugate() + m * m


def solvable_cusp_check(radius: int = 8) -> dict:
    """Exact positivity and half-bounds for the 7x7 example, fixed pair and dominating pattern."""
    from .coefficients import domination_analysis
    from .gallery import solvable_7x7, solvable_7x7_element

    R = radius
    lam, qs = _grid_tables(R)
    pos = bound_plus = bound_minus = True
    count = 0
    worst = None
    for (a, b), q in qs.items():
        qc = q.conjugate()
        q2 = q * q + qc * qc
        for n in range(-R, R + 1):
            base = lam[2 * n] + lam[-2 * n] + 1 + q2
            up = lam[n] * q
            down = lam[-n] * qc
            for m in range(-R, R + 1):
                P = base + m * m
                count += 1
                if P.sign() <= 0:
                    pos = False
                    worst = worst or (a, b, n, m)
                half = P * QuadSqrt2(Fraction(1, 2))
                if (half - up).sign() < 0 or (half + up).sign() < 0:
                    bound_plus = False
                    worst = worst or (a, b, n, m)
                if (half - down).sign() < 0 or (half + down).sign() < 0:
                    bound_minus = False
                    worst = worst or (a, b, n, m)
    # witness alpha = (1,1,1,0,0,0,0), x = (1,1,1,0,0,0,1) reproduces P
    alpha = [1, 1, 1, 0, 0, 0, 0]
    x = [1, 1, 1, 0, 0, 0, 1]
    witness_ok = True
    for params in [(0, 0, 0, 0), (1, 0, 0, 0), (1, -2, 3, -1), (-R, R, -R, R)]:
        M = solvable_7x7_element(*params)
        val = sum(alpha[i] * M[i, j] * x[j] for i in range(7) for j in range(7))
        witness_ok &= bool(val == solvable_polynomial(*params))
    G = solvable_7x7()
    fp = fixed_pair(G)
    e3 = exact_matrix([0, 0, 1, 0, 0, 0, 0])
    e7 = exact_matrix([0, 0, 0, 0, 0, 0, 1])
    pair_ok = (fp is not None and hasattr(fp, "p")
               and fp.p == ProjPoint(e3) and fp.phi == ProjHyperplane(e7)
               and fp.residuals == (0.0, 0.0))
    # domination on a float grid
    rep = domination_analysis(_solvable_float_grid(R))
    allowed = {(i, j) for i in (1, 2) for j in range(1, 8)} | {(3, 7)}
    dom = rep.dominating
    return {
        "grid_radius": R,
        "grid_points": count,
        "P_positive": pos,
        "half_bound_plus": bound_plus,
        "half_bound_minus": bound_minus,
        "first_failure": worst,
        "witness_reproduces_P": witness_ok,
        "fixed_pair_ok": bool(pair_ok),
        "fixed_pair": None if fp is None or not hasattr(fp, "p") else
        {"p": fp.p.as_float().tolist(), "phi": fp.phi.as_float().tolist()},
        "dominating": sorted(map(list, dom)),
        "dominating_allowed": dom <= allowed,
    }


def _solvable_float_grid(R: int) -> np.ndarray:
    lam = float(LAMBDA)
    s2 = math.sqrt(2.0)
    rng = np.arange(-R, R + 1, dtype=float)
    a, b, n, m = (v.ravel() for v in np.meshgrid(rng, rng, rng, rng, indexing="ij"))
    q, qc = a + b * s2, a - b * s2
    L, Li = lam ** n, lam ** (-n)
    G = np.zeros((a.size, 7, 7))
    G[:, 0, 0] = L * L
    G[:, 0, 4] = L * q
    G[:, 0, 6] = q * q
    G[:, 1, 1] = Li * Li
    G[:, 1, 5] = Li * qc
    G[:, 1, 6] = qc * qc
    G[:, 2, 2] = 1
    G[:, 2, 3] = m
    G[:, 2, 6] = m * m
    G[:, 3, 3] = 1
    G[:, 3, 6] = 2 * m
    G[:, 4, 4] = L
    G[:, 4, 6] = 2 * q
    G[:, 5, 5] = Li
    G[:, 5, 6] = 2 * qc
    G[:, 6, 6] = 1
    return G
