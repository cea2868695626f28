"""End-to-end acceptance criteria; the terminal summary prints one line per criterion."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from cuspcert.coefficients import (
    CERTIFIED, REFUTED, cusp_holonomy_verdict, domination_analysis, find_positive_generic_coefficient, sproper_test,
)
from cuspcert.cones import characteristic_function, dual_cone, transform_cone
from cuspcert.cusps import (
    GenCuspSpec, HoroFlow, boundary_simplex, flow_commutation_check, genrep_invariance_residuals,
    horoflow_matrix, horosphere_hessian_check, horosphere_time, horosphere_weight, solvable_cusp_check,
)
from cuspcert.domains import (
    EllipsoidDomain, GraphDomain, PolyDomain, convex_hull_in_chart, hilbert_distance, klein_distance,
    midpoint_convexity_check, quadratic_phi, smooth_domain,
)
from cuspcert.gallery import (
    hyperbolic_cusp_translations, jordan_unipotent, weakly_unipotent_9x9, weakly_unipotent_9x9_element,
)
from cuspcert.groups import divergence_diagnostics, enumerate_words, limit_flags
from cuspcert.numeric import exact_matrix, matmul
from cuspcert.projective import ProjPoint

from oracles import (
    act_chart, disk_automorphism, orientation_hull_vertices, random_disk_point, random_sharp_cone,
)

DISK = EllipsoidDomain(np.eye(2))
SQUARE = PolyDomain([[-1, -1], [1, -1], [1, 1], [-1, 1]])
TRIANGLE = PolyDomain([[0, 0], [1, 0], [0, 1]])


@pytest.fixture(scope="module")
def h4_run():
    G = hyperbolic_cusp_translations(4)
    S = enumerate_words(G, 12)
    return G, S, cusp_holonomy_verdict(G, 12, samples=S)


def test_criterion_01_hilbert_klein_agreement():
    rng = np.random.default_rng(0)
    pairs = [(random_disk_point(rng), random_disk_point(rng)) for _ in range(100)]
    t0 = time.perf_counter()
    errs = [abs(hilbert_distance(DISK, x, y) - klein_distance(x, y)) for x, y in pairs]
    elapsed = time.perf_counter() - t0
    print(f"max error {max(errs):.3g}, runtime {elapsed:.3f} s")
    assert max(errs) <= 1e-6
    assert elapsed < 1.0


def test_criterion_02_projective_invariance():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(50):
        g = disk_automorphism(rng)
        x, y = random_disk_point(rng, 0.5), random_disk_point(rng, 0.5)
        d = hilbert_distance(DISK, x, y)
        worst = max(worst, abs(hilbert_distance(DISK, act_chart(g, x), act_chart(g, y)) - d))
    rot, flip = np.array([[0.0, -1.0], [1.0, 0.0]]), np.diag([1.0, -1.0])
    d4 = [np.linalg.matrix_power(rot, k) @ f for k in range(4) for f in (np.eye(2), flip)]
    for _ in range(50):
        g = d4[rng.integers(8)]
        x, y = rng.uniform(-0.95, 0.95, 2), rng.uniform(-0.95, 0.95, 2)
        worst = max(worst, abs(hilbert_distance(SQUARE, g @ x, g @ y) - hilbert_distance(SQUARE, x, y)))
    print(f"max invariance defect {worst:.3g}")
    assert worst <= 1e-8


def test_criterion_03_duality_involution():
    rng = np.random.default_rng(2)
    for i in range(50):
        C = random_sharp_cone(rng, 2 + i % 4)
        DD = dual_cone(dual_cone(C))
        assert DD.ray_set() == C.ray_set() and DD.facet_set() == C.facet_set()


def test_criterion_04_characteristic_equivariance():
    # f_C(g x) = |det g|^-1 f_{g^-1 C}(x): the level sets move with the cone
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(100):
        n = 2 + i % 3
        C = random_sharp_cone(rng, n, exact=False)
        g = rng.normal(size=(n, n)) + 2 * np.eye(n)
        if abs(np.linalg.det(g)) < 0.1:
            g = g + 2 * np.eye(n)
        rays = np.array(C.rays)
        y = rng.uniform(0.1, 1, size=len(rays)) @ rays
        x = np.linalg.solve(g, y)
        lhs = characteristic_function(C, g @ x)
        rhs = characteristic_function(transform_cone(C, np.linalg.inv(g)), x) / abs(np.linalg.det(g))
        worst = max(worst, abs(lhs - rhs) / lhs)
    print(f"max relative defect {worst:.3g}")
    assert worst <= 1e-9


def test_criterion_05_jordan_criterion():
    t0 = time.perf_counter()
    got = {k: find_positive_generic_coefficient(enumerate_words(jordan_unipotent(k), 50)).status
           for k in (2, 3, 4, 5)}
    elapsed = time.perf_counter() - t0
    print(got, f"runtime {elapsed:.2f} s")
    assert got == {2: REFUTED, 3: CERTIFIED, 4: REFUTED, 5: CERTIFIED}
    assert elapsed < 10.0


def test_criterion_06_round_cusp_certification(h4_run):
    G, S, hv = h4_run
    statuses = {k: hv.verdicts[k].status for k in ("WU", "GP+", "Tr", "TRe")}
    fit = divergence_diagnostics(S).fit_exponent[1]
    flags = limit_flags(S)
    print(statuses, hv.summary, f"fit exponent {fit:.4f}", f"limit flags {flags['status']}",
          flags.get("reason", ""), f"max radius {flags['max_radius']}")
    assert all(s == CERTIFIED for s in statuses.values())
    assert hv.summary == "round_candidate"
    assert 1.8 <= fit <= 2.2
    assert flags["status"] == "ok" and flags["max_radius"] < 1e-3


def test_criterion_07_nine_by_nine():
    G = weakly_unipotent_9x9()
    S = enumerate_words(G, 12)
    hv = cusp_holonomy_verdict(G, 12, samples=S)
    assert hv.verdicts["WU"].status == CERTIFIED
    alpha = np.array([1, 0, 0, 1, 1, 0, 0, 0, 0.0])
    x = np.array([0, 0, 2, 0, 0, 0, 0, 0.5, 0.5])
    ns = np.arange(-1000, 1001)
    vals = np.array([alpha @ weakly_unipotent_9x9_element(int(n)) @ x for n in ns])
    expect = ns ** 2 * (1 + np.cos(ns) / 2)
    rel = np.abs(vals - expect) / np.maximum(np.abs(expect), 1.0)
    assert rel.max() <= 1e-9
    assert vals.min() >= 0 and sproper_test(vals, ns.astype(float) ** 2 + 1) == "s_proper_up"
    tr = hv.verdicts["Tr"]
    dominating = {tuple(e) for e in domination_analysis(S).dominating}
    offending = {tuple(e) for e in tr.certificate["offending"]}
    row1 = {tuple(e) for e in tr.certificate["row1_dominating"]}
    print(hv.summary, sorted(offending), sorted(row1))
    assert tr.status == REFUTED
    assert offending == {(4, 8), (4, 9), (5, 8), (5, 9)}
    assert offending | row1 == dominating
    assert hv.summary == "preserves_domain_candidate"


def test_criterion_08_solvable_seven_by_seven():
    rep = solvable_cusp_check(8)
    print({k: rep[k] for k in ("grid_points", "P_positive", "half_bound_plus", "half_bound_minus",
                               "fixed_pair_ok", "dominating")})
    assert rep["grid_points"] == 17 ** 4
    assert rep["P_positive"] and rep["half_bound_plus"] and rep["half_bound_minus"]
    assert rep["witness_reproduces_P"]
    assert rep["fixed_pair_ok"]
    assert rep["dominating_allowed"]


def test_criterion_09_horofunction_invariance():
    spec = GenCuspSpec(2, [1.0, 0.5], hyperbolic_cusp_translations(4))
    rng = np.random.default_rng(9)
    res = genrep_invariance_residuals(spec, 1000, rng)
    hess = [horosphere_hessian_check(spec, np.exp(rng.normal(size=2)), rng.normal(size=2)) for _ in range(1000)]
    S = boundary_simplex(spec)
    print(f"max residual {res.max():.3g}, min Hessian eigenvalue {min(hess):.3g}")
    assert res.max() <= 1e-9
    assert min(hess) > 0
    assert S.vertices == [ProjPoint(np.eye(6)[i]) for i in range(3)] and S.c1


def test_criterion_10_flow_algebra():
    hf = HoroFlow.from_vectors(exact_matrix([1, 0, 0, 0]), exact_matrix([0, 0, 0, 1]))
    rng = np.random.default_rng(10)
    for _ in range(50):
        s, t = (Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 20))) for _ in range(2))
        assert (matmul(horoflow_matrix(hf, s), horoflow_matrix(hf, t)) == horoflow_matrix(hf, s + t)).all()
    parabolic = hyperbolic_cusp_translations(4).closed_form.element(2, -3)
    assert horosphere_weight(parabolic, hf) == 1 and flow_commutation_check(parabolic, hf)
    # The unit ball b^2 + |V|^2 < 1 seen in the chart complementary to the tangent
    # hyperplane at (1, 0, 0) is the paraboloid t > |V|^2 / 2.
    D = GraphDomain(quadratic_phi(), 3)
    g = np.diag([16.0, 4.0, 4.0, 1.0])
    assert horosphere_weight(g, hf) == 16
    worst = 0.0
    count = 0
    while count < 500:
        u = rng.uniform(-1, 1, 3)
        if u @ u >= 0.98:
            continue
        b, V = u[0], u[1:]
        X = np.array([(1 + b) / math.sqrt(2), *V, (1 - b) / math.sqrt(2)])
        y = X[:-1] / X[-1]
        assert D.contains(y)
        t = horosphere_time(D, y, hf)
        z = D.to_chart(g @ D.lift(y))
        worst = max(worst, abs(horosphere_time(D, z, hf) - 16 * t) / max(1.0, 16 * t))
        count += 1
    print(f"max relative level defect {worst:.3g}")
    assert worst <= 1e-8


def test_criterion_11_smoothing():
    S = smooth_domain(TRIANGLE, [1.0, 1.0, 0.0], 5.0)
    bnd = S.sample_boundary(1000, 11)
    res = midpoint_convexity_check(S, bnd, np.random.default_rng(11), chords=1000)
    far = np.linalg.norm(bnd, axis=1) > 1e-6
    touching = [y for y in bnd[far] if TRIANGLE.slack(y) <= 0]
    print(res, f"touch points away from the vertex: {len(touching)}")
    assert res["failures"] == 0
    assert not touching


def test_criterion_12_hull_oracle_equivalence():
    rng = np.random.default_rng(12)
    for _ in range(100):
        P = np.array([random_disk_point(rng, 1.0) for _ in range(int(rng.integers(3, 40)))])
        D = convex_hull_in_chart(P)
        ours = {int(np.argmin(np.linalg.norm(P - v, axis=1))) for v in D.vertices}
        assert ours == orientation_hull_vertices(P)
