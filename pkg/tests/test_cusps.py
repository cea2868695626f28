from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcert.cusps import (
    FlagNotFixedError, GenCuspSpec, HoroFlow, OrbitError, boundary_simplex, build_genrep,
    construct_invariant_orbit_domain, domain_membership, flow_commutation_check, horoflow_matrix,
    horofunction_eval, horosphere_hessian_check, horosphere_time, horosphere_weight,
    genrep_homomorphism_residuals, genrep_invariance_residuals, is_normal_form, seed_ball,
    solvable_cusp_check, solvable_polynomial,
)
from cuspcert.domains import GraphDomain, quadratic_phi
from cuspcert.gallery import cyclic_group, hyperbolic_cusp_translations, jordan_unipotent
from cuspcert.numeric import QuadSqrt2, exact_matrix, matmul
from cuspcert.projective import ProjPoint

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=50)


@pytest.fixture(scope="module")
def hf4():
    return HoroFlow.from_vectors(exact_matrix([1, 0, 0, 0]), exact_matrix([0, 0, 0, 1]))


@pytest.fixture(scope="module")
def spec():
    return GenCuspSpec(2, [1.0, 0.5], hyperbolic_cusp_translations(4))


@settings(max_examples=60, deadline=None)
@given(fractions, fractions)
def test_flow_is_a_one_parameter_group_exactly(s, t):
    hf = HoroFlow.from_vectors(exact_matrix([1, 0, 0, 0]), exact_matrix([0, 0, 0, 1]))
    lhs = matmul(horoflow_matrix(hf, s), horoflow_matrix(hf, t))
    assert (lhs == horoflow_matrix(hf, s + t)).all()


def test_flow_in_a_skew_basis_is_exact():
    hf = HoroFlow.from_vectors(exact_matrix([1, 1, 0]), exact_matrix([1, -1, 2]))
    P = horoflow_matrix(hf, Fraction(3, 7))
    assert (matmul(P, exact_matrix([1, 1, 0])) == exact_matrix([1, 1, 0])).all()
    assert (matmul(horoflow_matrix(hf, Fraction(-3, 7)), P) == exact_matrix(np.eye(3, dtype=int))).all()
    with pytest.raises(ValueError):
        HoroFlow.from_vectors(exact_matrix([1, 0, 0]), exact_matrix([1, 0, 0]))


def test_horosphere_weight_and_commutation(hf4):
    assert horosphere_weight(exact_matrix(np.diag([16, 4, 4, 1])), hf4) == 16
    g = hyperbolic_cusp_translations(4).generators[0][1]
    assert horosphere_weight(g, hf4) == 1
    assert flow_commutation_check(g, hf4)
    assert not flow_commutation_check(exact_matrix(np.diag([2, 1, 1, 1])), hf4)
    with pytest.raises(FlagNotFixedError):
        horosphere_weight(exact_matrix([[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]]), hf4)


def test_hyperbolic_rescales_horospheres(hf4):
    D = GraphDomain(quadratic_phi(), 3)
    g = np.diag([16.0, 4.0, 4.0, 1.0])
    rng = np.random.default_rng(1)
    for _ in range(200):
        V = rng.normal(size=2)
        t = rng.exponential() + 1e-2
        y = np.array([0.5 * V @ V + t, *V])
        assert horosphere_time(D, y, hf4) == pytest.approx(t, rel=1e-9)
        z = D.to_chart(g @ D.lift(y))
        assert abs(horosphere_time(D, z, hf4) - 16 * t) <= 1e-8 * max(1.0, 16 * t)


def test_normal_form_and_spec_validation():
    assert is_normal_form(exact_matrix([[1, 2, 3], [0, 4, 5], [0, 0, 1]]))
    assert not is_normal_form(exact_matrix([[2, 0, 0], [0, 1, 0], [0, 0, 1]]))
    G = hyperbolic_cusp_translations(4)
    with pytest.raises(ValueError):
        GenCuspSpec(2, [1.0, -1.0], G)
    with pytest.raises(ValueError):
        GenCuspSpec(2, [1.0], G)
    with pytest.raises(ValueError):
        GenCuspSpec(0, [], cyclic_group(np.diag([2.0, 1.0, 1.0])))


def test_genrep_residuals(spec):
    rng = np.random.default_rng(0)
    assert genrep_invariance_residuals(spec, 1000, rng).max() <= 1e-9
    assert genrep_homomorphism_residuals(spec, 1000, rng).max() <= 1e-10


def test_genrep_element_block_structure(spec):
    M = build_genrep(spec).element([0.5, -1.0], hyperbolic_cusp_translations(4).closed_form.element(1, 2))
    assert np.allclose(M[:2, :2], np.diag(np.exp([0.5, -1.0])))
    assert np.allclose(M[:2, 2:], 0) and np.allclose(M[2:, :2], 0)
    with pytest.raises(ValueError):
        build_genrep(spec).element([1.0], np.eye(4))


def test_horofunction_examples(spec):
    assert horofunction_eval(spec, [1.0, 1.0], [1.0, 2.0], 0.0) == pytest.approx(2.5)
    assert horofunction_eval(spec, [np.e, 1.0], [0.0, 0.0], -1.0) == pytest.approx(0.0, abs=1e-15)
    assert domain_membership(spec, [1.0, 1.0], [0.0, 0.0], 0.1)
    assert not domain_membership(spec, [1.0, 1.0], [1.0, 0.0], 0.1)
    with pytest.raises(ValueError):
        horofunction_eval(spec, [-1.0, 1.0], [0.0, 0.0], 0.0)


def test_hessian_examples(spec):
    # psi_i / U_i^2 on the U block and the identity on the V block
    assert horosphere_hessian_check(spec, np.array([1.0, 1.0]), np.zeros(2)) == pytest.approx(0.5)
    assert horosphere_hessian_check(spec, np.array([2.0, 1.0]), np.zeros(2)) == pytest.approx(0.25)
    rng = np.random.default_rng(2)
    vals = [horosphere_hessian_check(spec, np.exp(rng.normal(size=2)), rng.normal(size=2)) for _ in range(1000)]
    assert min(vals) > 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_sublevel_sets_nest(seed):
    rng = np.random.default_rng(seed)
    spec = GenCuspSpec(1, [2.0], hyperbolic_cusp_translations(3))
    U, V = np.exp(rng.normal(size=1)), rng.normal(size=1)
    t = rng.normal() * 3
    if domain_membership(spec, U, V, t):
        assert domain_membership(spec, U, V, t + abs(rng.normal()))


def test_boundary_simplex(spec):
    S = boundary_simplex(spec)
    assert S.c1
    assert S.vertices == [ProjPoint(np.eye(6)[i]) for i in range(3)]
    S0 = boundary_simplex(GenCuspSpec(0, [], hyperbolic_cusp_translations(4)))
    assert len(S0.vertices) == 1


def test_orbit_hull_hyperbolic_converges_to_fixed_point():
    G = hyperbolic_cusp_translations(3)
    rng = np.random.default_rng(0)
    seeds = seed_ball([1.0, 0.0, 1.0], 0.1, 5, rng)
    far, inv = [], []
    for L in (4, 8, 16):
        r = construct_invariant_orbit_domain(G, seeds, L, [1.0, 0.0, 1.0])
        assert np.allclose(r.fixed_point, [1.0, 0.0])
        far.append(r.far_distance_max)
        inv.append(r.vertex_invariance)
    # only the outermost hull vertices leave under a generator, a shrinking fraction
    assert far[0] > far[1] > far[2]
    assert inv[0] < inv[1] < inv[2] and inv[2] > 0.9


def test_orbit_hull_jordan3():
    rng = np.random.default_rng(0)
    r = construct_invariant_orbit_domain(jordan_unipotent(3), seed_ball([1.0, 0.0, 1.0], 0.1, 5, rng), 30,
                                         [1.0, 0.0, 1.0])
    assert r.far_distance_max < 0.1
    assert r.to_json()["orbit_size"] == 305


def test_orbit_hull_rejects_bad_witness():
    rng = np.random.default_rng(0)
    with pytest.raises(OrbitError):
        construct_invariant_orbit_domain(cyclic_group(np.diag([2.0, 0.5])), seed_ball([1.0, 1.0], 0.1, 3, rng), 5,
                                         [1.0, -1.0])


def test_solvable_polynomial_values():
    assert solvable_polynomial(0, 0, 0, 0) == QuadSqrt2(3)
    assert solvable_polynomial(1, 0, 0, 0) == QuadSqrt2(5)
    assert solvable_polynomial(0, 1, 0, 0) == QuadSqrt2(7)


def test_solvable_cusp_check_radius_3():
    rep = solvable_cusp_check(3)
    assert rep["grid_points"] == 7 ** 4
    for key in ("P_positive", "half_bound_plus", "half_bound_minus", "witness_reproduces_P", "fixed_pair_ok",
                "dominating_allowed"):
        assert rep[key], key
