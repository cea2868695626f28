import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcert.coefficients import (
    CERTIFIED, CONDITIONS, INCONCLUSIVE, REFUTED, CoefficientWitness, as_float_stack, ConditionVerdict, check_condition_Tr,
    check_condition_TRe, cusp_holonomy_verdict, domination_analysis, dyadic_buckets,
    find_positive_generic_coefficient, sproper_test, summarize, validate_witness,
)
from cuspcert.gallery import cyclic_group, hyperbolic_cusp_translations, jordan_unipotent, weakly_unipotent_9x9
from cuspcert.groups import MatrixGroup, enumerate_words
from cuspcert.numeric import RATIONAL


@pytest.fixture(scope="module")
def j3_samples():
    return enumerate_words(jordan_unipotent(3), 60)


def test_dyadic_buckets():
    assert dyadic_buckets(np.array([1.0, 1.9, 2.0, 1024.0, 0.5])).tolist() == [0, 0, 1, 10, -10 ** 9]


def test_domination_jordan3(j3_samples):
    rep = domination_analysis(j3_samples)
    assert rep.dominating == {(1, 3)}
    assert {(1, 2), (2, 3), (1, 1)} <= rep.dominated
    assert len(rep.buckets) == 3


def test_domination_diagonal():
    rep = domination_analysis(enumerate_words(cyclic_group(np.diag([2.0, 0.5])), 40))
    assert rep.dominating == {(1, 1), (2, 2)}
    assert rep.dominated == {(1, 2), (2, 1)}


def test_domination_9x9():
    rep = domination_analysis(enumerate_words(weakly_unipotent_9x9(), 1000))
    assert rep.dominating == {(1, 3), (4, 8), (4, 9), (5, 8), (5, 9)}


def test_domination_too_few_buckets_is_indeterminate():
    rep = domination_analysis(enumerate_words(jordan_unipotent(2), 2))
    assert rep.dominating == set() and rep.indeterminate


def test_sproper_examples():
    n = np.arange(1, 200, dtype=float)
    assert sproper_test(n ** 2, n) == "s_proper_up"
    assert sproper_test(-n, n) == "s_proper_down"
    assert sproper_test(n * np.cos(n), n) == "not_s_proper"
    assert sproper_test(np.ones(3), np.ones(3)) == INCONCLUSIVE


def test_validate_witness_replays_values(j3_samples):
    # alpha(J3^n x) = n^2 / 2 + 1, positive with quadratic growth
    alpha, x = np.array([1.0, 0, 0]), np.array([1.0, 0, 1.0])
    v = validate_witness(alpha, x, j3_samples)
    G = as_float_stack(j3_samples)
    assert np.allclose(v["values"], G[:, 0, 2] + 1)
    assert not validate_witness(alpha, np.array([0, 0, 1.0]), j3_samples)["valid"]
    assert v["valid"] and v["epsilon"] > 0.9


def test_gp_plus_jordan3_certified(j3_samples):
    v = find_positive_generic_coefficient(j3_samples)
    assert v.status == CERTIFIED
    w = CoefficientWitness.from_json(v.certificate["witness"])
    replay = validate_witness(w.alpha, w.x, j3_samples)
    assert replay["valid"]
    assert replay["delta"] == pytest.approx(w.delta, rel=1e-9, abs=1e-12)
    assert replay["epsilon"] == pytest.approx(w.epsilon, rel=1e-9)


def test_gp_plus_jordan2_refuted():
    v = find_positive_generic_coefficient(enumerate_words(jordan_unipotent(2), 50))
    assert v.status == REFUTED
    assert v.certificate["infeasible"]


def test_gp_plus_refutation_persists_with_more_samples():
    for L in (50, 80):
        assert find_positive_generic_coefficient(enumerate_words(jordan_unipotent(4), L)).status == REFUTED


def test_gp_plus_inconclusive_on_tiny_sample():
    v = find_positive_generic_coefficient(enumerate_words(jordan_unipotent(3), 2))
    assert v.status == INCONCLUSIVE


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([3, 4]))
def test_gp_plus_verdict_ignores_sample_order(seed, k):
    S = enumerate_words(jordan_unipotent(k), 40)
    perm = np.random.default_rng(seed).permutation(len(S))
    S2 = [S[i] for i in perm]
    assert find_positive_generic_coefficient(S2).status == find_positive_generic_coefficient(S).status


def test_tr_tre_round_group():
    G = hyperbolic_cusp_translations(4)
    S = enumerate_words(G, 12)
    tr, tre = check_condition_Tr(G, S), check_condition_TRe(G, S)
    assert tr.status == CERTIFIED and tre.status == CERTIFIED
    assert tre.certificate["dominating"] == [[1, 4]]
    assert tre.certificate["corner_signs"] == [1]


def test_tr_refuted_9x9_offending_entries():
    G = weakly_unipotent_9x9()
    tr = check_condition_Tr(G, enumerate_words(G, 1000))
    assert tr.status == REFUTED
    assert {tuple(e) for e in tr.certificate["offending"]} == {(4, 8), (4, 9), (5, 8), (5, 9)}
    assert tr.certificate["row1_dominating"] == [[1, 3]]


def test_tr_without_fixed_pair_exact_group_refuted():
    # the rotation by a quarter turn fixes no point of the projective line
    G = MatrixGroup(2, [("r", np.array([[0, -1], [1, 0]], dtype=object))], RATIONAL)
    S = enumerate_words(G, 4)
    assert check_condition_Tr(G, S).status == REFUTED
    assert check_condition_TRe(G, S).status == REFUTED


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_tr_tre_invariant_under_conjugation(seed):
    rng = np.random.default_rng(seed)
    G = hyperbolic_cusp_translations(3)
    # conjugate by a triangular map fixing e1 and the hyperplane e3^* = 0
    T = np.eye(3) + np.triu(rng.integers(-2, 3, size=(3, 3)), 1)
    Ti = np.linalg.inv(T)
    H = MatrixGroup(3, [(n, T @ np.asarray(g, float) @ Ti) for n, g in G.generators])
    # small words still carry linear entries comparable to the quadratic corner
    S = enumerate_words(H, 40)
    assert check_condition_Tr(H, S).status == CERTIFIED
    assert check_condition_TRe(H, S).status == CERTIFIED


def _v(cond, st_):
    return ConditionVerdict(cond, st_)


@pytest.mark.parametrize("statuses,expected", [
    ({"WU": REFUTED, "GP": CERTIFIED, "GP+": CERTIFIED, "Tr": CERTIFIED, "TRe": CERTIFIED}, "none"),
    ({"WU": CERTIFIED, "GP": CERTIFIED, "GP+": CERTIFIED, "Tr": CERTIFIED, "TRe": CERTIFIED}, "round_candidate"),
    ({"WU": CERTIFIED, "GP": CERTIFIED, "GP+": CERTIFIED, "Tr": CERTIFIED, "TRe": REFUTED},
     "strictly_convex_candidate"),
    ({"WU": CERTIFIED, "GP": CERTIFIED, "GP+": CERTIFIED, "Tr": REFUTED, "TRe": REFUTED},
     "preserves_domain_candidate"),
    ({"WU": INCONCLUSIVE, "GP": CERTIFIED, "GP+": CERTIFIED, "Tr": REFUTED, "TRe": REFUTED}, "none"),
    ({"WU": CERTIFIED, "GP": REFUTED, "GP+": REFUTED, "Tr": REFUTED, "TRe": REFUTED}, "none"),
])
def test_summary_rules(statuses, expected):
    assert summarize({k: _v(k, s) for k, s in statuses.items()}) == expected


def test_verdict_validation_and_json_round_trip():
    with pytest.raises(ValueError):
        ConditionVerdict("XX", CERTIFIED)
    with pytest.raises(ValueError):
        ConditionVerdict("WU", "maybe")
    hv = cusp_holonomy_verdict(jordan_unipotent(3), 20)
    assert set(hv.verdicts) == set(CONDITIONS)
    for v in hv.verdicts.values():
        d = json.loads(json.dumps(v.to_json(), allow_nan=False))
        back = ConditionVerdict.from_json(d)
        assert back.to_json() == d
