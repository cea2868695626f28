import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspcert.numeric import (
    FLOAT, LAMBDA, QUAD, RATIONAL, QuadSqrt2, ScalarKindError, det, eigen_moduli, exact_inverse,
    exact_matrix, exact_nullspace, format_scalar, galois_embed, identity, inverse, is_exact, matmul,
    normalize_projective, parse_scalar, svd,
)

SQRT2 = math.sqrt(2.0)
small_frac = st.fractions(min_value=-20, max_value=20, max_denominator=12)
quads = st.builds(QuadSqrt2, small_frac, small_frac)


# ---------------------------------------------------------------- svd


def test_svd_diagonal():
    p = svd(np.diag([4.0, 1.0]))
    assert np.allclose(p.sigmas, [4, 1])
    assert np.allclose(p.ratios, [4])


def test_svd_identity():
    assert np.allclose(svd(np.eye(3)).sigmas, 1)


def test_svd_shear_matches_characteristic_polynomial():
    # sigma^2 solves l^2 - 10002 l + 1 = 0
    top = math.sqrt((10002 + math.sqrt(10002 ** 2 - 4)) / 2)
    p = svd(np.array([[1.0, 100.0], [0.0, 1.0]]))
    assert p.sigmas[0] == pytest.approx(top, rel=1e-12)
    assert p.sigmas[0] == pytest.approx(100.00999900019998, rel=1e-12)
    assert p.sigmas[1] == pytest.approx(1 / top, rel=1e-12)


def test_svd_frames_orthonormal():
    A = np.random.default_rng(0).normal(size=(5, 5))
    p = svd(A)
    assert np.allclose(p.left.T @ p.left, np.eye(5), atol=1e-12)
    assert np.allclose(p.right.T @ p.right, np.eye(5), atol=1e-12)
    assert np.allclose(p.left @ np.diag(p.sigmas) @ p.right.T, A, atol=1e-12)


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[1.0, np.nan], [0, 1]])])
def test_svd_errors(bad):
    with pytest.raises(ValueError):
        svd(bad)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_singular_product_is_det_and_inverse_duality(n, seed):
    A = np.random.default_rng(seed).normal(size=(n, n))
    s = svd(A).sigmas
    assert np.prod(s) == pytest.approx(abs(np.linalg.det(A)), rel=1e-9)
    si = svd(np.linalg.inv(A)).sigmas
    assert np.allclose(si * s[::-1], 1.0, rtol=1e-9)
    assert np.all(np.diff(s) <= 0) and np.all(s > 0)


# ---------------------------------------------------------------- eigen moduli


def test_eigen_moduli_examples():
    c, s = math.cos(1), math.sin(1)
    assert np.allclose(eigen_moduli(np.array([[c, -s], [s, c]])), [1, 1], rtol=1e-9)
    assert np.allclose(eigen_moduli(np.diag([4, 1, 0.25])), [4, 1, 0.25], rtol=1e-9)
    assert np.allclose(eigen_moduli(np.array([[1.0, 1.0], [0.0, 1.0]])), [1, 1], rtol=1e-9)


def test_eigen_moduli_exact_repeated_root():
    # large unipotent Jordan block: floating eigvals would scatter around 1
    J = exact_matrix([[Fraction(1) if j >= i else 0 for j in range(8)] for i in range(8)])
    assert np.allclose(eigen_moduli(J), 1.0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_eigen_moduli_conjugated_jordan_block(k, seed):
    # raw float eigenvalues of a defective block scatter by eps^(1/k)
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(k, k)) + 3 * np.eye(k)
    if np.linalg.cond(h) > 50:
        return
    J = 2.0 * np.eye(k) + np.diag(np.ones(k - 1), 1)
    assert np.allclose(eigen_moduli(h @ J @ np.linalg.inv(h)), 2.0, rtol=1e-9)


def test_eigen_moduli_keeps_close_simple_eigenvalues():
    h = np.array([[2.0, 1.0], [1.0, 1.0]])
    M = h @ np.diag([1.0, 1.0 + 1e-6]) @ np.linalg.inv(h)
    assert np.allclose(eigen_moduli(M), [1.0 + 1e-6, 1.0], rtol=1e-12, atol=0)


def test_eigen_moduli_non_finite():
    with pytest.raises(ValueError):
        eigen_moduli(np.array([[np.inf, 0], [0, 1]]))


# ---------------------------------------------------------------- Q(sqrt 2)


def test_galois_embed_examples():
    assert galois_embed(QuadSqrt2(1, 1), +1) == pytest.approx(2.41421356237, abs=1e-10)
    assert galois_embed(QuadSqrt2(1, 1), -1) == pytest.approx(-0.41421356237, abs=1e-10)
    assert galois_embed(LAMBDA, +1) == pytest.approx(5.82842712474619, rel=1e-14)
    assert LAMBDA == QuadSqrt2(1, 1) ** 2


def test_galois_embed_wrong_kind():
    with pytest.raises(ScalarKindError):
        galois_embed(Fraction(1, 2), 1)


def test_lambda_powers():
    assert LAMBDA ** 2 == QuadSqrt2(17, 12)
    assert LAMBDA ** -2 == QuadSqrt2(17, -12)
    assert LAMBDA * LAMBDA ** -1 == QuadSqrt2(1, 0)


@settings(max_examples=200, deadline=None)
@given(quads, quads, st.sampled_from([1, -1]))
def test_galois_embed_is_ring_homomorphism(p, q, sign):
    e = lambda z: galois_embed(z, sign)
    scale = 1 + abs(e(p)) * abs(e(q)) + abs(e(p)) + abs(e(q))
    assert abs(e(p + q) - (e(p) + e(q))) <= 1e-12 * scale
    assert abs(e(p * q) - e(p) * e(q)) <= 1e-12 * scale
    assert e(p - q) == pytest.approx(e(p) - e(q), abs=1e-12 * scale)


@settings(max_examples=200, deadline=None)
@given(quads, quads)
def test_quad_field_axioms(p, q):
    assert p + q == q + p and p * q == q * p
    if q != 0:
        assert (p / q) * q == p
    assert (p < q) == (float(p) < float(q)) or abs(float(p) - float(q)) < 1e-12


def test_quad_order_is_exact():
    # consecutive convergents 140/99 < sqrt 2 < 99/70, and 577/408 - sqrt 2 ~ 2e-6
    assert QuadSqrt2(Fraction(140, 99), 0) < QuadSqrt2(0, 1) < QuadSqrt2(Fraction(99, 70), 0)
    assert QuadSqrt2(0, 1) < QuadSqrt2(Fraction(577, 408), 0)
    assert QuadSqrt2(Fraction(-577, 408), 1) < 0


# ---------------------------------------------------------------- serialization


@settings(max_examples=100, deadline=None)
@given(small_frac)
def test_rational_roundtrip(x):
    s = format_scalar(x, RATIONAL)
    assert isinstance(s, str)
    assert parse_scalar(s, RATIONAL) == x


@settings(max_examples=100, deadline=None)
@given(quads)
def test_quad_roundtrip(q):
    d = format_scalar(q, QUAD)
    assert set(d) == {"a", "b"}
    assert parse_scalar(d, QUAD) == q


def test_scalar_formats():
    assert format_scalar(Fraction(-3, 6), RATIONAL) == "-1/2"
    assert format_scalar(QuadSqrt2(Fraction(1, 2), 3), QUAD) == {"a": "1/2", "b": "3"}
    assert format_scalar(0.25, FLOAT) == 0.25
    assert parse_scalar("6/4", RATIONAL) == Fraction(3, 2)
    with pytest.raises(ValueError):
        parse_scalar(0.5, RATIONAL)
    with pytest.raises(ValueError):
        parse_scalar(float("nan"), FLOAT)


# ---------------------------------------------------------------- exact linear algebra


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10 ** 6))
def test_exact_inverse(n, seed):
    rng = np.random.default_rng(seed)
    A = exact_matrix(rng.integers(-3, 4, size=(n, n)).tolist())
    if det(A) == 0:
        return
    Ai = exact_inverse(A)
    assert is_exact(Ai)
    assert (matmul(A, Ai) == identity(n, RATIONAL)).all()


def test_exact_nullspace():
    M = exact_matrix([[1, 2, 3], [2, 4, 6]])
    ns = exact_nullspace(M)
    assert len(ns) == 2
    for v in ns:
        assert all(x == 0 for x in matmul(M, v))


def test_quad_inverse_of_gallery_like_matrix():
    M = exact_matrix([[LAMBDA, QuadSqrt2(1, 1)], [0, LAMBDA ** -1]], QUAD)
    assert (matmul(M, inverse(M)) == identity(2, QUAD)).all()


def test_normalize_projective():
    assert np.allclose(normalize_projective([0, -2, 1]), [0, 1, -0.5])
    v = normalize_projective(exact_matrix([[0, -4, 2]])[0])
    assert list(v) == [0, 1, Fraction(-1, 2)]
    with pytest.raises(ValueError):
        normalize_projective([0.0, 0.0])
