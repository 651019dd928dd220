import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectriple.linalg import (
    DimensionError,
    adjoint,
    contains,
    full_space,
    hs_inner,
    kron,
    least_squares,
    nullspace,
    orthonormalize,
    project,
    quotient_space,
    span,
    span_vectors,
    vec,
)

RNG = np.random.default_rng(20250810)


def _rand(n, m=None):
    m = m or n
    return RNG.standard_normal((n, m)) + 1j * RNG.standard_normal((n, m))


def _unit(i, shape):
    e = np.zeros(shape, dtype=complex)
    e[np.unravel_index(i, shape)] = 1.0
    return e


def test_hs_inner_identity():
    assert hs_inner(np.eye(2), np.eye(2)) == pytest.approx(2.0)


def test_hs_inner_matrix_units_orthogonal():
    e12 = np.array([[0, 1], [0, 0]], dtype=complex)
    e21 = np.array([[0, 0], [1, 0]], dtype=complex)
    assert hs_inner(e12, e21) == pytest.approx(0.0)


def test_hs_inner_eta_phi2():
    # eta of the two-point triple with phi = [[2]], by direct 2x2 arithmetic
    eta = np.array([[0, -2], [2, 0]], dtype=complex)
    assert hs_inner(eta, eta) == pytest.approx(8.0)


def test_hs_inner_conjugate_symmetric():
    a, b = _rand(3), _rand(3)
    assert hs_inner(a, b) == pytest.approx(np.conj(hs_inner(b, a)))
    assert hs_inner(a, a).real > 0
    assert hs_inner(a, a).imag == pytest.approx(0.0)


def test_hs_inner_shape_mismatch():
    with pytest.raises(DimensionError):
        hs_inner(np.eye(2), np.eye(3))


def test_span_collinear():
    s = span([np.eye(2), 2 * np.eye(2)])
    assert s.dim == 1


def test_span_empty():
    assert span([]).dim == 0


def test_span_dependent_units():
    e11 = _unit(0, (2, 2))
    e12 = _unit(1, (2, 2))
    s = span([e11, e12, e11 + e12])
    assert s.dim == 2


def test_span_gram_identity():
    mats = [_rand(3) for _ in range(5)] + [_rand(3) * 1e-3]
    s = span(mats)
    gram = s.basis.conj() @ s.basis.T
    assert np.max(np.abs(gram - np.eye(s.dim))) < 1e-12


def test_span_order_insensitive_as_set():
    mats = [_rand(2) for _ in range(4)]
    s1 = span(mats)
    s2 = span(mats[::-1])
    ok12, _ = contains(s1, s2, 1e-9)
    ok21, _ = contains(s2, s1, 1e-9)
    assert ok12 and ok21


def test_project_zero_subspace():
    s = span_vectors([], ambient_dim=3)
    v = np.array([1.0, 2.0, 3.0])
    assert np.allclose(project(s, v), 0)


def test_project_fixes_basis_vectors():
    s = span([_rand(2) for _ in range(2)])
    for b in s.basis:
        assert np.allclose(project(s, b), b, atol=1e-12)


def test_project_coordinate():
    s = span_vectors([[1.0, 0.0]])
    assert np.allclose(project(s, [1.0, 1.0]), [1.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_project_idempotent(seed):
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((2, 9)) + 1j * rng.standard_normal((2, 9))
    s = span_vectors(list(vecs))
    v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    pv = s.project(v)
    assert np.linalg.norm(s.project(pv) - pv) <= 1e-10 * (1 + np.linalg.norm(v))


def test_contains_trivial_cases():
    s = span([_rand(2) for _ in range(2)])
    zero = span_vectors([], ambient_dim=4)
    ok, res = contains(s, zero, 1e-10)
    assert ok and res == 0.0
    ok, _ = contains(s, s, 1e-10)
    assert ok


def test_contains_negative():
    e1 = span_vectors([[1.0, 0.0]])
    e2 = span_vectors([[0.0, 1.0]])
    ok, res = contains(e1, e2, 1e-10)
    assert not ok
    assert res == pytest.approx(1.0)


def test_nullspace_identity():
    assert nullspace(np.eye(4)).dim == 0


def test_nullspace_zero_map():
    assert nullspace(np.zeros((2, 3))).dim == 3


def test_nullspace_row():
    ns = nullspace(np.array([[1.0, 1.0]]))
    assert ns.dim == 1
    expected = np.array([1.0, -1.0]) / np.sqrt(2)
    b = ns.basis[0]
    phase = b[0] / expected[0]
    assert np.allclose(b, phase * expected)


def test_least_squares_identity():
    b = np.array([1.0, 2.0j, 3.0])
    x, nullity, res = least_squares(np.eye(3), b)
    assert np.allclose(x, b)
    assert nullity == 0 and res < 1e-12


def test_least_squares_zero_map():
    x, nullity, res = least_squares(np.zeros((2, 2)), np.zeros(2))
    assert np.allclose(x, 0) and nullity == 2 and res == pytest.approx(0.0)


def test_least_squares_rank_deficient():
    l_map = np.array([[1.0, 0.0], [0.0, 0.0]])
    x, nullity, res = least_squares(l_map, np.array([1.0, 0.0]))
    assert np.allclose(x, [1.0, 0.0])
    assert nullity == 1 and res < 1e-12


def test_least_squares_consistent_has_zero_residual():
    l_map = _rand(5, 3)
    x0 = RNG.standard_normal(3) + 1j * RNG.standard_normal(3)
    b = l_map @ x0
    x, _, res = least_squares(l_map, b)
    assert res <= 1e-10 * (1 + np.linalg.norm(b))
    assert np.allclose(l_map @ x, b)


def test_kron_identities():
    assert np.allclose(kron(np.eye(2), np.eye(3)), np.eye(6))
    d = np.diag([1.0, -1.0])
    dphi = np.array([[0, 2], [2, 0]], dtype=complex)
    k = kron(d, dphi)
    assert np.allclose(k[:2, :2], dphi)
    assert np.allclose(k[2:, 2:], -dphi)


def test_kron_trace_multiplicative():
    for _ in range(5):
        a, b = _rand(4), _rand(4)
        lhs = np.trace(kron(a, b))
        rhs = np.trace(a) * np.trace(b)
        assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


def test_kron_mixed_product():
    a, b, c, d = _rand(2), _rand(3), _rand(2), _rand(3)
    assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d))


def test_adjoint_involution():
    m = _rand(4)
    assert np.array_equal(adjoint(adjoint(m)), m)


def test_orthonormalize_drops_dependent():
    v = np.array([1.0, 1.0, 0.0])
    basis = orthonormalize([v, 2 * v, [0.0, 0.0, 1.0]])
    assert basis.shape[0] == 2


def test_quotient_roundtrip():
    ambient = full_space(4)
    relations = span_vectors([[1.0, 0, 0, 0]], ambient_dim=4)
    q = quotient_space(ambient, relations)
    assert q.dim == 3
    c = np.array([1.0, 2.0, 3.0])
    assert np.allclose(q.to_quotient(q.representative(c)), c, atol=1e-10)


def test_quotient_representative_is_min_norm():
    ambient = full_space(2)
    relations = span_vectors([[1.0, 0.0]], ambient_dim=2)
    q = quotient_space(ambient, relations)
    rep = q.representative(q.to_quotient([5.0, 1.0]))
    # the coset [5,1] + span{e1} has min-norm element (0,1)
    assert np.allclose(rep, [0.0, 1.0], atol=1e-12)


def test_vec_row_major():
    m = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(vec(m), np.array([1, 2, 3, 4], dtype=complex))
