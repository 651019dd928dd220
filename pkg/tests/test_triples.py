import numpy as np
import pytest

from spectriple.linalg import anticommutator, commutator, hs_norm
from spectriple.triples import (
    TripleValidationError,
    build_clifford_torus,
    build_graded_two_point,
    build_product,
    build_two_point,
    make_triple,
    one_form_basis,
)

RNG = np.random.default_rng(42)


def test_two_point_phi2_matrices():
    triple, data = build_two_point([[2.0]])
    assert np.allclose(data.d_phi, [[0, 2], [2, 0]])
    assert np.allclose(data.eta, [[0, -2], [2, 0]])
    assert np.allclose(data.eta @ data.eta, np.diag([-4.0, -4.0]))
    assert not triple.degenerate


def test_two_point_rectangular_phi():
    phi = RNG.standard_normal((2, 3)) + 1j * RNG.standard_normal((2, 3))
    triple, data = build_two_point(phi)
    assert triple.hilbert_dim == 5
    # eta = [D, e+] = [[0, -phi], [phi*, 0]] exactly
    expected = np.zeros((5, 5), dtype=complex)
    expected[:2, 2:] = -phi
    expected[2:, :2] = phi.conj().T
    assert np.allclose(data.eta, expected)
    # eta^2 is block diagonal with -phi phi* and -phi* phi
    sq = data.eta @ data.eta
    assert np.allclose(sq[:2, :2], -phi @ phi.conj().T)
    assert np.allclose(sq[2:, 2:], -phi.conj().T @ phi)
    assert np.allclose(sq[:2, 2:], 0)


def test_two_point_zero_phi_degenerate():
    triple, _ = build_two_point(np.zeros((1, 1)))
    assert triple.degenerate
    assert one_form_basis(triple).dim == 0


def test_one_form_basis_z2():
    triple, data = build_two_point([[2.0]])
    omega = one_form_basis(triple)
    assert omega.dim == 2
    assert omega.residual(data.eta.reshape(-1)) < 1e-10
    assert omega.residual((data.e_plus @ data.eta).reshape(-1)) < 1e-10


def test_graded_two_point_axioms():
    t = build_graded_two_point(1.0)
    assert np.allclose(anticommutator(t.grading, t.dirac), 0)
    assert one_form_basis(t).dim == 2
    ti = build_graded_two_point(1j)
    assert hs_norm(ti.dirac - ti.dirac.conj().T) < 1e-14


def test_graded_two_point_zero_degenerate():
    assert build_graded_two_point(0.0).degenerate


def test_validation_rejects_non_selfadjoint():
    with pytest.raises(TripleValidationError):
        make_triple("bad", [np.eye(2)], np.array([[0, 1], [0, 0]], dtype=complex))


def test_validation_rejects_non_algebra():
    # span{1, e12} is not closed under the adjoint
    e12 = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(TripleValidationError):
        make_triple("bad", [np.eye(2), e12], np.zeros((2, 2)))


def test_validation_rejects_bad_grading():
    d = np.array([[0, 1], [1, 0]], dtype=complex)
    with pytest.raises(TripleValidationError):
        make_triple("bad", [np.eye(2)], d, grading=np.eye(2))


def test_clifford_torus_dimensions():
    t = build_clifford_torus(2, 2)
    assert t.hilbert_dim == 16  # 4 points x 4 spinor components
    assert t.algebra_dim == 4
    assert np.allclose(t.grading @ t.grading, np.eye(16))
    assert hs_norm(anticommutator(t.grading, t.dirac)) < 1e-12


def test_clifford_torus_one_forms_anticommute_with_grading():
    t = build_clifford_torus(2, 2)
    for a in t.algebra_basis:
        w = commutator(t.dirac, a)
        assert hs_norm(anticommutator(t.grading, w)) < 1e-12


def test_clifford_torus_odd_dimension_rejected():
    with pytest.raises(TripleValidationError):
        build_clifford_torus(3, 1)


def test_product_dimensions_and_split():
    t1 = build_graded_two_point(1.0)
    t2, _ = build_two_point([[1.0]])
    pt = build_product(t1, t2)
    assert pt.total.hilbert_dim == 4
    assert pt.e1_dim == 4
    assert pt.e2_dim == 4
    assert np.allclose(pt.total.dirac, pt.d1_part + pt.d2_part)
    d_sq = pt.total.dirac @ pt.total.dirac
    split = np.kron(t1.dirac @ t1.dirac, np.eye(2)) + np.kron(np.eye(2), t2.dirac @ t2.dirac)
    assert hs_norm(d_sq - split) < 1e-10


def test_product_requires_grading():
    t2, _ = build_two_point([[1.0]])
    with pytest.raises(TripleValidationError):
        build_product(t2, t2)


def test_product_rejects_degenerate_factor2():
    t1 = build_graded_two_point(1.0)
    t2, _ = build_two_point(np.zeros((1, 1)))
    with pytest.raises(TripleValidationError):
        build_product(t1, t2)


def test_product_e1_e2_orthogonal():
    t1 = build_graded_two_point(1.0)
    t2, _ = build_two_point(RNG.standard_normal((2, 2)) + 1j * RNG.standard_normal((2, 2)))
    pt = build_product(t1, t2)
    worst = max(abs(np.vdot(y, x)) for x in pt.e1_basis for y in pt.e2_basis)
    assert worst < 1e-10
