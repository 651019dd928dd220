"""Algebra-valued inner products on one-form bimodules.

Three rules: the trace-preserving conditional expectation E_A(x y*) onto
the represented algebra (the canonical choice on an arbitrary finite
triple), and the two product-specific rules that pair the factors of
E1 = Omega^1_{D1} x A2 and E2 = gamma A1 x Omega^1_{D2}.  E1 and E2 are
declared orthogonal.  Scalarization is the matrix trace, so the scalar
form of every rule is Tr(x <y,v> u*) with no extra projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ConstructionError, Subspace, as_complex, hs_norm, span, vec
from .triples import FiniteSpectralTriple, ProductTriple


def conditional_expectation_frame(mats, rank_tol):
    """Orthonormal frame implementing the hs-orthogonal projection onto a span."""
    return span(list(mats), rank_tol).matrices()


def project_onto_frame(x, frame):
    out = np.zeros_like(as_complex(x))
    for f in frame:
        out += np.vdot(f, x) * f
    return out


def partial_expectation_factor1(x, frame1, dims):
    """Apply a conditional expectation on the first tensor leg only.

    x acts on H1 (x) H2; frame1 is an hs-orthonormal frame of the target
    subspace of B(H1).  Returns sum_r kron(F_r, C_r) with C_r the partial
    contraction of x against F_r.
    """
    n1, n2 = dims
    x4 = as_complex(x).reshape(n1, n2, n1, n2)
    out = np.zeros((n1 * n2, n1 * n2), dtype=np.complex128)
    for f in frame1:
        c = np.einsum("ik,ijkl->jl", f.conj(), x4)
        out += np.kron(f, c)
    return out


@dataclass(frozen=True)
class AValuedInner:
    """An A-valued pairing on a module of operators.

    evaluate is C-linear in the first slot and conjugate-linear in the
    second; validation checks hermitian symmetry, left A-linearity, and
    positivity of the scalarized Gram matrix on the module basis.
    """

    kind: str
    module: Subspace
    evaluate: object

    def __call__(self, x, y):
        return self.evaluate(x, y)


def _validate(inner: AValuedInner, module_mats, triple: FiniteSpectralTriple,
              label: str) -> None:
    tol = triple.tol
    scale = max((hs_norm(m) for m in module_mats), default=1.0) ** 2
    worst_sym = 0.0
    worst_lin = 0.0
    for x in module_mats:
        for y in module_mats:
            v = inner(x, y)
            worst_sym = max(worst_sym, hs_norm(v.conj().T - inner(y, x)))
            for a in triple.algebra_basis:
                worst_lin = max(worst_lin, hs_norm(
                    inner(as_complex(a) @ x, y) - as_complex(a) @ v))
    if worst_sym > tol.operator(scale):
        raise ConstructionError(
            f"{label}: inner product is not hermitian-symmetric ({worst_sym:.3e})")
    if worst_lin > tol.operator(scale):
        raise ConstructionError(
            f"{label}: inner product is not left A-linear ({worst_lin:.3e})")
    # positivity of <x,x> as a matrix, on basis elements and mixed combinations
    probes = list(module_mats)
    for i in range(len(module_mats)):
        for j in range(i + 1, len(module_mats)):
            probes.append(module_mats[i] + module_mats[j])
            probes.append(module_mats[i] + 1j * module_mats[j])
    for x in probes:
        v = inner(x, x)
        eigs = np.linalg.eigvalsh(0.5 * (v + v.conj().T))
        if eigs.size and eigs[0] < -tol.operator(scale):
            raise ConstructionError(
                f"{label}: <x,x> has a negative eigenvalue ({eigs[0]:.3e})")
    for x in module_mats:
        if hs_norm(inner(x, x)) <= tol.operator(scale) * hs_norm(x):
            raise ConstructionError(
                f"{label}: inner product is degenerate on a basis element")


def conditional_expectation_inner(t: FiniteSpectralTriple, module,
                                  validate=True) -> AValuedInner:
    """<x,y> = E_A(x y*), with E_A the trace-orthogonal projection onto pi(A)."""
    frame = conditional_expectation_frame(t.algebra_basis, t.tol.rank_tol)
    mats = list(module)

    def evaluate(x, y):
        return project_onto_frame(as_complex(x) @ as_complex(y).conj().T, frame)

    inner = AValuedInner("conditional-expectation",
                         span(mats, t.tol.rank_tol), evaluate)
    if validate:
        _validate(inner, mats, t, "conditional-expectation inner")
    return inner


def e1_inner(pt: ProductTriple, validate=True) -> AValuedInner:
    """E1 rule: <w1 x P, w2 x Q> = E_{A1}(w1 w2*) x P Q*.

    Implemented as the factor-1 partial conditional expectation of x y*,
    which agrees with the elementary-tensor rule and extends it linearly.
    """
    t1 = pt.factor1
    frame1 = conditional_expectation_frame(t1.algebra_basis, t1.tol.rank_tol)
    dims = (pt.factor1.hilbert_dim, pt.factor2.hilbert_dim)
    mats = list(pt.e1_basis)

    def evaluate(x, y):
        return partial_expectation_factor1(
            as_complex(x) @ as_complex(y).conj().T, frame1, dims)

    inner = AValuedInner("E1-rule", span(mats, pt.total.tol.rank_tol), evaluate)
    if validate:
        _validate(inner, mats, pt.total, "E1 inner")
    return inner


def e2_inner(pt: ProductTriple, validate=True) -> AValuedInner:
    """E2 rule: <gamma f1 x u1, gamma f2 x u2> = f1 f2* x u1 u2*.

    The gradings cancel in x y*, so the rule is plain matrix multiplication.
    """
    mats = list(pt.e2_basis)

    def evaluate(x, y):
        return as_complex(x) @ as_complex(y).conj().T

    inner = AValuedInner("E2-rule", span(mats, pt.total.tol.rank_tol), evaluate)
    if validate:
        _validate(inner, mats, pt.total, "E2 inner")
    return inner


@dataclass(frozen=True)
class ProductHermitian:
    """The Hermitian structure of a product's one-forms: E1 + E2, orthogonal."""

    product: ProductTriple
    on_e1: AValuedInner
    on_e2: AValuedInner

    def on_omega(self, x, y, splitter):
        """<x,y> for one-forms, with E1 perpendicular to E2 by definition."""
        x1, x2, _ = splitter(x)
        y1, y2, _ = splitter(y)
        return self.on_e1(x1, y1) + self.on_e2(x2, y2)


def product_hermitian(pt: ProductTriple) -> ProductHermitian:
    return ProductHermitian(product=pt, on_e1=e1_inner(pt), on_e2=e2_inner(pt))


def block_gram(block, inner_right: AValuedInner) -> np.ndarray:
    """Scalarized Gram of a balanced-tensor block on its quotient basis.

    <x (x) y, u (x) v> = Tr(x <y,v> u*): the correspondence inner product
    scalarized by the trace.  Computed on minimum-norm representatives;
    the value is representative-independent because the A-valued pairing
    is balanced.
    """
    left = np.array(block.left)
    right = list(block.right)
    nl, nr = len(left), len(right)
    if block.dim == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    pair_inner = np.array([[inner_right(y, v) for v in right] for y in right])
    # plain-coordinate Gram g[(i,j),(k,l)] = Tr(x_i <y_j, y_l> x_k*)
    prod = np.einsum("aij,bcjk->abcik", left, pair_inner)
    g_plain = np.einsum("abcik,dik->abdc", prod, left.conj())
    g_plain = g_plain.reshape(nl * nr, nl * nr)
    q = block.quotient.quotient_basis
    return q.conj() @ g_plain @ q.T


def tensor_square_gram(tensor, herm: ProductHermitian) -> np.ndarray:
    """Block-diagonal Gram of the product tensor square (blocks are orthogonal)."""
    from .calculus import BLOCK_KEYS
    g = np.zeros((tensor.dim, tensor.dim), dtype=np.complex128)
    inner_for = {1: herm.on_e1, 2: herm.on_e2}
    for key in BLOCK_KEYS:
        sl = tensor.slice(key)
        g[sl, sl] = block_gram(tensor.block(key), inner_for[key[1]])
    return g
