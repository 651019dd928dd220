"""Differential calculi of a finite triple, built mechanically.

Universal one-forms as the kernel of multiplication on algebra pairs, the
represented one- and two-form spaces, junk two-forms and junk tensors, the
projection sigma_2, and balanced tensor squares of one-form bimodules
(single-block for a plain triple, four blocks for a product).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    ConstructionError,
    Subspace,
    as_complex,
    commutator,
    contains,
    full_space,
    hs_norm,
    least_squares,
    nullspace,
    orthonormalize,
    quotient_space,
    span,
    span_vectors,
    vec,
)
from .triples import FiniteSpectralTriple, ProductTriple, one_form_basis


@dataclass(frozen=True)
class UniversalForms:
    """Pair-coordinate model of universal one-forms and their images.

    Pair coordinates index a_i x a_j over the algebra basis, row-major.
    pi_matrix sends a pair to vec(a_i [D, a_j]); delta_matrix to
    vec([D, a_i][D, a_j]); mult_matrix to the algebra coordinates of
    a_i a_j.  one_form_space is ker(mult) inside pair coordinates.
    """

    triple: FiniteSpectralTriple
    pairs: tuple
    mult_matrix: np.ndarray
    pi_matrix: np.ndarray
    delta_matrix: np.ndarray
    one_form_space: Subspace

    @property
    def pair_dim(self) -> int:
        return len(self.pairs)

    def pi(self, pair_coords) -> np.ndarray:
        n = self.triple.hilbert_dim
        return (self.pi_matrix @ as_complex(pair_coords)).reshape(n, n)

    def delta(self, pair_coords) -> np.ndarray:
        n = self.triple.hilbert_dim
        return (self.delta_matrix @ as_complex(pair_coords)).reshape(n, n)


def universal_forms(t: FiniteSpectralTriple) -> UniversalForms:
    """Assemble the pair-coordinate calculus maps of a triple."""
    k = t.algebra_dim
    pairs = tuple(itertools.product(range(k), repeat=2))
    comms = t.dirac_commutators()

    mult_cols, pi_cols, delta_cols = [], [], []
    for i, j in pairs:
        mult_cols.append(t.algebra_coords(t.algebra_basis[i] @ t.algebra_basis[j]))
        pi_cols.append(vec(t.algebra_basis[i] @ comms[j]))
        delta_cols.append(vec(comms[i] @ comms[j]))
    mult_matrix = np.array(mult_cols).T
    pi_matrix = np.array(pi_cols).T
    delta_matrix = np.array(delta_cols).T

    one_form_space = nullspace(mult_matrix, t.tol.rank_tol)
    return UniversalForms(triple=t, pairs=pairs, mult_matrix=mult_matrix,
                          pi_matrix=pi_matrix, delta_matrix=delta_matrix,
                          one_form_space=one_form_space)


# ---------------------------------------------------------------------------
# Balanced tensor products of one-form bimodules
# ---------------------------------------------------------------------------

class ModuleClosureError(ConstructionError):
    """A factor of a balanced tensor product is not an algebra sub-bimodule."""


@dataclass(frozen=True)
class BalancedTensorSpace:
    """M1 (x)_A M2 modeled as plain tensor coordinates modulo relations.

    Plain coordinates index pairs of the orthonormal module bases,
    row-major; the relation space is spanned by (x a) x y - x x (a y);
    coset representatives are minimum-norm (orthogonal complement of the
    relations).  mult maps a quotient class to the operator product.
    """

    triple: FiniteSpectralTriple
    left: tuple
    right: tuple
    left_space: Subspace
    right_space: Subspace
    relation_space: Subspace
    quotient: object
    label: str = "T2"

    @property
    def dim(self) -> int:
        return self.quotient.dim

    @property
    def plain_dim(self) -> int:
        return len(self.left) * len(self.right)

    def pair_plain(self, x, y) -> np.ndarray:
        """Plain coordinates of x (x) y for module elements x, y."""
        cx = self._coords(self.left_space, x, "left")
        cy = self._coords(self.right_space, y, "right")
        return np.outer(cx, cy).reshape(-1)

    def to_quotient(self, plain) -> np.ndarray:
        return self.quotient.to_quotient(plain)

    def pair(self, x, y) -> np.ndarray:
        return self.to_quotient(self.pair_plain(x, y))

    def representative(self, qcoords) -> np.ndarray:
        return self.quotient.representative(qcoords)

    def mult_plain(self, plain) -> np.ndarray:
        c = as_complex(plain).reshape(len(self.left), len(self.right))
        n = self.triple.hilbert_dim
        out = np.zeros((n, n), dtype=np.complex128)
        for i, xi in enumerate(self.left):
            row = c[i]
            if not np.any(row):
                continue
            acc = np.zeros((n, n), dtype=np.complex128)
            for j, yj in enumerate(self.right):
                if row[j] != 0:
                    acc += row[j] * yj
            out += xi @ acc
        return out

    def mult(self, qcoords) -> np.ndarray:
        return self.mult_plain(self.representative(qcoords))

    def left_action_plain(self, a) -> np.ndarray:
        """Plain-coordinate matrix of x (x) y -> (a x) (x) y."""
        la = _action_matrix(self.left, lambda x: as_complex(a) @ x,
                            self.left_space, self.triple)
        return np.kron(la, np.eye(len(self.right), dtype=np.complex128))

    def left_action(self, a) -> np.ndarray:
        """Quotient-coordinate matrix of the left algebra action."""
        plain = self.left_action_plain(a)
        q = self.quotient.quotient_basis
        return q.conj() @ plain @ q.T

    def _coords(self, space, m, side) -> np.ndarray:
        v = vec(m)
        c = space.coords(v)
        res = float(np.linalg.norm(v - space.basis.T @ c))
        if res > self.triple.tol.operator(hs_norm(m)):
            raise ConstructionError(
                f"{self.label}: {side} element does not lie in its module "
                f"(residual {res:.3e})")
        return c


def _action_matrix(basis_mats, action, space, triple) -> np.ndarray:
    cols = []
    for m in basis_mats:
        am = action(m)
        v = vec(am)
        c = space.coords(v)
        res = float(np.linalg.norm(v - space.basis.T @ c))
        if res > triple.tol.operator(hs_norm(am)):
            raise ModuleClosureError(
                "module is not closed under the algebra action "
                f"(residual {res:.3e})")
        cols.append(c)
    return np.array(cols).T


def balanced_tensor(m1_mats, m2_mats, t: FiniteSpectralTriple,
                    label="T2") -> BalancedTensorSpace:
    """Quotient model of M1 (x)_A M2 with verified module closure.

    Raises ModuleClosureError naming the offending side when M1 or M2 is
    not an A-sub-bimodule; raises ConstructionError when operator
    multiplication fails to descend to the quotient.
    """
    left = tuple(as_complex(m) for m in m1_mats)
    right = tuple(as_complex(m) for m in m2_mats)
    lspace = span(list(left), t.tol.rank_tol)
    rspace = span(list(right), t.tol.rank_tol)
    if left and lspace.dim != len(left):
        raise ConstructionError(f"{label}: left module basis is not independent")
    if right and rspace.dim != len(right):
        raise ConstructionError(f"{label}: right module basis is not independent")

    # closure under both actions, checked on every basis element
    for side, mats, space in (("left", left, lspace), ("right", right, rspace)):
        for a in t.algebra_basis:
            _action_matrix(mats, lambda x, a=a: as_complex(a) @ x, space, t)
            _action_matrix(mats, lambda x, a=a: x @ as_complex(a), space, t)

    nl, nr = len(left), len(right)
    plain_dim = nl * nr
    rel_vecs = []
    if plain_dim:
        right_mult = {ai: _action_matrix(left, lambda x, a=a: x @ a, lspace, t)
                      for ai, a in enumerate(t.algebra_basis)}
        left_mult = {ai: _action_matrix(right, lambda x, a=a: a @ x, rspace, t)
                     for ai, a in enumerate(t.algebra_basis)}
        for ai in range(t.algebra_dim):
            rm, lm = right_mult[ai], left_mult[ai]
            for i in range(nl):
                for j in range(nr):
                    r = np.zeros(plain_dim, dtype=np.complex128)
                    r += np.kron(rm[:, i], _unit(nr, j))
                    r -= np.kron(_unit(nl, i), lm[:, j])
                    rel_vecs.append(r)
    relations = span_vectors(rel_vecs, t.tol.rank_tol, ambient_dim=plain_dim)
    quotient = quotient_space(full_space(plain_dim, t.tol.rank_tol), relations,
                              t.tol.operator(1.0))

    bts = BalancedTensorSpace(triple=t, left=left, right=right,
                              left_space=lspace, right_space=rspace,
                              relation_space=relations, quotient=quotient,
                              label=label)
    worst = 0.0
    for r in relations.basis:
        worst = max(worst, hs_norm(bts.mult_plain(r)))
    scale = 1.0 if not (left and right) else max(
        hs_norm(x) for x in left) * max(hs_norm(y) for y in right) * plain_dim
    if worst > t.tol.operator(scale):
        raise ConstructionError(
            f"{label}: operator multiplication does not kill the relations "
            f"(residual {worst:.3e})")
    return bts


def _unit(n, j):
    e = np.zeros(n, dtype=np.complex128)
    e[j] = 1.0
    return e


BLOCK_KEYS = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True)
class ProductTensorSquare:
    """Tensor square of a product's one-forms, blocked as E_i (x)_A E_j.

    Total quotient coordinates concatenate the four block quotients in the
    fixed order (1,1), (1,2), (2,1), (2,2); the one-form splitting
    Omega^1 = E1 + E2 routes a pair x (x) y into the four blocks.
    """

    product: ProductTriple
    blocks: dict
    offsets: dict
    dim: int

    def block(self, key) -> BalancedTensorSpace:
        return self.blocks[key]

    def slice(self, key) -> slice:
        off = self.offsets[key]
        return slice(off, off + self.blocks[key].dim)

    def embed(self, key, coords) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.complex128)
        out[self.slice(key)] = coords
        return out

    def split_one_form(self, w):
        """E1 and E2 components of a one-form, with the splitting residual."""
        e1 = self.blocks[(1, 1)].left_space
        e2 = self.blocks[(2, 2)].left_space
        v = vec(w)
        c1, c2 = e1.coords(v), e2.coords(v)
        rec = e1.basis.T @ c1 + e2.basis.T @ c2
        res = float(np.linalg.norm(v - rec))
        shape = w.shape
        return (e1.basis.T @ c1).reshape(shape), (e2.basis.T @ c2).reshape(shape), res

    def pair(self, x, y) -> np.ndarray:
        """Total quotient coordinates of x (x) y for one-forms x, y."""
        x1, x2, rx = self.split_one_form(as_complex(x))
        y1, y2, ry = self.split_one_form(as_complex(y))
        tol = self.product.total.tol.operator(max(hs_norm(x), hs_norm(y)))
        if max(rx, ry) > tol:
            raise ConstructionError(
                f"tensor pair: argument is not a one-form (residual {max(rx, ry):.3e})")
        parts = {(1, 1): (x1, y1), (1, 2): (x1, y2),
                 (2, 1): (x2, y1), (2, 2): (x2, y2)}
        out = np.zeros(self.dim, dtype=np.complex128)
        for key, (a, b) in parts.items():
            blk = self.blocks[key]
            out[self.slice(key)] = blk.pair(a, b)
        return out

    def mult(self, coords) -> np.ndarray:
        coords = as_complex(coords)
        n = self.product.total.hilbert_dim
        out = np.zeros((n, n), dtype=np.complex128)
        for key in BLOCK_KEYS:
            out += self.blocks[key].mult(coords[self.slice(key)])
        return out

    def left_action(self, a) -> np.ndarray:
        mat = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for key in BLOCK_KEYS:
            sl = self.slice(key)
            mat[sl, sl] = self.blocks[key].left_action(a)
        return mat


def product_tensor_square(pt: ProductTriple) -> ProductTensorSquare:
    e_bases = {1: list(pt.e1_basis), 2: list(pt.e2_basis)}
    blocks, offsets = {}, {}
    off = 0
    for key in BLOCK_KEYS:
        i, j = key
        blk = balanced_tensor(e_bases[i], e_bases[j], pt.total,
                              label=f"E({i},{j})")
        blocks[key] = blk
        offsets[key] = off
        off += blk.dim
    return ProductTensorSquare(product=pt, blocks=blocks, offsets=offsets, dim=off)


# ---------------------------------------------------------------------------
# Junk forms, junk tensors, sigma_2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CalculusSpaces:
    """Everything degree <= 2 derived from one triple.

    two_form_image spans a_i [D,a_j][D,a_l]; junk2 is the represented
    image of d(ker pi_D); sigma2 acts on two-form coordinates as the
    orthogonal projection killing junk2; tensor_square is the balanced
    square of one-forms (blocked for products); junk_tensors live in its
    quotient coordinates.
    """

    triple: FiniteSpectralTriple
    product: ProductTriple | None
    universal: UniversalForms
    omega1: Subspace
    kernel_pairs: Subspace
    two_form_image: Subspace
    junk2: Subspace
    sigma2: np.ndarray
    tensor_square: object
    junk_tensors: Subspace
    omega_frame: tuple

    @property
    def omega_dim(self) -> int:
        return len(self.omega_frame)

    def omega_coords(self, w) -> np.ndarray:
        v = vec(w)
        c = np.array([np.vdot(vec(b), v) for b in self.omega_frame])
        return c

    def omega_matrix(self, coords) -> np.ndarray:
        n = self.triple.hilbert_dim
        out = np.zeros((n, n), dtype=np.complex128)
        for c, b in zip(as_complex(coords), self.omega_frame):
            out += c * b
        return out

    def omega_residual(self, w) -> float:
        rec = self.omega_matrix(self.omega_coords(w))
        return hs_norm(as_complex(w) - rec)

    def two_form_coords(self, x, check_tol=None) -> np.ndarray:
        v = vec(x)
        c = self.two_form_image.coords(v)
        if check_tol is not None:
            res = float(np.linalg.norm(v - self.two_form_image.basis.T @ c))
            if res > check_tol:
                raise ConstructionError(
                    f"operator is not a represented two-form (residual {res:.3e})")
        return c

    def two_form_matrix(self, coords) -> np.ndarray:
        n = self.triple.hilbert_dim
        return self.two_form_image.from_coords(coords).reshape(n, n)

    def sigma2_of(self, x, check_tol=None) -> np.ndarray:
        """sigma_2 applied to a represented two-form, as a matrix."""
        return self.two_form_matrix(self.sigma2 @ self.two_form_coords(x, check_tol))

    def delta_tensor(self, pair_coords) -> np.ndarray:
        """[D, .] (x)_A [D, .] image of a universal pair in the tensor square."""
        comms = self.triple.dirac_commutators()
        coeff = as_complex(pair_coords)
        out = np.zeros(self.tensor_square.dim, dtype=np.complex128)
        for idx, (i, j) in enumerate(self.universal.pairs):
            c = coeff[idx]
            if abs(c) > 1e-300:
                out += c * self.tensor_square.pair(comms[i], comms[j])
        return out


def junk_spaces(t: FiniteSpectralTriple,
                product: ProductTriple | None = None) -> CalculusSpaces:
    """Compute one/two-form spaces, junk, sigma_2 and the tensor square."""
    uni = universal_forms(t)
    omega1 = one_form_basis(t)
    n = t.hilbert_dim

    if product is not None:
        omega_frame = tuple(product.one_form_frame())
        tensor = product_tensor_square(product)
    else:
        omega_frame = tuple(omega1.matrices()) if omega1.dim else tuple()
        tensor = balanced_tensor(list(omega_frame), list(omega_frame), t)

    comms = t.dirac_commutators()
    two_mats = [a @ comms[j] @ comms[l]
                for a, (j, l) in itertools.product(
                    t.algebra_basis, itertools.product(range(t.algebra_dim), repeat=2))]
    two_form_image = span(two_mats, t.tol.rank_tol)

    # universal one-forms killed by the representation
    pi_on_kerm = uni.pi_matrix @ uni.one_form_space.basis.T
    kern_inner = nullspace(pi_on_kerm, t.tol.rank_tol)
    kernel_pairs = span_vectors(
        [uni.one_form_space.basis.T @ c for c in kern_inner.basis],
        t.tol.rank_tol, ambient_dim=uni.pair_dim)

    # the span cutoff is relative to the candidates themselves, so genuinely
    # zero images must be filtered against the scale of the delta map first
    delta_scale = max(1.0, float(np.linalg.norm(uni.delta_matrix, 2)))
    junk_mats = [m for m in (uni.delta(k) for k in kernel_pairs.basis)
                 if hs_norm(m) > t.tol.rank_tol * delta_scale]
    junk2 = span(junk_mats, t.tol.rank_tol, shape=(n, n))
    if junk2.dim:
        ok, res = contains(two_form_image, junk2, t.tol.operator(1.0))
        if not ok:
            raise ConstructionError(
                f"junk two-forms escape the represented two-forms ({res:.3e})")

    m = two_form_image.dim
    sigma2 = np.eye(m, dtype=np.complex128)
    if junk2.dim and m:
        jc = orthonormalize([two_form_image.coords(vec(j))
                             for j in junk2.matrices()], t.tol.rank_tol)
        sigma2 -= jc.T @ jc.conj()

    calc = CalculusSpaces(triple=t, product=product, universal=uni,
                          omega1=omega1, kernel_pairs=kernel_pairs,
                          two_form_image=two_form_image, junk2=junk2,
                          sigma2=sigma2, tensor_square=tensor,
                          junk_tensors=span_vectors([], t.tol.rank_tol,
                                                    ambient_dim=tensor.dim),
                          omega_frame=omega_frame)
    jt_vecs = [v for v in (calc.delta_tensor(k) for k in kernel_pairs.basis)
               if np.linalg.norm(v) > t.tol.rank_tol * delta_scale]
    jt = span_vectors(jt_vecs, t.tol.rank_tol, ambient_dim=tensor.dim)
    object.__setattr__(calc, "junk_tensors", jt)
    return calc


def check_spectrally_closed(t: FiniteSpectralTriple, max_degree: int = 3) -> float:
    """Max |Tr(q D)| over products q of up to max_degree basis factors.

    The factors range over the algebra basis and the one-form basis; zero
    certifies the finite analog of spectral closedness, which is what
    makes the first-factor part of a product's torsion functional drop out.
    """
    omega = one_form_basis(t)
    factors = list(t.algebra_basis) + (omega.matrices() if omega.dim else [])
    worst = 0.0
    frontier = [np.eye(t.hilbert_dim, dtype=np.complex128)]
    for _ in range(max_degree):
        nxt = []
        for prefix in frontier:
            for f in factors:
                q = prefix @ f
                worst = max(worst, abs(np.trace(q @ t.dirac)))
                nxt.append(q)
        frontier = nxt
    return float(worst)
