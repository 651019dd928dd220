"""The flip-derived bimodule maps and the tensor-square projection.

beta11 swaps the two legs of E1 (x)_A E1; beta12 and beta21 exchange the
mixed blocks while twisting the E1 leg by the two-point flip alpha on its
second tensor factor.  The projection is 1/2(1+beta11) on E1 (x) E1, zero
on E2 (x) E2, and the coupled 1/2 [[1, beta21], [beta12, 1]] on the mixed
pair.  All maps are built on plain tensor coordinates and checked to
descend to the balanced quotient; descent failure is a construction error
because it signals a surrogate without the required bimodule structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import BLOCK_KEYS, CalculusSpaces, ProductTensorSquare
from .hermitian import ProductHermitian, tensor_square_gram
from .linalg import ConstructionError, as_complex, hs_norm, least_squares, vec
from .triples import ProductTriple


def alpha_flip_matrix(pt: ProductTriple) -> np.ndarray:
    """The two-point flip on the second-factor algebra, in frame coordinates.

    alpha swaps the two minimal idempotents of A2; on the orthonormal
    algebra frame it is computed by flipping each frame matrix and
    re-expanding.
    """
    t2 = pt.factor2
    one = t2.algebra_basis[0]
    e_plus = t2.algebra_basis[1]
    frame = pt.alg2_frame
    cols = []
    basis_mat = np.array([vec(one), vec(e_plus)]).T
    for b in frame:
        coeff, _, res = least_squares(basis_mat, vec(b), t2.tol.rank_tol)
        if res > t2.tol.operator(hs_norm(b)):
            raise ConstructionError("second-factor frame is not in span{1, e+}")
        flipped = (coeff[0] + coeff[1]) * one - coeff[1] * e_plus
        cols.append(np.array([np.vdot(vec(f), vec(flipped)) for f in frame]))
    return np.array(cols).T


def alpha1_matrix(pt: ProductTriple) -> np.ndarray:
    """The induced flip on E1 coordinates: identity on the one-form leg."""
    flip2 = alpha_flip_matrix(pt)
    n_omega = len(pt.omega1_f1)
    return np.kron(np.eye(n_omega, dtype=np.complex128), flip2)


def _beta_plain(pt: ProductTriple, tensor: ProductTensorSquare):
    """Plain-coordinate matrices of beta11, beta12, beta21."""
    a1 = alpha1_matrix(pt)
    n1, n2 = pt.e1_dim, pt.e2_dim

    swap = np.zeros((n1 * n1, n1 * n1), dtype=np.complex128)
    for i in range(n1):
        for j in range(n1):
            swap[j * n1 + i, i * n1 + j] = 1.0

    b12 = np.zeros((n2 * n1, n1 * n2), dtype=np.complex128)
    for i in range(n1):
        for j in range(n2):
            for k in range(n1):
                b12[j * n1 + k, i * n2 + j] = a1[k, i]

    b21 = np.zeros((n1 * n2, n2 * n1), dtype=np.complex128)
    for i in range(n2):
        for j in range(n1):
            for k in range(n1):
                b21[k * n2 + i, i * n1 + j] = a1[k, j]

    return {"beta11": (swap, (1, 1), (1, 1)),
            "beta12": (b12, (1, 2), (2, 1)),
            "beta21": (b21, (2, 1), (1, 2))}


@dataclass(frozen=True)
class PsiProjection:
    """Idempotent on tensor-square quotient coordinates, with certificates.

    certificates holds residuals: descent of each beta to the quotient,
    psi_idempotent, psi_self_adjoint (w.r.t. the scalarized A-valued
    Gram), beta11_involution, beta_comp_12/21, beta11_self_adjoint,
    beta_adjoint_pair, junk_in_image (hard: d_Psi well-definedness), and
    image_in_junk_preimage (the continuum-only right inclusion; a
    diagnostic that finite surrogates are expected to fail).
    """

    tensor: object
    matrix: np.ndarray
    gram: np.ndarray | None
    beta11: np.ndarray | None
    beta12: np.ndarray | None
    beta21: np.ndarray | None
    certificates: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self) -> np.ndarray:
        return np.eye(self.dim, dtype=np.complex128) - self.matrix

    def apply(self, coords) -> np.ndarray:
        return self.matrix @ as_complex(coords)


def zero_psi(calc: CalculusSpaces) -> PsiProjection:
    """The zero idempotent, the forced choice when junk tensors vanish.

    Valid whenever JT^2 = 0 (its image 0 contains JT^2 and is contained in
    every multiplication preimage); junk_in_image records the defect when
    junk tensors do not vanish.
    """
    dim = calc.tensor_square.dim
    worst = 0.0
    for j in calc.junk_tensors.basis:
        worst = max(worst, float(np.linalg.norm(j)))
    certs = {"psi_idempotent": 0.0, "psi_self_adjoint": 0.0,
             "junk_in_image": worst, "image_in_junk_preimage": 0.0}
    return PsiProjection(tensor=calc.tensor_square,
                         matrix=np.zeros((dim, dim), dtype=np.complex128),
                         gram=None, beta11=None, beta12=None, beta21=None,
                         certificates=certs)


def build_psi(calc: CalculusSpaces, herm: ProductHermitian) -> PsiProjection:
    """Assemble the projection on a product's tensor square.

    The betas are built on plain tensors; each must map the source
    relation space into the target relation space (descent), otherwise
    the induced quotient map is ill-defined and construction fails naming
    the block.
    """
    pt = calc.product
    if pt is None:
        raise ConstructionError("the tensor-square projection needs a product triple")
    tensor: ProductTensorSquare = calc.tensor_square
    tol = pt.total.tol

    plain = _beta_plain(pt, tensor)
    certs: dict[str, float] = {}
    reduced = {}
    for name, (mat, src_key, dst_key) in plain.items():
        src = tensor.block(src_key)
        dst = tensor.block(dst_key)
        worst = 0.0
        for r in src.relation_space.basis:
            worst = max(worst, dst.relation_space.residual(mat @ r))
        certs[f"descent_{name}"] = worst
        if worst > tol.operator(1.0):
            raise ConstructionError(
                f"{name} does not descend to the balanced quotient on block "
                f"E{src_key} (residual {worst:.3e}); the surrogate violates "
                "the bimodule structure")
        qs = src.quotient.quotient_basis
        qd = dst.quotient.quotient_basis
        reduced[name] = qd.conj() @ mat @ qs.T

    b11, b12, b21 = reduced["beta11"], reduced["beta12"], reduced["beta21"]
    n11 = tensor.block((1, 1)).dim
    n12 = tensor.block((1, 2)).dim
    n21 = tensor.block((2, 1)).dim

    psi = np.zeros((tensor.dim, tensor.dim), dtype=np.complex128)
    s11, s12 = tensor.slice((1, 1)), tensor.slice((1, 2))
    s21 = tensor.slice((2, 1))
    psi[s11, s11] = 0.5 * (np.eye(n11) + b11)
    psi[s12, s12] = 0.5 * np.eye(n12)
    psi[s21, s21] = 0.5 * np.eye(n21)
    psi[s12, s21] = 0.5 * b21
    psi[s21, s12] = 0.5 * b12

    gram = tensor_square_gram(tensor, herm)

    certs["beta11_involution"] = float(np.linalg.norm(b11 @ b11 - np.eye(n11)))
    certs["beta_comp_21_12"] = float(np.linalg.norm(b21 @ b12 - np.eye(n12)))
    certs["beta_comp_12_21"] = float(np.linalg.norm(b12 @ b21 - np.eye(n21)))
    g11 = gram[s11, s11]
    certs["beta11_self_adjoint"] = float(
        np.linalg.norm(g11 @ b11 - b11.conj().T @ g11))
    certs["beta_adjoint_pair"] = float(
        np.linalg.norm(gram[s21, s21] @ b12 - b21.conj().T @ gram[s12, s12]))
    certs["psi_idempotent"] = float(np.linalg.norm(psi @ psi - psi))
    certs["psi_self_adjoint"] = float(
        np.linalg.norm(gram @ psi - psi.conj().T @ gram))

    worst = 0.0
    for j in calc.junk_tensors.basis:
        worst = max(worst, float(np.linalg.norm(psi @ j - j)))
    certs["junk_in_image"] = worst

    # right inclusion Im(psi) <= m^{-1}(junk two-forms): continuum-only
    image = _column_space(psi, tol.rank_tol)
    worst = 0.0
    for v in image:
        mv = tensor.mult(v)
        if calc.junk2.dim:
            res = calc.junk2.residual(vec(mv))
        else:
            res = hs_norm(mv)
        worst = max(worst, res)
    certs["image_in_junk_preimage"] = worst

    return PsiProjection(tensor=tensor, matrix=psi, gram=gram,
                         beta11=b11, beta12=b12, beta21=b21,
                         certificates=certs)


def _column_space(mat, rank_tol):
    u, s, _ = np.linalg.svd(mat)
    if s.size == 0 or s[0] == 0:
        return []
    rank = int(np.sum(s > rank_tol * s[0]))
    return [u[:, i] for i in range(rank)]
