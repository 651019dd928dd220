"""Dense complex linear algebra substrate.

Hilbert-Schmidt geometry on matrices, deterministic orthonormal spans,
subspaces, quotient spaces, nullspaces and minimum-norm least squares.
Everything downstream (triples, calculi, torsion) is built on top of the
vocabulary defined here.

Conventions: matrices are complex128 ndarrays, vectorized row-major;
subspace bases are stored as orthonormal *rows*.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-10
DEFAULT_COMPARE_TOL = 1e-8


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


def as_complex(m) -> np.ndarray:
    return np.asarray(m, dtype=np.complex128)


def adjoint(m) -> np.ndarray:
    """Conjugate transpose."""
    return as_complex(m).conj().T


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    return a @ b + b @ a


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt pairing Tr(b* a): linear in a, conjugate-linear in b."""
    a, b = as_complex(a), as_complex(b)
    if a.shape != b.shape:
        raise DimensionError(f"hs_inner: shape mismatch {a.shape} vs {b.shape}")
    # vdot conjugates its first argument, so this is sum(conj(b) * a) = Tr(b^H a)
    return complex(np.vdot(b, a))


def hs_norm(a) -> float:
    return float(np.linalg.norm(a))


def op_norm(a) -> float:
    """Largest singular value."""
    a = as_complex(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def vec(m) -> np.ndarray:
    """Row-major vectorization."""
    return as_complex(m).reshape(-1)


def unvec(v, shape) -> np.ndarray:
    return as_complex(v).reshape(shape)


def kron(a, b) -> np.ndarray:
    """Kronecker product; satisfies kron(A,B) @ kron(C,D) = kron(AC, BD)."""
    return np.kron(as_complex(a), as_complex(b))


def orthonormalize(vectors, rank_tol=DEFAULT_RANK_TOL) -> np.ndarray:
    """Ordered modified Gram-Schmidt with one re-orthogonalization pass.

    A vector is discarded when its residual after projection falls below
    rank_tol times the largest singular value of the input stack, so the
    rank decision is relative while the basis itself is fixed by input
    order (no pivoting: reproducible coordinates across runs).
    """
    vecs = [as_complex(v).reshape(-1) for v in vectors]
    if not vecs:
        return np.zeros((0, 0), dtype=np.complex128)
    n = vecs[0].size
    for v in vecs:
        if v.size != n:
            raise DimensionError("orthonormalize: inconsistent vector lengths")
    stack = np.array(vecs)
    svals = np.linalg.svd(stack, compute_uv=False)
    smax = float(svals[0]) if svals.size else 0.0
    thresh = rank_tol * smax
    basis: list[np.ndarray] = []
    for v in vecs:
        w = v.copy()
        for _ in range(2):  # second pass restores orthogonality lost to cancellation
            for b in basis:
                w -= (b.conj() @ w) * b
        nw = np.linalg.norm(w)
        if nw > thresh:
            basis.append(w / nw)
    if not basis:
        return np.zeros((0, n), dtype=np.complex128)
    return np.array(basis)


@dataclass(frozen=True)
class Subspace:
    """A linear span, stored as orthonormal row vectors in fixed coordinates.

    shape records the matrix shape when the coordinates are vectorized
    matrices; it is metadata only.
    """

    ambient_dim: int
    basis: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL
    shape: tuple | None = None

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def coords(self, v) -> np.ndarray:
        v = self._check(v)
        return self.basis.conj() @ v

    def from_coords(self, c) -> np.ndarray:
        return self.basis.T @ as_complex(c)

    def project(self, v) -> np.ndarray:
        v = self._check(v)
        if self.dim == 0:
            return np.zeros_like(v)
        return self.basis.T @ (self.basis.conj() @ v)

    def residual(self, v) -> float:
        v = self._check(v)
        return float(np.linalg.norm(v - self.project(v)))

    def matrices(self) -> list[np.ndarray]:
        if self.shape is None:
            raise ValueError("subspace carries no matrix shape")
        return [unvec(b, self.shape) for b in self.basis]

    def _check(self, v) -> np.ndarray:
        v = as_complex(v).reshape(-1)
        if v.size != self.ambient_dim:
            raise DimensionError(
                f"vector length {v.size} != ambient dim {self.ambient_dim}")
        return v


def span_vectors(vectors, rank_tol=DEFAULT_RANK_TOL, ambient_dim=None,
                 shape=None) -> Subspace:
    """Deterministic orthonormal span of coordinate vectors."""
    basis = orthonormalize(vectors, rank_tol)
    if basis.shape[1] == 0 and ambient_dim is not None:
        basis = np.zeros((0, ambient_dim), dtype=np.complex128)
    return Subspace(basis.shape[1], basis, rank_tol, shape)


def span(mats, rank_tol=DEFAULT_RANK_TOL, shape=None) -> Subspace:
    """Orthonormal span of matrices under the Hilbert-Schmidt inner product."""
    mats = [as_complex(m) for m in mats]
    if mats:
        shape = mats[0].shape
        for m in mats:
            if m.shape != shape:
                raise DimensionError("span: inconsistent matrix shapes")
    ambient = int(np.prod(shape)) if shape is not None else None
    return span_vectors([vec(m) for m in mats], rank_tol,
                        ambient_dim=ambient, shape=shape)


def project(s: Subspace, v) -> np.ndarray:
    return s.project(v)


def contains(s: Subspace, t: Subspace, tol) -> tuple[bool, float]:
    """Whether every basis vector of t lies in s, with the worst residual."""
    if s.ambient_dim != t.ambient_dim:
        raise DimensionError("contains: ambient dimensions differ")
    worst = 0.0
    for b in t.basis:
        worst = max(worst, s.residual(b))
    return worst <= tol, worst


def nullspace(l_map, rank_tol=DEFAULT_RANK_TOL) -> Subspace:
    """Orthonormal basis of the kernel, via SVD with a relative cutoff."""
    l_map = np.atleast_2d(as_complex(l_map))
    m, n = l_map.shape
    if n == 0:
        return Subspace(0, np.zeros((0, 0), dtype=np.complex128), rank_tol)
    svals = np.linalg.svd(l_map, compute_uv=False)
    smax = float(svals[0]) if svals.size else 0.0
    if smax == 0.0:
        return Subspace(n, np.eye(n, dtype=np.complex128), rank_tol)
    _, s, vh = np.linalg.svd(l_map)
    rank = int(np.sum(s > rank_tol * smax))
    return Subspace(n, vh[rank:].conj(), rank_tol)


def least_squares(l_map, b, rank_tol=DEFAULT_RANK_TOL):
    """Minimum-norm least-squares solution of L x = b.

    Returns (x, nullity, residual).  nullity is the kernel dimension of L,
    so callers can certify uniqueness of the solution; residual is
    ||L x - b||, nonzero exactly when the system is inconsistent.
    """
    l_map = np.atleast_2d(as_complex(l_map))
    b = as_complex(b).reshape(-1)
    if l_map.shape[0] != b.size:
        raise DimensionError("least_squares: incompatible shapes")
    x, _, rank, _ = np.linalg.lstsq(l_map, b, rcond=rank_tol)
    nullity = l_map.shape[1] - rank
    residual = float(np.linalg.norm(l_map @ x - b))
    return x, int(nullity), residual


class ConstructionError(RuntimeError):
    """A validated structure failed one of its defining invariants."""


@dataclass(frozen=True)
class QuotientSpace:
    """ambient/relations with minimum-norm coset representatives.

    quotient_basis spans the orthogonal complement of the relations inside
    the ambient space; to_quotient followed by representative is the
    identity on quotient coordinates.
    """

    ambient: Subspace
    relations: Subspace
    quotient_basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.quotient_basis.shape[0]

    def to_quotient(self, v) -> np.ndarray:
        return self.quotient_basis.conj() @ as_complex(v).reshape(-1)

    def representative(self, c) -> np.ndarray:
        return self.quotient_basis.T @ as_complex(c)


def quotient_space(ambient: Subspace, relations: Subspace,
                   tol=DEFAULT_COMPARE_TOL) -> QuotientSpace:
    """Build ambient/relations, checking containment and dimension count."""
    ok, res = contains(ambient, relations, tol)
    if not ok:
        raise ConstructionError(
            f"relations are not contained in the ambient space (residual {res:.3e})")
    reduced = []
    for b in ambient.basis:
        reduced.append(b - relations.project(b))
    qbasis = orthonormalize(reduced, ambient.rank_tol)
    if qbasis.shape[1] == 0:
        qbasis = np.zeros((0, ambient.ambient_dim), dtype=np.complex128)
    expected = ambient.dim - relations.dim
    if qbasis.shape[0] != expected:
        raise ConstructionError(
            f"quotient dimension {qbasis.shape[0]} != ambient {ambient.dim} "
            f"- relations {relations.dim}")
    return QuotientSpace(ambient, relations, qbasis)


def full_space(n, rank_tol=DEFAULT_RANK_TOL, shape=None) -> Subspace:
    """The whole coordinate space C^n as a Subspace."""
    return Subspace(n, np.eye(n, dtype=np.complex128), rank_tol, shape)
