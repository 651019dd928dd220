"""Finite spectral triples: validation and the built-in constructions.

A triple here is a unital *-algebra of matrices (given by a spanning basis
with the identity first), a self-adjoint Dirac matrix, and an optional
grading.  Constructors validate every axiom numerically at build time;
finite surrogates are never trusted to satisfy structure they were not
checked for.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    ConstructionError,
    DimensionError,
    adjoint,
    anticommutator,
    as_complex,
    commutator,
    hs_norm,
    kron,
    least_squares,
    op_norm,
    span,
    vec,
)


@dataclass(frozen=True)
class Tolerances:
    """Numerical policy: rank decisions and operator comparisons."""

    rank_tol: float = 1e-10
    compare_tol: float = 1e-8

    def operator(self, scale: float = 0.0) -> float:
        """Comparison tolerance scaled by the largest operand norm."""
        return self.compare_tol * (1.0 + scale)


class TripleValidationError(ConstructionError):
    """A spectral-triple axiom failed at construction."""


@dataclass(frozen=True)
class FiniteSpectralTriple:
    label: str
    algebra_basis: tuple
    dirac: np.ndarray
    grading: np.ndarray | None = None
    tol: Tolerances = field(default_factory=Tolerances)
    degenerate: bool = False

    @property
    def hilbert_dim(self) -> int:
        return self.dirac.shape[0]

    @property
    def algebra_dim(self) -> int:
        return len(self.algebra_basis)

    def identity(self) -> np.ndarray:
        return self.algebra_basis[0]

    def dirac_commutators(self) -> list[np.ndarray]:
        return [commutator(self.dirac, a) for a in self.algebra_basis]

    def algebra_span(self):
        return span([as_complex(a) for a in self.algebra_basis],
                    self.tol.rank_tol)

    def algebra_coords(self, x) -> np.ndarray:
        """Least-squares coordinates of x in the algebra basis (must lie in it)."""
        cols = np.array([vec(a) for a in self.algebra_basis]).T
        coeff, _, res = least_squares(cols, vec(x), self.tol.rank_tol)
        scale = hs_norm(x)
        if res > self.tol.operator(scale):
            raise TripleValidationError(
                f"{self.label}: element is not in the represented algebra "
                f"(residual {res:.3e})")
        return coeff


def make_triple(label, algebra_basis, dirac, grading=None,
                tol: Tolerances | None = None) -> FiniteSpectralTriple:
    """Validate and freeze a finite spectral triple.

    Checks: identity first in the basis, D self-adjoint, the basis spans a
    *-algebra (closed under products and adjoints), and the grading axioms
    when a grading is supplied.  A zero Dirac commutator on the whole
    algebra flags the triple as degenerate rather than rejecting it.
    """
    tol = tol or Tolerances()
    basis = tuple(as_complex(a) for a in algebra_basis)
    dirac = as_complex(dirac)
    n = dirac.shape[0]
    if dirac.shape != (n, n):
        raise TripleValidationError(f"{label}: Dirac operator must be square")
    for a in basis:
        if a.shape != (n, n):
            raise DimensionError(f"{label}: algebra and Dirac dimensions differ")

    scale = op_norm(dirac)
    if hs_norm(dirac - adjoint(dirac)) > tol.operator(scale):
        raise TripleValidationError(f"{label}: Dirac operator is not self-adjoint")

    if hs_norm(basis[0] - np.eye(n)) > tol.operator(1.0):
        raise TripleValidationError(f"{label}: first algebra basis element must be 1")

    alg = span(basis, tol.rank_tol)
    worst = 0.0
    for a in basis:
        worst = max(worst, alg.residual(vec(adjoint(a))))
    for a, b in itertools.product(basis, repeat=2):
        worst = max(worst, alg.residual(vec(a @ b)))
    alg_scale = max(hs_norm(a) for a in basis)
    if worst > tol.operator(alg_scale ** 2):
        raise TripleValidationError(
            f"{label}: algebra basis is not closed under * and products "
            f"(residual {worst:.3e})")

    grading_arr = None
    if grading is not None:
        g = as_complex(grading)
        checks = {
            "grading self-adjoint": hs_norm(g - adjoint(g)),
            "grading squares to 1": hs_norm(g @ g - np.eye(n)),
            "grading anticommutes with D": hs_norm(anticommutator(g, dirac)),
        }
        for a in basis:
            checks["grading commutes with algebra"] = max(
                checks.get("grading commutes with algebra", 0.0),
                hs_norm(commutator(g, a)))
        for name, res in checks.items():
            if res > tol.operator(max(1.0, scale)):
                raise TripleValidationError(f"{label}: {name} fails ({res:.3e})")
        grading_arr = g

    commutator_size = max(hs_norm(commutator(dirac, a)) for a in basis)
    degenerate = commutator_size <= tol.operator(scale)

    return FiniteSpectralTriple(label=label, algebra_basis=basis, dirac=dirac,
                                grading=grading_arr, tol=tol,
                                degenerate=degenerate)


def one_form_basis(t: FiniteSpectralTriple):
    """Deterministic orthonormal basis of span{a [D, b]} over basis pairs."""
    mats = [a @ commutator(t.dirac, b)
            for a, b in itertools.product(t.algebra_basis, repeat=2)]
    return span(mats, t.tol.rank_tol)


# ---------------------------------------------------------------------------
# Two-point space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoPointData:
    """Concrete matrices of a two-point triple with off-diagonal map phi."""

    phi: np.ndarray
    d_phi: np.ndarray
    e_plus: np.ndarray
    eta: np.ndarray
    triple: FiniteSpectralTriple

    @property
    def plus_dim(self) -> int:
        return self.phi.shape[0]

    @property
    def minus_dim(self) -> int:
        return self.phi.shape[1]


def build_two_point(phi, tol: Tolerances | None = None,
                    label="two-point") -> tuple[FiniteSpectralTriple, TwoPointData]:
    """Two-point triple: algebra C+C acting block-diagonally, D off-diagonal.

    phi may be any p x q complex matrix; phi = 0 yields a valid but
    degenerate triple (all one-forms vanish).
    """
    tol = tol or Tolerances()
    phi = np.atleast_2d(as_complex(phi))
    p, q = phi.shape
    n = p + q
    d = np.zeros((n, n), dtype=np.complex128)
    d[:p, p:] = phi
    d[p:, :p] = adjoint(phi)
    e_plus = np.zeros((n, n), dtype=np.complex128)
    e_plus[:p, :p] = np.eye(p)
    eta = commutator(d, e_plus)
    triple = make_triple(label, [np.eye(n), e_plus], d, tol=tol)
    data = TwoPointData(phi=phi, d_phi=d, e_plus=e_plus, eta=eta, triple=triple)
    return triple, data


def build_graded_two_point(z, tol: Tolerances | None = None) -> FiniteSpectralTriple:
    """Even two-point triple on C^2: D = [[0, z], [conj(z), 0]], grading diag(1,-1).

    Used as the built-in even first factor of product triples; z = 0 gives
    a degenerate calculus (flagged, not rejected).
    """
    tol = tol or Tolerances()
    z = complex(z)
    d = np.array([[0.0, z], [np.conjugate(z), 0.0]], dtype=np.complex128)
    gamma = np.diag([1.0, -1.0]).astype(np.complex128)
    e_plus = np.diag([1.0, 0.0]).astype(np.complex128)
    return make_triple(f"graded-two-point(z={z})", [np.eye(2), e_plus], d,
                       grading=gamma, tol=tol)


# ---------------------------------------------------------------------------
# Discrete Clifford torus
# ---------------------------------------------------------------------------

def _fermion_ops(d: int) -> list[np.ndarray]:
    """Jordan-Wigner annihilation operators on (C^2)^{tensor d}."""
    sz = np.diag([1.0, -1.0]).astype(np.complex128)
    lower = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    ops = []
    for mu in range(d):
        factors = [sz] * mu + [lower] + [eye] * (d - mu - 1)
        op = factors[0]
        for f in factors[1:]:
            op = kron(op, f)
        ops.append(op)
    return ops


def build_clifford_torus(n_points: int, d: int = 2,
                         tol: Tolerances | None = None) -> FiniteSpectralTriple:
    """Discrete d-torus triple: functions on (Z_N)^d with a hopping Dirac.

    The spinor fiber is the fermionic Fock space (C^2)^{tensor d}, so each
    lattice site carries 2^d spinor components.  D pairs the forward
    difference in direction mu with the creation operator a_mu^+ plus the
    adjoint term, and the chirality is fermion parity, which anticommutes
    with every one-form.  d must be even (no chirality otherwise).
    """
    tol = tol or Tolerances()
    if n_points < 2:
        raise TripleValidationError("clifford torus needs at least 2 points per axis")
    if d < 1 or d % 2 != 0:
        raise TripleValidationError("clifford torus dimension d must be even")

    npts = n_points ** d
    spin_dim = 2 ** d
    points = list(itertools.product(range(n_points), repeat=d))
    index = {pt: i for i, pt in enumerate(points)}

    shifts = []
    for mu in range(d):
        s = np.zeros((npts, npts), dtype=np.complex128)
        for pt, i in index.items():
            target = list(pt)
            target[mu] = (target[mu] + 1) % n_points
            s[index[tuple(target)], i] = 1.0
        shifts.append(s)

    lowering = _fermion_ops(d)
    eye_pts = np.eye(npts, dtype=np.complex128)
    dirac = np.zeros((npts * spin_dim, npts * spin_dim), dtype=np.complex128)
    for mu in range(d):
        delta = shifts[mu] - eye_pts
        dirac += kron(delta, adjoint(lowering[mu]))
        dirac += kron(adjoint(delta), lowering[mu])

    parity = np.eye(1, dtype=np.complex128)
    sz = np.diag([1.0, -1.0]).astype(np.complex128)
    for _ in range(d):
        parity = kron(parity, sz)
    gamma = kron(eye_pts, parity)

    eye_spin = np.eye(spin_dim, dtype=np.complex128)
    basis = [np.eye(npts * spin_dim, dtype=np.complex128)]
    for pt in points[:-1]:  # the last indicator is 1 minus the others
        z = np.zeros((npts, npts), dtype=np.complex128)
        z[index[pt], index[pt]] = 1.0
        basis.append(kron(z, eye_spin))

    return make_triple(f"clifford-torus(N={n_points},d={d})", basis, dirac,
                       grading=gamma, tol=tol)


# ---------------------------------------------------------------------------
# Product of an even triple with a second triple
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductTriple:
    """Graded tensor product with its split Dirac and one-form decomposition.

    E1 and E2 carry orthonormal structured bases of kron-type matrices:
    E1 = span{omega x P} for omega in the first factor's one-forms and P in
    the second algebra, E2 = span{gamma a x u} likewise.  The bases are
    recorded both as matrices and as factor labels so downstream maps
    (flips, product connections) can act factorwise.
    """

    factor1: FiniteSpectralTriple
    factor2: FiniteSpectralTriple
    total: FiniteSpectralTriple
    d1_part: np.ndarray
    d2_part: np.ndarray
    gamma1: np.ndarray
    e1_basis: tuple          # matrices kron(omega_a, alg2_b)
    e2_basis: tuple          # matrices kron(gamma1 f_c, u_d)
    e1_factors: tuple        # (a, b) index pairs into (omega1_basis, alg2_frame)
    e2_factors: tuple        # (c, d) index pairs into (alg1_frame, omega2_basis)
    omega1_f1: tuple         # first-factor one-form ONB matrices
    omega1_f2: tuple         # second-factor one-form ONB matrices
    alg1_frame: tuple        # ONB of the represented first algebra
    alg2_frame: tuple        # ONB of the represented second algebra

    @property
    def e1_dim(self) -> int:
        return len(self.e1_basis)

    @property
    def e2_dim(self) -> int:
        return len(self.e2_basis)

    def one_form_frame(self) -> list[np.ndarray]:
        """Structured orthonormal basis of the total one-forms, E1 then E2."""
        return list(self.e1_basis) + list(self.e2_basis)


def build_product(t1: FiniteSpectralTriple, t2: FiniteSpectralTriple,
                  label=None) -> ProductTriple:
    """Tensor-product triple (A1 x A2, H1 x H2, D1 x 1 + gamma x D2).

    Requires a grading on t1; verifies D^2 = D1^2 x 1 + 1 x D2^2, the
    orthogonal splitting of one-forms into E1 + E2, and rejects a
    degenerate second factor (E2 would collapse into E1).
    """
    if t1.grading is None:
        raise TripleValidationError("first product factor must carry a grading")
    tol = t1.tol
    n1, n2 = t1.hilbert_dim, t2.hilbert_dim
    eye1, eye2 = np.eye(n1, dtype=np.complex128), np.eye(n2, dtype=np.complex128)

    d1_part = kron(t1.dirac, eye2)
    d2_part = kron(t1.grading, t2.dirac)
    dirac = d1_part + d2_part
    gamma1 = kron(t1.grading, eye2)

    basis = [kron(a, b) for a, b in
             itertools.product(t1.algebra_basis, t2.algebra_basis)]
    grading = None
    if t2.grading is not None:
        grading = kron(t1.grading, t2.grading)
    label = label or f"product({t1.label}, {t2.label})"
    total = make_triple(label, basis, dirac, grading=grading, tol=tol)

    d_sq = dirac @ dirac
    split = kron(t1.dirac @ t1.dirac, eye2) + kron(eye1, t2.dirac @ t2.dirac)
    res = hs_norm(d_sq - split)
    if res > tol.operator(op_norm(dirac) ** 2):
        raise TripleValidationError(
            f"{label}: D^2 does not split into the factor squares ({res:.3e})")

    omega1 = one_form_basis(t1)
    omega2 = one_form_basis(t2)
    if omega2.dim == 0:
        raise TripleValidationError(
            f"{label}: second factor has a degenerate calculus (no one-forms)")
    omega1_mats = omega1.matrices()
    omega2_mats = omega2.matrices()

    alg1_frame = span(list(t1.algebra_basis), tol.rank_tol).matrices()
    alg2_frame = span(list(t2.algebra_basis), tol.rank_tol).matrices()

    e1_basis, e1_factors = [], []
    for a, om in enumerate(omega1_mats):
        for b, p in enumerate(alg2_frame):
            e1_basis.append(kron(om, p))
            e1_factors.append((a, b))
    e2_basis, e2_factors = [], []
    for c, f in enumerate(alg1_frame):
        for dd, u in enumerate(omega2_mats):
            e2_basis.append(kron(t1.grading @ f, u))
            e2_factors.append((c, dd))

    e1 = span(e1_basis, tol.rank_tol)
    e2 = span(e2_basis, tol.rank_tol)
    if e1.dim != len(e1_basis) or e2.dim != len(e2_basis):
        raise TripleValidationError(f"{label}: structured one-form basis is rank-deficient")

    worst = max(abs(hs_inner_pair(x, y)) for x in e1_basis for y in e2_basis)
    if worst > tol.operator(1.0):
        raise TripleValidationError(
            f"{label}: E1 and E2 are not orthogonal (overlap {worst:.3e})")

    omega_total = one_form_basis(total)
    joint = span(e1_basis + e2_basis, tol.rank_tol)
    ok1, r1 = _mutual(joint, omega_total, tol)
    if not ok1:
        raise TripleValidationError(
            f"{label}: E1 + E2 does not reproduce the one-forms (residual {r1:.3e})")

    return ProductTriple(
        factor1=t1, factor2=t2, total=total,
        d1_part=d1_part, d2_part=d2_part, gamma1=gamma1,
        e1_basis=tuple(e1_basis), e2_basis=tuple(e2_basis),
        e1_factors=tuple(e1_factors), e2_factors=tuple(e2_factors),
        omega1_f1=tuple(omega1_mats), omega1_f2=tuple(omega2_mats),
        alg1_frame=tuple(alg1_frame), alg2_frame=tuple(alg2_frame))


def hs_inner_pair(x, y) -> complex:
    from .linalg import hs_inner
    return hs_inner(x, y)


def _mutual(s, t, tol: Tolerances):
    from .linalg import contains
    ok1, r1 = contains(s, t, tol.operator(1.0))
    ok2, r2 = contains(t, s, tol.operator(1.0))
    return ok1 and ok2, max(r1, r2)
