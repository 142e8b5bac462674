"""Approximate representations of the six surfaces and their defects.

A representation is a short tuple of matrices that satisfies a surface's
structural constraints exactly (Hermitian, unitary, contraction, ...) and its
commutation relations up to an operator-norm error ``delta``.

=========  ==================  ==============================================
kind       matrices            delta
=========  ==================  ==============================================
sphere     H1, H2, H3          max(||[Hr, Hs]||, ||H1^2 + H2^2 + H3^2 - I||)
torus      U, V (unitary)      ||[U, V]||
square     H1, H2              ||[H1, H2]||, each ||Hr|| <= 1
disk       X, ||X|| <= 1       ||[X*, X]||
annulus    X, 1/2 <= |X| <= 1  ||[X*, X]||
cylinder   U, K                ||[U, K]||, U unitary, K a Hermitian contraction
=========  ==================  ==============================================
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla

from . import linalg as la
from .errors import (
    BadComponent,
    DimensionMismatch,
    KindMismatch,
    NotAnnular,
    NotContraction,
    StructuralViolation,
)

STRUCT_TOL = 1e-10


class SurfaceKind(str, Enum):
    SPHERE = "sphere"
    TORUS = "torus"
    SQUARE = "square"
    DISK = "disk"
    ANNULUS = "annulus"
    CYLINDER = "cylinder"


ARITY = {
    SurfaceKind.SPHERE: 3,
    SurfaceKind.TORUS: 2,
    SurfaceKind.SQUARE: 2,
    SurfaceKind.DISK: 1,
    SurfaceKind.ANNULUS: 1,
    SurfaceKind.CYLINDER: 2,
}


@dataclass(frozen=True)
class SurfaceRep:
    """Matrices claimed to approximately represent a surface.

    Build these with :func:`make_rep`, which validates structure and measures
    ``delta``.
    """

    kind: SurfaceKind
    mats: tuple
    delta: float

    @property
    def n(self):
        return self.mats[0].shape[0]

    def __iter__(self):
        return iter(self.mats)

    def __getitem__(self, i):
        return self.mats[i]


@dataclass(frozen=True)
class SelfDualStructure:
    """The symplectic form ``Z = [[0, I], [-I, 0]]`` on ``C^{2N}``."""

    half: int
    Z: np.ndarray = field(repr=False)

    @classmethod
    def of_half(cls, half):
        I = np.eye(half)
        O = np.zeros((half, half))
        return cls(half=half, Z=np.block([[O, I], [-I, O]]))


def _norm(A):
    return la.operator_norm(A)


def _check_contraction(A, name):
    nrm = _norm(A)
    if nrm > 1 + STRUCT_TOL:
        raise NotContraction(f"{name} has norm {nrm:.12g} > 1")


def _check_structure(kind, mats):
    kind = SurfaceKind(kind)
    if len(mats) != ARITY[kind]:
        raise StructuralViolation(
            f"{kind.value} takes {ARITY[kind]} matrices, got {len(mats)}")
    mats = tuple(la.as_matrix(m, f"mats[{i}]") for i, m in enumerate(mats))
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise DimensionMismatch("all matrices must have the same shape")
    if kind is SurfaceKind.SPHERE:
        for i, h in enumerate(mats):
            la.check_hermitian(h, f"H{i + 1}")
    elif kind is SurfaceKind.TORUS:
        la.check_unitary(mats[0], "U")
        la.check_unitary(mats[1], "V")
    elif kind is SurfaceKind.SQUARE:
        for i, h in enumerate(mats):
            la.check_hermitian(h, f"H{i + 1}")
            _check_contraction(h, f"H{i + 1}")
    elif kind is SurfaceKind.DISK:
        _check_contraction(mats[0], "X")
    elif kind is SurfaceKind.ANNULUS:
        s = np.linalg.svd(mats[0], compute_uv=False)
        if s.size and (s[0] > 1 + STRUCT_TOL or s[-1] < 0.5 - STRUCT_TOL):
            raise NotAnnular(
                f"singular values of X lie in [{s[-1]:.6g}, {s[0]:.6g}], not [1/2, 1]")
    elif kind is SurfaceKind.CYLINDER:
        la.check_unitary(mats[0], "U")
        la.check_hermitian(mats[1], "K")
        _check_contraction(mats[1], "K")
    return kind, mats


def defect_breakdown(kind, mats):
    """Every norm that enters ``delta``, keyed by a short label."""
    kind, mats = _check_structure(kind, mats)
    out = {}
    if kind is SurfaceKind.SPHERE:
        H = mats
        for r, s in ((0, 1), (1, 2), (0, 2)):
            out[f"[H{r + 1},H{s + 1}]"] = la.commutator_norm(H[r], H[s])
        n = H[0].shape[0]
        out["sum_sq"] = _norm(H[0] @ H[0] + H[1] @ H[1] + H[2] @ H[2] - np.eye(n))
    elif kind in (SurfaceKind.TORUS, SurfaceKind.SQUARE, SurfaceKind.CYLINDER):
        out["[A,B]"] = la.commutator_norm(mats[0], mats[1])
    else:
        X = mats[0]
        out["[X*,X]"] = la.commutator_norm(X.conj().T, X)
    return out


def measure_defect(kind, mats):
    """Smallest ``delta`` for which ``mats`` is a delta-representation of ``kind``.

    Structural constraints are checked first and raise rather than being
    folded into ``delta``.
    """
    return max(defect_breakdown(kind, mats).values())


def make_rep(kind, mats):
    """Validate ``mats`` and return a :class:`SurfaceRep` with measured delta."""
    kind, mats = _check_structure(kind, mats)
    return SurfaceRep(kind=kind, mats=mats, delta=measure_defect(kind, mats))


# -- constructors -----------------------------------------------------------

def spin_matrices(two_s):
    """Spin-``S`` matrices ``(Sx, Sy, Sz)`` for ``S = two_s / 2``.

    ``Sz`` is diagonal with entries ``S, S-1, ..., -S``.
    """
    if two_s < 1:
        raise ValueError("two_s must be >= 1")
    S = two_s / 2
    m = S - np.arange(two_s + 1)
    # raising operator: <m+1|S+|m> = sqrt(S(S+1) - m(m+1))
    sp = np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1))
    Sp = np.diag(sp, 1).astype(complex)
    Sx = (Sp + Sp.conj().T) / 2
    Sy = (Sp - Sp.conj().T) / 2j
    Sz = np.diag(m).astype(complex)
    return Sx, Sy, Sz


def spin_triple(two_s):
    """``H_r = S^r / sqrt(S(S+1))``, a sphere representation with delta about 1/S."""
    S = two_s / 2
    c = np.sqrt(S * (S + 1))
    return make_rep(SurfaceKind.SPHERE, [m / c for m in spin_matrices(two_s)])


def clock_shift(n):
    """Cyclic shift ``S_n`` and clock ``Omega_n = diag(e^{2 pi i j/n})``, as ``(U, V)``.

    ``Omega S Omega* S* = e^{2 pi i/n} I`` and the winding number is 1.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    shift = np.roll(np.eye(n, dtype=complex), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(1, n + 1) / n))
    return make_rep(SurfaceKind.TORUS, [shift, clock])


SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def self_dual_doubled_triple(two_s):
    """Two copies of the spin triple, arranged to be self-dual.

    ``H1 = I (x) Sx/c``, ``H2 = sigma_2 (x) Sy/c``, ``H3 = I (x) Sz/c``.
    Its Bott index is 0 but its Pfaffian index is -1.
    """
    S = two_s / 2
    c = np.sqrt(S * (S + 1))
    Sx, Sy, Sz = spin_matrices(two_s)
    I2 = np.eye(2)
    mats = [np.kron(I2, Sx) / c, np.kron(SIGMA[1], Sy) / c, np.kron(I2, Sz) / c]
    return make_rep(SurfaceKind.SPHERE, mats), SelfDualStructure.of_half(two_s + 1)


def is_self_dual(A, sd):
    """True when ``Z A^T Z = -A`` to ``1e-10`` relative."""
    A = la.as_matrix(A)
    if A.shape != sd.Z.shape:
        raise DimensionMismatch(f"matrix {A.shape} vs structure {sd.Z.shape}")
    scale = max(1.0, _norm(A))
    return _norm(sd.Z @ A.T @ sd.Z + A) <= 1e-10 * scale


def is_real(A):
    return float(np.max(np.abs(np.imag(A)), initial=0.0)) <= 1e-12


def direct_sum(a, b):
    """Block-diagonal stack of two representations of the same surface."""
    if a.kind != b.kind:
        raise KindMismatch(f"{a.kind.value} vs {b.kind.value}")
    mats = [sla.block_diag(x, y) for x, y in zip(a.mats, b.mats)]
    return make_rep(a.kind, mats)


def negate_component(a, r):
    """Replace ``H_r`` by ``-H_r`` (``r`` in 1..3). Flips the Bott index."""
    if a.kind is not SurfaceKind.SPHERE:
        raise KindMismatch("negate_component needs a sphere representation")
    if r not in (1, 2, 3):
        raise BadComponent(f"component must be 1, 2 or 3, got {r}")
    mats = list(a.mats)
    mats[r - 1] = -mats[r - 1]
    return SurfaceRep(kind=a.kind, mats=tuple(mats), delta=a.delta)


def negate_all(a):
    """``(-H1, -H2, -H3)``; an odd number of sign flips, so the index flips."""
    return SurfaceRep(kind=a.kind, mats=tuple(-m for m in a.mats), delta=a.delta)


def transpose_rep(a):
    return make_rep(a.kind, [m.T for m in a.mats])
