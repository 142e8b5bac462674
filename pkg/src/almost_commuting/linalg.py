"""Dense complex linear algebra used throughout the package.

Everything here is a thin, checked layer over numpy/scipy, apart from the
Pfaffian which numpy does not provide.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    ImaginaryResidue,
    NearSingular,
    NonFinite,
    NotHermitian,
    NotSkew,
    NotUnitary,
    OddDimension,
    TooNegative,
)

HERM_TOL = 1e-10
UNITARY_TOL = 1e-10
SKEW_TOL = 1e-9


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order and the unitary whose columns are eigenvectors."""

    values: np.ndarray
    basis: np.ndarray

    def reconstruct(self):
        return (self.basis * self.values) @ self.basis.conj().T


def as_matrix(A, name="A"):
    """Return ``A`` as a square complex ndarray, rejecting NaN/Inf."""
    M = np.asarray(A)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFinite(f"{name} has non-finite entries")
    return M.astype(complex, copy=False)


def operator_norm(A):
    """Largest singular value."""
    M = np.asarray(A)
    if not np.all(np.isfinite(M)):
        raise NonFinite("matrix has non-finite entries")
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def hermitian_norm(A):
    """Operator norm of a matrix known to be Hermitian (cheaper than an SVD)."""
    if A.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(A)
    return float(max(abs(w[0]), abs(w[-1])))


def commutator(A, B):
    return A @ B - B @ A


def commutator_norm(A, B):
    """``||AB - BA||`` in operator norm."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    return operator_norm(commutator(A, B))


def hermitian_part(A):
    return (A + A.conj().T) / 2


def is_hermitian(A, tol=HERM_TOL):
    A = np.asarray(A)
    scale = max(1.0, operator_norm(A))
    return operator_norm(A - A.conj().T) <= tol * scale


def check_hermitian(A, name="A", tol=HERM_TOL):
    M = as_matrix(A, name)
    if not is_hermitian(M, tol):
        raise NotHermitian(f"{name} is not Hermitian to {tol:g}")
    return M


def is_unitary(U, tol=UNITARY_TOL):
    U = np.asarray(U)
    n = U.shape[0]
    return operator_norm(U.conj().T @ U - np.eye(n)) <= tol


def check_unitary(U, name="U", tol=UNITARY_TOL):
    M = as_matrix(U, name)
    if not is_unitary(M, tol):
        raise NotUnitary(f"{name} is not unitary to {tol:g}")
    return M


def eig_hermitian(A):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    A : (n, n) array_like
        Hermitian to ``1e-10`` relative to ``max(1, ||A||)``.

    Returns
    -------
    EigenDecomposition
        Ascending eigenvalues and a unitary eigenbasis.
    """
    M = check_hermitian(A)
    w, v = np.linalg.eigh(hermitian_part(M))
    return EigenDecomposition(values=w, basis=v)


def matrix_function_hermitian(A, f):
    """Apply a real function to a Hermitian matrix through its spectrum."""
    eig = eig_hermitian(A)
    fw = np.asarray(f(eig.values))
    out = (eig.basis * fw) @ eig.basis.conj().T
    if np.isrealobj(fw):
        out = hermitian_part(out)
    return out


def unitary_eig(U):
    """Unit-modulus eigenvalues and a unitary eigenbasis of a unitary matrix.

    Uses the complex Schur form, which is diagonal for normal matrices, so the
    basis stays orthonormal even when eigenvalues repeat.
    """
    M = check_unitary(U)
    T, Z = sla.schur(M, output="complex")
    z = np.diag(T)
    z = z / np.abs(z)
    return z, Z


def matrix_function_unitary(U, f):
    """Apply ``f`` (a function on the unit circle) to a unitary matrix."""
    z, Z = unitary_eig(U)
    return (Z * np.asarray(f(z))) @ Z.conj().T


def sqrt_psd(A, neg_tol=1e-6):
    """Positive square root of a Hermitian matrix that is PSD up to noise.

    Eigenvalues in ``[-neg_tol, 0)`` are clamped to zero; anything more
    negative raises :class:`TooNegative`.
    """
    eig = eig_hermitian(A)
    if eig.values.size and eig.values[0] < -neg_tol:
        raise TooNegative(f"smallest eigenvalue {eig.values[0]:.3g} < -{neg_tol:g}")
    s = np.sqrt(np.clip(eig.values, 0.0, None))
    return hermitian_part((eig.basis * s) @ eig.basis.conj().T)


def polar_unitary(X):
    """Polar decomposition ``X = U P`` with ``U`` unitary and ``P = |X|``.

    Computed from the SVD ``X = W diag(s) V*`` as ``U = W V*``. On a
    rank-deficient ``X`` this pairs left and right singular vectors in
    descending singular-value order, which fixes ``U`` on the kernel in a
    deterministic way.
    """
    M = as_matrix(X, "X")
    W, s, Vh = np.linalg.svd(M)
    U = W @ Vh
    P = hermitian_part((Vh.conj().T * s) @ Vh)
    return U, P


def abs_matrix(X):
    """``|X| = (X* X)^{1/2}``."""
    return polar_unitary(X)[1]


# -- Pfaffian ---------------------------------------------------------------

def _check_skew(A):
    M = as_matrix(A)
    n = M.shape[0]
    if n % 2:
        raise OddDimension(f"dimension {n} is odd")
    scale = max(1.0, operator_norm(M))
    if operator_norm(M + M.T) > SKEW_TOL * scale:
        raise NotSkew("matrix is not anti-symmetric to 1e-9")
    return M


def _pfaffian_parts(A):
    """Return ``(phase, log|Pf|)`` by skew Gaussian elimination with full pivoting."""
    A = np.array(A, dtype=complex)
    A = (A - A.T) / 2
    n = A.shape[0]
    phase = 1.0 + 0j
    logabs = 0.0
    for k in range(0, n - 1, 2):
        sub = np.abs(np.triu(A[k:, k:], 1))
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        if sub[i - k, j - k] == 0.0:
            return 0.0 + 0j, -np.inf
        # move the pivot entry to (k, k+1); every nontrivial swap flips the sign
        if i != k:
            A[[k, i], :] = A[[i, k], :]
            A[:, [k, i]] = A[:, [i, k]]
            phase = -phase
            if j == k:
                j = i
        if j != k + 1:
            A[[k + 1, j], :] = A[[j, k + 1], :]
            A[:, [k + 1, j]] = A[:, [j, k + 1]]
            phase = -phase
        a = A[k, k + 1]
        phase *= a / abs(a)
        logabs += np.log(abs(a))
        if k + 2 < n:
            c0 = A[k + 2:, k].copy()
            c1 = A[k + 2:, k + 1].copy()
            A[k + 2:, k + 2:] += (np.outer(c1, c0) - np.outer(c0, c1)) / a
    return phase, logabs


def pfaffian(A):
    """Pfaffian of an anti-symmetric matrix of even dimension."""
    M = _check_skew(A)
    if M.shape[0] == 0:
        return 1.0 + 0j
    phase, logabs = _pfaffian_parts(M)
    return phase * np.exp(logabs)


def pfaffian_sign(A, rel_tol=1e-12, imag_tol=1e-6):
    """Sign of a Pfaffian that is expected to be real.

    Raises
    ------
    NearSingular
        If the smallest singular value of ``A`` is below ``rel_tol * ||A||``.
    ImaginaryResidue
        If the computed Pfaffian has relative imaginary part above ``imag_tol``.
    """
    M = _check_skew(A)
    n = M.shape[0]
    if n == 0:
        return 1
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < rel_tol * sv[0]:
        raise NearSingular(f"Pfaffian is numerically zero (sigma_min/sigma_max = {sv[-1] / max(sv[0], 1e-300):.2e})")
    phase, logabs = _pfaffian_parts(M)
    if not np.isfinite(logabs):
        raise NearSingular("Pfaffian is numerically zero")
    if abs(phase.imag) > imag_tol:
        raise ImaginaryResidue(f"Pfaffian has relative imaginary part {abs(phase.imag):.2e}")
    return 1 if phase.real > 0 else -1
