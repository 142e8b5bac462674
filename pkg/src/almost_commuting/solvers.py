"""Pluggable solvers for the square: nearby commuting Hermitian contractions.

Each solver returns a unitary ``W`` and real diagonals ``k1, k2`` in
``[-1, 1]`` such that ``K_r = W diag(k_r) W*``. Representing the output this
way makes commutation and contractivity exact, and later pipeline stages
reuse ``W`` as the joint eigenbasis.

Two strategies are provided:

``jacobi`` (default)
    Approximate joint diagonalization by complex Givens rotations
    (Cardoso and Souloumiac, 1996), followed by reading off the diagonals.
``spectral-cluster``
    Diagonalize ``H1``, split its spectrum at gaps wider than ``w``, replace
    ``H1`` by cluster means and ``H2`` by its block-diagonal compression.
"""

from dataclasses import dataclass

import numba
import numpy as np

from . import linalg as la
from .errors import SolverFailure


@dataclass(frozen=True)
class SquareSolution:
    W: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    info: dict

    def matrices(self):
        Wh = self.W.conj().T
        return (self.W * self.k1) @ Wh, (self.W * self.k2) @ Wh


@numba.njit(cache=True)
def _top_eigvec3(G):
    """Unit eigenvector for the largest eigenvalue of a symmetric 3x3 matrix."""
    q = (G[0, 0] + G[1, 1] + G[2, 2]) / 3.0
    p1 = G[0, 1] ** 2 + G[0, 2] ** 2 + G[1, 2] ** 2
    p2 = (G[0, 0] - q) ** 2 + (G[1, 1] - q) ** 2 + (G[2, 2] - q) ** 2 + 2.0 * p1
    if p2 <= 1e-300:
        return 1.0, 0.0, 0.0
    p = np.sqrt(p2 / 6.0)
    b00 = (G[0, 0] - q) / p
    b11 = (G[1, 1] - q) / p
    b22 = (G[2, 2] - q) / p
    b01 = G[0, 1] / p
    b02 = G[0, 2] / p
    b12 = G[1, 2] / p
    det = (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02)
           + b02 * (b01 * b12 - b11 * b02))
    r = min(1.0, max(-1.0, det / 2.0))
    lam = q + 2.0 * p * np.cos(np.arccos(r) / 3.0)
    # eigenvector: largest cross product of two rows of G - lam I
    m00 = G[0, 0] - lam
    m11 = G[1, 1] - lam
    m22 = G[2, 2] - lam
    r0 = (m00, G[0, 1], G[0, 2])
    r1 = (G[0, 1], m11, G[1, 2])
    r2 = (G[0, 2], G[1, 2], m22)
    best = -1.0
    vx = 1.0
    vy = 0.0
    vz = 0.0
    for a, b in ((r0, r1), (r0, r2), (r1, r2)):
        cx = a[1] * b[2] - a[2] * b[1]
        cy = a[2] * b[0] - a[0] * b[2]
        cz = a[0] * b[1] - a[1] * b[0]
        nn = cx * cx + cy * cy + cz * cz
        if nn > best:
            best = nn
            vx, vy, vz = cx, cy, cz
    if best <= 1e-300:
        return 1.0, 0.0, 0.0
    nrm = np.sqrt(best)
    return vx / nrm, vy / nrm, vz / nrm


@numba.njit(cache=True)
def _offdiag_mass(A1, A2):
    n = A1.shape[0]
    off = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                off += abs(A1[i, j]) ** 2 + abs(A2[i, j]) ** 2
    return off


@numba.njit(cache=True)
def _jacobi_sweeps(A1, A2, V, rtol, atol, max_sweeps):
    """Rotate ``A1, A2`` in place towards diagonal form; accumulate into ``V``.

    Stops when a sweep lowers the off-diagonal mass by less than ``rtol``
    (relative) or the mass drops below ``atol``. Returns the sweep count.
    """
    n = A1.shape[0]
    G = np.zeros((3, 3))
    prev = _offdiag_mass(A1, A2)
    if prev <= atol:
        return 0
    for sweep in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                G[:, :] = 0.0
                for a in (A1, A2):
                    g0 = (a[p, p] - a[q, q]).real
                    g1 = (a[p, q] + a[q, p]).real
                    g2 = (1j * (a[q, p] - a[p, q])).real
                    G[0, 0] += g0 * g0
                    G[0, 1] += g0 * g1
                    G[0, 2] += g0 * g2
                    G[1, 1] += g1 * g1
                    G[1, 2] += g1 * g2
                    G[2, 2] += g2 * g2
                G[1, 0] = G[0, 1]
                G[2, 0] = G[0, 2]
                G[2, 1] = G[1, 2]
                x, y, z = _top_eigvec3(G)
                if x < 0:
                    x, y, z = -x, -y, -z
                c = np.sqrt(0.5 + 0.5 * x)
                s = 0.5 * (y - 1j * z) / c
                if abs(s) < 1e-16:
                    continue
                cs = np.conj(s)
                for a in (A1, A2):
                    for j in range(n):
                        ap = a[p, j]
                        aq = a[q, j]
                        a[p, j] = c * ap + cs * aq
                        a[q, j] = -s * ap + c * aq
                    for j in range(n):
                        ap = a[j, p]
                        aq = a[j, q]
                        a[j, p] = c * ap + s * aq
                        a[j, q] = -cs * ap + c * aq
                for j in range(n):
                    vp = V[j, p]
                    vq = V[j, q]
                    V[j, p] = c * vp + s * vq
                    V[j, q] = -cs * vp + c * vq
        off = _offdiag_mass(A1, A2)
        if off <= atol or prev - off <= rtol * prev:
            return sweep
        prev = off
    return max_sweeps


def _diagonals(W, H1, H2):
    Wh = W.conj().T
    k1 = np.real(np.einsum("ij,jk,ki->i", Wh, H1, W))
    k2 = np.real(np.einsum("ij,jk,ki->i", Wh, H2, W))
    return np.clip(k1, -1.0, 1.0), np.clip(k2, -1.0, 1.0)


class SquareSolver:
    """Base class. Subclasses implement :meth:`_solve`."""

    name = "base"

    def __init__(self, **params):
        self.params = params

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    def solve(self, H1, H2):
        """Commuting Hermitian contractions near ``(H1, H2)``.

        Returns
        -------
        SquareSolution
        """
        H1 = la.hermitian_part(la.check_hermitian(H1, "H1"))
        H2 = la.hermitian_part(la.check_hermitian(H2, "H2"))
        if H1.shape != H2.shape:
            raise la.DimensionMismatch("H1 and H2 differ in shape")
        if H1.shape[0] == 0:
            return SquareSolution(np.eye(0, dtype=complex), np.zeros(0), np.zeros(0), {})
        sol = self._solve(H1, H2)
        W = sol.W
        if not la.is_unitary(W, 1e-9):
            raise SolverFailure(f"{self.name}: basis lost unitarity")
        return sol

    def _solve(self, H1, H2):  # pragma: no cover - abstract
        raise NotImplementedError


class JacobiSolver(SquareSolver):
    """Joint approximate diagonalization by complex Jacobi rotations.

    Parameters
    ----------
    rtol : float
        Stop once a sweep reduces the off-diagonal mass by less than this
        fraction. The final displacement is insensitive to it below ~1e-4.
    max_sweeps : int
        Hard cap on the number of sweeps.
    """

    name = "jacobi"

    def __init__(self, rtol=1e-4, max_sweeps=2000):
        super().__init__(rtol=rtol, max_sweeps=max_sweeps)

    def _solve(self, H1, H2):
        n = H1.shape[0]
        A1 = np.array(H1, dtype=np.complex128, order="C")
        A2 = np.array(H2, dtype=np.complex128, order="C")
        V = np.eye(n, dtype=np.complex128)
        scale = max(1.0, float(np.sum(np.abs(A1) ** 2 + np.abs(A2) ** 2)))
        atol = (1e-15) ** 2 * scale
        sweeps = _jacobi_sweeps(A1, A2, V, self.params["rtol"], atol, self.params["max_sweeps"])
        # restore orthonormality lost to rounding over many rotations
        V = la.polar_unitary(V)[0]
        k1, k2 = _diagonals(V, H1, H2)
        return SquareSolution(V, k1, k2, {"sweeps": int(sweeps)})


class SpectralClusterSolver(SquareSolver):
    """Cluster the spectrum of ``H1`` and diagonalize ``H2`` block by block.

    Parameters
    ----------
    width : float, optional
        Minimum spectral gap that separates clusters. Defaults to
        ``2 sqrt(||[H1, H2]||)``.
    """

    name = "spectral-cluster"

    def __init__(self, width=None):
        super().__init__(width=width)

    def _solve(self, H1, H2):
        n = H1.shape[0]
        w = self.params["width"]
        if w is None:
            w = 2 * np.sqrt(la.commutator_norm(H1, H2))
        e, v = np.linalg.eigh(H1)
        W = np.zeros((n, n), dtype=complex)
        k1 = np.empty(n)
        k2 = np.empty(n)
        start = 0
        blocks = []
        for k in range(1, n + 1):
            if k == n or e[k] - e[k - 1] >= w:
                vb = v[:, start:k]
                hb = la.hermitian_part(vb.conj().T @ H2 @ vb)
                ew, ev = np.linalg.eigh(hb)
                W[:, start:k] = vb @ ev
                k1[start:k] = e[start:k].mean()
                k2[start:k] = ew
                blocks.append(k - start)
                start = k
        k1 = np.clip(k1, -1.0, 1.0)
        k2 = np.clip(k2, -1.0, 1.0)
        return SquareSolution(W, k1, k2, {"blocks": blocks, "width": float(w)})


SOLVERS = {
    JacobiSolver.name: JacobiSolver,
    SpectralClusterSolver.name: SpectralClusterSolver,
}

DEFAULT_SOLVER = JacobiSolver.name


def get_solver(spec=None, **params):
    """Return a solver instance from a name, an instance, or ``None`` (default)."""
    if isinstance(spec, SquareSolver):
        return spec
    name = DEFAULT_SOLVER if spec is None else str(spec)
    try:
        cls = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown square solver {name!r}; choose from {sorted(SOLVERS)}") from None
    return cls(**params)
