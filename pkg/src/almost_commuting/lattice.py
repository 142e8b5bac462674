"""Tight-binding quantum Hall model on a sphere and its band diagnostics.

Sites sit on rings of constant latitude. Nearest neighbours (chord distance at
most ``R``) are joined by hoppings whose phases mimic a magnetic monopole at
the centre. Compressing the three position operators into a gapped band gives
an almost commuting Hermitian triple whose Bott index is the Chern number of
the band.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import linalg as la
from .errors import EmptyBand, FermiOnEigenvalue, IndexNonzero, IndexUndefined, ImaginaryResidue, InfeasibleTarget
from .indices import bott_S, bott_spectral, chern_trace
from .representations import SurfaceKind, make_rep
from .transforms import solve_sphere

DEFAULT_R = float(np.sqrt(0.07))


@dataclass(frozen=True)
class Sites:
    theta: np.ndarray
    phi: np.ndarray
    xyz: np.ndarray
    counts: np.ndarray

    def __len__(self):
        return self.theta.size


@dataclass(frozen=True)
class LatticeModel:
    """Sites plus Hamiltonian parameters.

    ``disorder`` scales a uniform(-1/2, 1/2) perturbation of each hopping
    amplitude; ``seed`` fixes it.
    """

    sites: Sites
    L: float = 1.0
    R: float = DEFAULT_R
    J: float = 1.0
    disorder: float = 0.0
    n_monopole: int = 100
    seed: int = 0

    @property
    def n(self):
        return len(self.sites)

    @property
    def positions(self):
        return self.L * self.sites.xyz


def build_sites(latitudes=29, total_target=560):
    """Rings at ``theta_k = k pi / (latitudes + 1)`` with sizes proportional to ``sin theta_k``.

    Ring sizes are ``max(1, floor(c sin theta_k))`` for the largest ``c`` that
    keeps the total at or below ``total_target``; the shortfall goes to the
    largest ring. Azimuths on each ring are ``2 pi j / m``.
    """
    if latitudes < 1:
        raise ValueError("latitudes must be >= 1")
    if total_target < latitudes:
        raise InfeasibleTarget(f"cannot place {total_target} sites on {latitudes} rings")
    theta = np.arange(1, latitudes + 1) * np.pi / (latitudes + 1)
    w = np.sin(theta)

    def counts_for(c):
        return np.maximum(1, np.floor(c * w)).astype(int)

    lo, hi = 0.0, 2.0 * total_target / w.min()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if counts_for(mid).sum() <= total_target:
            lo = mid
        else:
            hi = mid
    counts = counts_for(lo)
    deficit = total_target - counts.sum()
    if deficit < 0:
        raise InfeasibleTarget("ring rounding overshoots the target")
    counts[np.argmax(counts)] += deficit
    th = np.repeat(theta, counts)
    ph = np.concatenate([2 * np.pi * np.arange(m) / m for m in counts])
    xyz = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)
    return Sites(theta=th, phi=ph, xyz=xyz, counts=counts)


def make_model(latitudes=29, total_target=560, **params):
    return LatticeModel(sites=build_sites(latitudes, total_target), **params)


def _wrap(a):
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - a, 2 * np.pi)


def edges(m):
    """Pairs ``i < j`` within chord distance ``R``, in lexicographic order."""
    tree = cKDTree(m.positions)
    pairs = tree.query_pairs(m.R * (1 + 1e-12), output_type="ndarray")
    if pairs.size == 0:
        return np.zeros((0, 2), dtype=int)
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def hopping_phase(m, i, j):
    """``n_monopole * wrap(phi_i - phi_j) * cos((theta_i + theta_j) / 2)``."""
    s = m.sites
    return m.n_monopole * _wrap(s.phi[i] - s.phi[j]) * np.cos(0.5 * (s.theta[i] + s.theta[j]))


def edge_noise(seed, i, j):
    """Uniform(-1/2, 1/2) draw for edge ``(i, j)``, independent of evaluation order."""
    return np.random.default_rng((int(seed), int(i), int(j))).uniform(-0.5, 0.5)


def build_hamiltonian(m):
    """Hermitian hopping matrix ``H_ij = -J_ij exp(i omega_ij)`` for ``i < j``.

    ``J_ij = J + disorder * u_ij`` and ``H_ji = conj(H_ij)``.
    """
    E = edges(m)
    n = m.n
    H = np.zeros((n, n), dtype=complex)
    if E.size == 0:
        return H
    i, j = E[:, 0], E[:, 1]
    amp = np.full(i.size, float(m.J))
    if m.disorder:
        amp = amp + m.disorder * np.array([edge_noise(m.seed, a, b) for a, b in E])
    h = -amp * np.exp(1j * hopping_phase(m, i, j))
    H[i, j] = h
    H[j, i] = np.conj(h)
    return H


@dataclass
class BandData:
    """Occupied band below ``fermi``.

    ``vectors`` holds the occupied eigenvectors as columns; ``P`` is built
    from them on demand.
    """

    H: np.ndarray
    spectrum: np.ndarray
    fermi: float
    rank: int
    vectors: np.ndarray
    basis: np.ndarray = field(repr=False, default=None)

    @property
    def P(self):
        V = self.vectors
        return V @ V.conj().T

    @property
    def gap(self):
        """Distance between the highest occupied and lowest empty level."""
        e = self.spectrum
        lo = e[self.rank - 1] if self.rank > 0 else -np.inf
        hi = e[self.rank] if self.rank < e.size else np.inf
        return float(hi - lo)


def _band_from_eig(H, e, v, fermi):
    if e.size and np.min(np.abs(e - fermi)) < 1e-8:
        raise FermiOnEigenvalue(f"fermi level {fermi} sits on an eigenvalue")
    rank = int(np.count_nonzero(e < fermi))
    return BandData(H=H, spectrum=e, fermi=float(fermi), rank=rank, vectors=v[:, :rank], basis=v)


def spectral_projector(H, fermi):
    """Projector onto eigenstates of ``H`` below ``fermi``."""
    eig = la.eig_hermitian(H)
    return _band_from_eig(H, eig.values, eig.basis, fermi)


def band_compress(b, m):
    """``(P X P, P Y P, P Z P) / L`` written in the band's eigenbasis."""
    if b.rank < 1:
        raise EmptyBand("no states below the fermi level")
    V = b.vectors
    Vh = V.conj().T
    mats = [la.hermitian_part(Vh @ (m.sites.xyz[:, r, None] * V)) for r in range(3)]
    return make_rep(SurfaceKind.SPHERE, mats)


def hall_trace(t):
    """``(3 / 2i) Tr(H1 [H2, H3])``, which is real for Hermitian input."""
    c = chern_trace(*t.mats)
    if abs(c.imag) > 1e-9 * max(1.0, abs(c.real)):
        raise ImaginaryResidue(f"trace has imaginary part {c.imag:.3e}")
    return float(c.real)


def triple_stats(t):
    """Commutator norms, smallest eigenvalue of the sum of squares, B-spectrum split."""
    H = t.mats
    n = H[0].shape[0]
    comm = max(la.commutator_norm(H[a], H[b]) for a, b in ((0, 1), (1, 2), (0, 2)))
    sos = np.linalg.eigvalsh(H[0] @ H[0] + H[1] @ H[1] + H[2] @ H[2])
    wb = 0.5 + 0.5 * np.linalg.eigvalsh(bott_S(*H))
    below = wb[wb < 0.5]
    above = wb[wb > 0.5]
    lo = float(below.max()) if below.size else 0.0
    hi = float(above.min()) if above.size else 1.0
    return {"max_comm": comm, "sos_min_eig": float(sos[0]), "b_below": lo, "b_above": hi,
            "separation": hi - lo, "n": n}


SWEEP_COLUMNS = ["fermi", "rank", "bott", "gap", "max_comm", "sos_min_eig", "hall_raw", "status"]


def bott_sweep(m, fermis, H=None):
    """Bott index of the band below each Fermi level.

    Returns one dict per level with keys :data:`SWEEP_COLUMNS`. ``gap`` is the
    separation between the eigenvalues of ``B`` just below and just above
    1/2. Rows whose index is undefined keep ``bott = None`` and name the
    failure in ``status``.
    """
    if H is None:
        H = build_hamiltonian(m)
    eig = la.eig_hermitian(H)
    rows = []
    for f in fermis:
        row = dict.fromkeys(SWEEP_COLUMNS)
        row["fermi"] = float(f)
        try:
            band = _band_from_eig(H, eig.values, eig.basis, f)
            row["rank"] = band.rank
            t = band_compress(band, m)
            st = triple_stats(t)
            row.update(gap=st["separation"], max_comm=st["max_comm"], sos_min_eig=st["sos_min_eig"])
            row["hall_raw"] = hall_trace(t)
            row["delta"] = t.delta
            row["bott"] = bott_spectral(t).value
            row["status"] = "ok"
        except (IndexUndefined, EmptyBand) as exc:
            row["status"] = type(exc).__name__
        rows.append(row)
    return rows


# -- Wannier functions ------------------------------------------------------

@dataclass
class WannierReport:
    """Localized orthonormal basis of a band with trivial index.

    Attributes
    ----------
    vectors : ndarray
        Site-space Wannier functions as columns.
    centers : ndarray
        ``(rank, 3)`` joint eigenvalues of the commuting triple, times ``L``.
    variances : ndarray
        ``(rank, 3)`` position variances of each function.
    l_loc : float
        Largest spread ``sqrt(sum_r var_r)`` over the band.
    d2_bound : float
        ``max_a ||(X - X') w_a||`` over the three coordinates.
    """

    vectors: np.ndarray
    centers: np.ndarray
    variances: np.ndarray
    l_loc: float
    l_loc_mean: float
    d2_bound: float
    solve: object = None


def wannier_functions(b, m, s=None):
    """Wannier functions from an exactly commuting triple near the compressed positions.

    Raises :class:`IndexNonzero` for a band with nonzero Bott index, which
    admits no such basis.
    """
    t = band_compress(b, m)
    idx = bott_spectral(t)
    if idx.value != 0:
        raise IndexNonzero(f"band has Bott index {idx.value}")
    rep = solve_sphere(t, s)
    W = rep.basis
    vecs = b.vectors @ W
    centers = m.L * np.stack([rep.eigs["h1"], rep.eigs["h2"], rep.eigs["h3"]], axis=1)
    pos = m.positions
    prob = np.abs(vecs) ** 2
    mean = prob.T @ pos
    second = prob.T @ pos ** 2
    var = second - mean ** 2
    spread = np.sqrt(np.clip(var.sum(axis=1), 0, None))
    d2 = 0.0
    for r in range(3):
        resid = pos[:, r, None] * vecs - vecs * centers[:, r]
        d2 = max(d2, float(np.max(np.linalg.norm(resid, axis=0))))
    return WannierReport(vectors=vecs, centers=centers, variances=var, l_loc=float(spread.max()),
                         l_loc_mean=float(spread.mean()), d2_bound=d2, solve=rep)


def projector_locality_check(b, m, radius=None):
    """Commutators of the band projector with positions and a site-density count."""
    P = b.P
    pos = m.positions
    comms = [la.operator_norm(pos[:, r, None] * P - P * pos[None, :, r]) for r in range(3)]
    radius = m.R if radius is None else radius
    tree = cKDTree(pos)
    counts = np.array([len(c) for c in tree.query_ball_point(pos, radius)])
    return {"comm_x": comms[0], "comm_y": comms[1], "comm_z": comms[2],
            "max_comm": max(comms), "radius": float(radius), "max_sites_within": int(counts.max()),
            "gap": b.gap}
