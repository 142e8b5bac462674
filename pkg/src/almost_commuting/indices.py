"""Topological indices of almost commuting matrices.

Every index comes back as an :class:`IndexResult` carrying a gap: the
distance of the relevant spectrum from the decision threshold. When that
distance collapses the index is undefined and an error is raised instead of
a value.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import linalg as la
from .errors import (
    BranchCut,
    CommutatorTooLarge,
    DeltaTooLarge,
    GapCollapse,
    NearSingular,
    NotSelfDual,
    NotSkew,
    RoundingUnsafe,
    UnderSampled,
)
from .representations import SIGMA, SurfaceKind, is_self_dual

GAP_TOL = 1e-8


class Method(str, Enum):
    BOTT_SPECTRAL = "bott-spec"
    BOTT_TRACE = "bott-trace"
    WINDING_DET = "winding-det"
    WINDING_LOG = "winding-log"
    KAPPA = "kappa"
    KAPPA1 = "kappa1"
    Z2 = "z2"


@dataclass(frozen=True)
class IndexResult:
    value: int
    gap: float
    method: Method
    raw: float = float("nan")
    extras: dict = field(default_factory=dict)

    def as_record(self):
        return {"value": int(self.value), "gap": float(self.gap),
                "method": self.method.value, "raw": float(self.raw)}


@dataclass(frozen=True)
class BottMatrices:
    B: np.ndarray
    S: np.ndarray


def _sphere_mats(t):
    if getattr(t, "kind", SurfaceKind.SPHERE) is not SurfaceKind.SPHERE:
        raise ValueError("expected a sphere representation")
    return t.mats


def bott_S(H1, H2, H3):
    """``S = sigma_1 (x) H1 + sigma_2 (x) H2 + sigma_3 (x) H3`` in block form."""
    X = H1 - 1j * H2
    Y = H1 + 1j * H2
    return np.block([[H3, X], [Y, -H3]])


def build_bott_matrices(t):
    """``S`` and ``B = (I + S) / 2`` for a sphere representation."""
    S = bott_S(*_sphere_mats(t))
    B = 0.5 * np.eye(S.shape[0]) + 0.5 * S
    return BottMatrices(B=B, S=S)


def bott_spectral(t, strict=False):
    """Bott index as the signature count of ``S``.

    The index is ``#{eig(B) > 1/2} - n``, which is defined whenever ``S`` is
    invertible. ``delta < 1/4`` guarantees this; by default larger ``delta``
    is accepted when the measured gap is present, and ``extras['certified']``
    records whether the a priori guarantee applies. ``strict=True`` raises
    :class:`DeltaTooLarge` instead.
    """
    H = _sphere_mats(t)
    delta = float(t.delta)
    certified = delta < 0.25
    if strict and not certified:
        raise DeltaTooLarge(f"delta = {delta:.4g} >= 1/4")
    n = H[0].shape[0]
    w = np.linalg.eigvalsh(bott_S(*H))
    gap = float(np.min(np.abs(w)))
    if gap < GAP_TOL:
        raise GapCollapse(f"S has an eigenvalue within {gap:.2e} of 0")
    value = int(np.count_nonzero(w > 0)) - n
    return IndexResult(value, gap, Method.BOTT_SPECTRAL, raw=float(value),
                       extras={"certified": certified, "delta": delta})


def chern_trace(H1, H2, H3):
    """``(3 / 2i) Tr(H1 [H2, H3])`` as a complex number."""
    # Tr(H1 (H2 H3 - H3 H2)) without forming the products with H1
    c = np.sum(H1.T * (H2 @ H3)) - np.sum(H1.T * (H3 @ H2))
    return 1.5 * c / 1j


def bott_trace(t):
    """Bott index by rounding the trace formula.

    Only trusted when ``n delta^2 < 1/64``; the rounding must also clear the
    ``32 n delta^2`` error budget.
    """
    H = _sphere_mats(t)
    n = H[0].shape[0]
    delta = float(t.delta)
    budget = 32 * n * delta ** 2
    if n * delta ** 2 >= 1 / 64:
        raise RoundingUnsafe(f"n delta^2 = {n * delta ** 2:.4g} >= 1/64")
    raw = chern_trace(*H).real
    value = int(np.rint(raw))
    if abs(raw - value) >= 0.5 - budget:
        raise RoundingUnsafe(f"raw trace {raw:.6g} too close to a rounding boundary")
    return IndexResult(value, 0.5 - abs(raw - value), Method.BOTT_TRACE, raw=float(raw),
                       extras={"budget": budget, "delta": delta})


def bott_stability_radius(t):
    """Summed perturbation norm that cannot change the index: ``sqrt(1 - 4 delta)``."""
    if t.delta >= 0.25:
        raise DeltaTooLarge(f"delta = {t.delta:.4g} >= 1/4")
    return float(np.sqrt(1 - 4 * t.delta))


# -- torus ------------------------------------------------------------------

def _unitary_pair(U, V):
    U = la.check_unitary(U, "U")
    V = la.check_unitary(V, "V")
    if U.shape != V.shape:
        raise la.DimensionMismatch("U and V differ in shape")
    return U, V


def _det_args(U, V, ts):
    UV = U @ V
    VU = V @ U
    M = (1 - ts)[:, None, None] * UV + ts[:, None, None] * VU
    sign, _ = np.linalg.slogdet(M)
    return np.angle(sign)


def winding_det(U, V, steps=1024, max_steps=2 ** 20):
    """Winding number of ``t -> det((1-t) UV + t VU)`` around 0.

    The loop closes since ``det(UV) = det(VU)``. The argument is tracked with
    principal-branch increments; sampling doubles until no increment exceeds
    ``pi/2``.
    """
    U, V = _unitary_pair(U, V)
    c = la.commutator_norm(U, V)
    if c >= 2:
        raise CommutatorTooLarge(f"||[U,V]|| = {c:.6g} >= 2")
    n = U.shape[0]
    chunk = int(max(8, min(4096, 4_000_000 // (n * n))))
    while True:
        total = 0.0
        worst = 0.0
        prev = None
        for start in range(0, steps + 1, chunk):
            ts = np.arange(start, min(start + chunk, steps + 1)) / steps
            a = _det_args(U, V, ts)
            if prev is not None:
                a = np.concatenate(([prev], a))
            d = np.angle(np.exp(1j * np.diff(a)))
            total += d.sum()
            if d.size:
                worst = max(worst, float(np.max(np.abs(d))))
            prev = a[-1]
        if worst <= np.pi / 2:
            break
        if steps * 2 > max_steps:
            raise UnderSampled(f"argument jump {worst:.3g} > pi/2 at {steps} steps")
        steps *= 2
    raw = total / (2 * np.pi)
    return IndexResult(int(np.rint(raw)), 2 - c, Method.WINDING_DET, raw=float(raw),
                       extras={"steps": steps})


def winding_tracelog(U, V):
    """Winding number as ``Tr(log(V U V* U*)) / (2 pi i)``, principal logarithm."""
    U, V = _unitary_pair(U, V)
    lam = np.linalg.eigvals(V @ U @ V.conj().T @ U.conj().T)
    gap = float(np.min(np.abs(lam + 1)))
    if gap < GAP_TOL:
        raise BranchCut("an eigenvalue of VUV*U* sits on -1")
    raw = np.angle(lam).sum() / (2 * np.pi)
    return IndexResult(int(np.rint(raw)), gap, Method.WINDING_LOG, raw=float(raw))


def _theta(z):
    """``z = e^{2 pi i theta}`` with theta in [0, 1)."""
    t = np.mod(np.angle(z) / (2 * np.pi), 1.0)
    return np.where(t >= 1.0, 0.0, t)


def f1(x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.5, 1 - 4 * x, -3 + 4 * x)


def g1(x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.5, 2 * np.sqrt(np.clip(2 * x - 4 * x * x, 0, None)), 0.0)


def h1(x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.5, 0.0, np.sqrt(np.clip(-8 + 24 * x - 16 * x * x, 0, None)))


def torus_to_sphere(theta1, theta2):
    """The map from the torus onto the sphere used to define kappa."""
    return np.stack([f1(theta1),
                     g1(theta1) + h1(theta1) * np.cos(2 * np.pi * theta2),
                     h1(theta1) * np.sin(2 * np.pi * theta2)])


def _count_above_half(Q, n, method, extras=None):
    Q = la.hermitian_part(Q)
    w = np.linalg.eigvalsh(Q)
    gap = float(np.min(np.abs(w - 0.5)))
    if gap < GAP_TOL:
        raise GapCollapse(f"{method.value}: eigenvalue within {gap:.2e} of 1/2")
    value = int(np.count_nonzero(w > 0.5)) - n
    return IndexResult(value, gap, method, raw=float(value), extras=extras or {})


def _functions_of(V, *fs):
    z, W = la.unitary_eig(V)
    th = _theta(z)
    Wh = W.conj().T
    return [(W * f(th)) @ Wh for f in fs]


def kappa_matrix(U, V):
    """``Q(U, V) = [[f(V), g(V) + h(V) U], [g(V) + U* h(V), I - f(V)]]``."""
    U, V = _unitary_pair(U, V)
    n = U.shape[0]
    f, g, h = _functions_of(
        V,
        lambda t: 0.5 - 0.5 * f1(t),
        lambda t: 0.5 * g1(t),
        lambda t: 0.5 * h1(t),
    )
    return np.block([[f, g + h @ U], [g + U.conj().T @ h, np.eye(n) - f]])


def kappa(U, V):
    """``#{eig Q(U,V) > 1/2} - n``."""
    Q = kappa_matrix(U, V)
    return _count_above_half(Q, U.shape[0], Method.KAPPA)


def kappa1_matrix(U, V):
    """``Q1(U, V) = [[l(V), U* r(V)], [r(V) U, I - l(V)]]`` with ``r = sqrt(l - l^2)``.

    ``l(e^{2 pi i x}) = x`` for ``x`` in [0, 1).
    """
    U, V = _unitary_pair(U, V)
    n = U.shape[0]
    ell, r = _functions_of(V, lambda t: t, lambda t: np.sqrt(np.clip(t - t * t, 0, None)))
    return np.block([[ell, U.conj().T @ r], [r @ U, np.eye(n) - ell]])


def kappa1(U, V):
    Q = kappa1_matrix(U, V)
    return _count_above_half(Q, U.shape[0], Method.KAPPA1)


# -- self-dual Z2 -----------------------------------------------------------

def z2_unitary(sd):
    """``(I + sigma_2 (x) Z) / sqrt(2)`` in the same block layout as ``S``."""
    m = sd.Z.shape[0]
    return (np.eye(2 * m) + np.kron(SIGMA[1], sd.Z)) / np.sqrt(2)


def z2_index(t, sd):
    """Sign of ``Pf(U* S U)`` for a self-dual sphere representation."""
    H = _sphere_mats(t)
    for r, h in enumerate(H):
        if not is_self_dual(h, sd):
            raise NotSelfDual(f"H{r + 1} is not self-dual")
    S = bott_S(*H)
    w = np.linalg.eigvalsh(S)
    gap = float(np.min(np.abs(w)))
    if gap < GAP_TOL:
        raise NearSingular(f"S has an eigenvalue within {gap:.2e} of 0")
    Uz = z2_unitary(sd)
    Bt = Uz.conj().T @ S @ Uz
    scale = max(1.0, la.operator_norm(Bt))
    asym = la.operator_norm(Bt + Bt.T)
    if asym > 1e-9 * scale:
        raise NotSkew(f"U*SU is not anti-symmetric ({asym:.2e})")
    Bt = (Bt - Bt.T) / 2
    value = la.pfaffian_sign(Bt)
    return IndexResult(value, gap, Method.Z2, raw=float(value), extras={"asymmetry": asym})
