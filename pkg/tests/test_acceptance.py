"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s -v`` to see the verdict lines
(they are printed even without ``-s``).
"""

import time

import numpy as np
import pytest

from almost_commuting import linalg as la
from almost_commuting.errors import GapCollapse, IndexUndefined
from almost_commuting.indices import (
    bott_spectral,
    bott_trace,
    kappa,
    kappa1,
    winding_det,
    winding_tracelog,
    z2_index,
)
from almost_commuting.lattice import (
    band_compress,
    bott_sweep,
    build_hamiltonian,
    hall_trace,
    make_model,
    spectral_projector,
)
from almost_commuting.representations import (
    SelfDualStructure,
    clock_shift,
    direct_sum,
    is_self_dual,
    make_rep,
    measure_defect,
    negate_all,
    self_dual_doubled_triple,
    spin_triple,
)
from almost_commuting.transforms import cylinder_to_sphere, doubled_cut_example, solve_sphere
from almost_commuting.errors import IndexNonzero

from .test_linalg import SEED42_EIGS, pfaffian_recursive, seed42_hermitian


@pytest.fixture
def verdict(capsys):
    def emit(cid, ok, detail):
        with capsys.disabled():
            print(f"\n[{cid}] {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def safe(fn, *args):
    """Index value, or the error class name when the index is undefined."""
    try:
        return fn(*args).value
    except IndexUndefined as exc:
        return type(exc).__name__


def commuting_pair(rng, n):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    a, b = rng.uniform(0, 2 * np.pi, size=(2, n))
    return (Q * np.exp(1j * a)) @ Q.conj().T, (Q * np.exp(1j * b)) @ Q.conj().T


TORUS = {"winding_det": winding_det, "winding_tracelog": winding_tracelog,
         "kappa": kappa, "kappa1": kappa1}


# -- 1 ----------------------------------------------------------------------

def test_c01_spin_bott(verdict):
    values = {}
    t0 = time.perf_counter()
    for S in (2, 10, 20, 200):
        start = time.perf_counter()
        values[S] = bott_spectral(spin_triple(2 * S)).value
        if S == 200:
            t200 = time.perf_counter() - start
    ok = all(v == 1 for v in values.values()) and t200 < 10
    verdict("C01", ok, f"bott_spectral(spin S) = {values}; S=200 took {t200:.2f}s (< 10s); "
                       f"total {time.perf_counter() - t0:.2f}s")
    assert ok


# -- 2 ----------------------------------------------------------------------

def test_c02_trace_formula(verdict):
    t = spin_triple(400)
    n, delta = t.n, t.delta
    tr = bott_trace(t)
    sp = bott_spectral(t)
    budget = 32 * n * delta ** 2
    ok = (n * delta ** 2 < 1 / 64 and tr.value == sp.value == 1 and abs(tr.raw - 1) <= budget)
    verdict("C02", ok, f"S=200: n delta^2={n * delta ** 2:.4g}, trace={tr.value}, spectral={sp.value}, "
                       f"|raw-1|={abs(tr.raw - 1):.3g} <= {budget:.3g}")
    assert ok


# -- 3 ----------------------------------------------------------------------

def _torus_table():
    table = {}
    times = {}
    for n in (4, 8, 16, 64):
        U, V = clock_shift(n).mats
        for name, fn in TORUS.items():
            t0 = time.perf_counter()
            table[(name, n)] = safe(fn, U, V)
            times[(name, n)] = time.perf_counter() - t0
    rng = np.random.default_rng(2024)
    commuting = {}
    for k in range(5):
        U, V = commuting_pair(rng, 4 + 3 * k)
        for name, fn in TORUS.items():
            commuting[(name, k)] = safe(fn, U, V)
    return table, times, commuting


def test_c03_torus_cross_validation(verdict):
    table, times, commuting = _torus_table()
    bad = {k: v for k, v in table.items() if v != 1}
    slow = {k: t for k, t in times.items() if t >= 5}
    bad_comm = {k: v for k, v in commuting.items() if v != 0}
    ok = not bad and not slow and not bad_comm
    detail = (f"clock_shift n in (4,8,16,64): {len(table) - len(bad)}/{len(table)} equal 1"
              + (f"; mismatches {bad}" if bad else "")
              + f"; commuting pairs {len(commuting) - len(bad_comm)}/{len(commuting)} equal 0"
              + f"; slowest {max(times.values()):.2f}s")
    verdict("C03", ok, detail)
    # the one unattainable subcase is asserted separately below
    known = {("kappa", 4)}
    assert set(bad) <= known
    assert not slow and not bad_comm


@pytest.mark.xfail(strict=True, raises=GapCollapse,
                   reason="Q(S_4, Omega_4) has an eigenvalue exactly at 1/2, so kappa is undefined at n=4")
def test_c03_kappa_clock_shift_4():
    U, V = clock_shift(4).mats
    assert kappa(U, V).value == 1


# -- 4 ----------------------------------------------------------------------

def test_c04_commutator_sharpness(verdict):
    errs = {n: abs(measure_defect("torus", clock_shift(n).mats) - 2 * np.sin(np.pi / n))
            for n in range(3, 65)}
    worst = max(errs.values())
    ok = worst <= 1e-12
    verdict("C04", ok, f"max |defect - 2 sin(pi/n)| over n=3..64 is {worst:.2e} (<= 1e-12)")
    assert ok


# -- 5 ----------------------------------------------------------------------

def test_c05_z2(verdict):
    doubled = {}
    bott = {}
    for S in (2, 8, 20):
        rep, sd = self_dual_doubled_triple(2 * S)
        doubled[S] = z2_index(rep, sd).value
        bott[S] = bott_spectral(rep).value
    rng = np.random.default_rng(5)
    commuting = []
    for half in (3, 5, 8):
        p = rng.normal(size=(3, half))
        p /= np.linalg.norm(p, axis=0)
        t = make_rep("sphere", [np.kron(np.eye(2), np.diag(x)) for x in p])
        sd = SelfDualStructure.of_half(half)
        assert all(is_self_dual(h, sd) for h in t.mats)
        commuting.append((z2_index(t, sd).value, bott_spectral(t).value))
    ok = (all(v == -1 for v in doubled.values()) and all(v == 0 for v in bott.values())
          and all(c == (1, 0) for c in commuting))
    verdict("C05", ok, f"z2 doubled {doubled}, bott doubled {bott}; commuting (z2, bott) {commuting}")
    assert ok


# -- 6 ----------------------------------------------------------------------

def _self_dual_noise(rng, sd, size):
    m = sd.Z.shape[0]
    A = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    A = (A + A.conj().T) / 2
    A = (A - sd.Z @ A.T @ sd.Z) / 2
    return A * (size / la.operator_norm(A))


def test_c06_z2_stability(verdict):
    summary = {}
    ok = True
    for S in (8, 20):
        rep, sd = self_dual_doubled_triple(2 * S)
        budget = 0.9 * np.sqrt(1 - 4 / S)
        rng = np.random.default_rng(S)
        values = []
        for _ in range(30):
            sizes = rng.dirichlet(np.ones(3)) * budget
            mats = [h + _self_dual_noise(rng, sd, s) for h, s in zip(rep.mats, sizes)]
            assert all(is_self_dual(h, sd) for h in mats)
            values.append(safe(z2_index, make_rep("sphere", mats), sd))
        summary[S] = f"{values.count(-1)}/30 keep -1 (budget {budget:.3f})"
        ok &= all(v == -1 for v in values)
    verdict("C06", ok, f"{summary}")
    assert ok


# -- 7 ----------------------------------------------------------------------

def test_c07_obstruction(verdict):
    try:
        solve_sphere(spin_triple(40))
        refused = False
    except IndexNonzero:
        refused = True
    s = spin_triple(40)
    t = direct_sum(s, negate_all(s))
    rep = solve_sphere(t)
    H = rep.output.mats
    comm = max(la.commutator_norm(H[a], H[b]) for a, b in ((0, 1), (1, 2), (0, 2)))
    sos = la.operator_norm(sum(h @ h for h in H) - np.eye(t.n))
    disp = rep.max_displacement
    ok = refused and comm <= 1e-10 and sos <= 1e-10 and disp < 0.8
    verdict("C07", ok, f"spin S=20 refused={refused}; doubled: commutators {comm:.1e}, "
                       f"||sum H^2 - I|| {sos:.1e}, displacement {disp:.4f} (< 0.8; "
                       f"per matrix {[round(d, 4) for d in rep.displacement]})")
    assert ok


# -- 8 ----------------------------------------------------------------------

def test_c08_pipeline_exactness(verdict):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(30):
        n = int(rng.integers(2, 12))
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        U = (Q * np.exp(1j * rng.uniform(0, 2 * np.pi, n))) @ Q.conj().T
        K = la.hermitian_part((Q * rng.uniform(-1, 1, n)) @ Q.conj().T)
        worst = max(worst, cylinder_to_sphere(U, K).delta)
    ok = worst <= 1e-10
    verdict("C08", ok, f"max defect over 30 commuting (U, K): {worst:.2e} (<= 1e-10)")
    assert ok


# -- 9 ----------------------------------------------------------------------

def test_c09_cut_down(verdict):
    cut = doubled_cut_example(40)
    r = bott_spectral(cut)
    ok = r.value == 1 and r.gap > 0.1
    verdict("C09", ok, f"doubled_cut_example(40): bott {r.value}, gap {r.gap:.4f} (> 0.1), "
                       f"delta {cut.delta:.4f}")
    assert ok


# -- 10-12: lattice ---------------------------------------------------------

@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    m = make_model(29, 560, n_monopole=100, disorder=0.0)
    H = build_hamiltonian(m)
    rows = {r["fermi"]: r for r in bott_sweep(m, [-1.0, -2.0, -3.0, -4.0], H=H)}
    return m, H, rows, time.perf_counter() - t0


def test_c10_lattice(verdict, sweep):
    m, H, rows, elapsed = sweep
    bott = {f: r["bott"] for f, r in rows.items()}
    r1, r4 = rows[-1.0], rows[-4.0]
    checks = {
        "bott": bott == {-1.0: 1, -2.0: 1, -3.0: 1, -4.0: 0},
        "gap(-1)>0.5": r1["gap"] > 0.5,
        "max_comm(-1)<0.1": r1["max_comm"] < 0.1,
        "sos(-1)>0.9": r1["sos_min_eig"] > 0.9,
        "sos(-4)<0.7": r4["sos_min_eig"] < 0.7,
        "rank(-1)=200+-5": abs(r1["rank"] - 200) <= 5,
        "time<120s": elapsed < 120,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    verdict("C10", ok, f"n={m.n}, bott {bott}, rank {r1['rank']}, gap {r1['gap']:.4f}, "
                       f"max_comm {r1['max_comm']:.4f}, sos {r1['sos_min_eig']:.4f}/{r4['sos_min_eig']:.4f}, "
                       f"{elapsed:.1f}s" + (f"; failed {failed}" if failed else ""))
    assert ok


def test_c11_disorder(verdict):
    values = {}
    for seed in range(1, 6):
        m = make_model(29, 560, n_monopole=100, disorder=1.0, seed=seed)
        values[seed] = bott_sweep(m, [-1.0])[0]["bott"]
    ok = all(v == 1 for v in values.values())
    verdict("C11", ok, f"disorder 1, bott at fermi -1 by seed: {values}")
    assert ok


def test_c12_hall_trace(verdict, sweep):
    m, H, rows, _ = sweep
    t = band_compress(spectral_projector(H, -1.0), m)
    hall = hall_trace(t)
    bott = bott_spectral(t).value
    budget = 32 * t.n * t.delta ** 2
    ok = abs(hall - bott) <= budget
    verdict("C12", ok, f"hall {hall:.5f}, bott {bott}, |diff| {abs(hall - bott):.4f} <= {budget:.3f}")
    assert ok


# -- 13 ---------------------------------------------------------------------

def test_c13_oracles(verdict):
    agree = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(6, 6))
        A = A - A.T
        agree += la.pfaffian_sign(A) == int(np.sign(pfaffian_recursive(A.tolist())))
    H = seed42_hermitian()
    roots = np.sort(np.roots(np.poly(H)).real)
    vals = la.eig_hermitian(H).values
    err = max(np.max(np.abs(vals - roots)), np.max(np.abs(vals - SEED42_EIGS)))
    ok = agree == 100 and err <= 1e-8
    verdict("C13", ok, f"pfaffian_sign agrees on {agree}/100 seeds; eig vs root oracle {err:.1e} (<= 1e-8)")
    assert ok
