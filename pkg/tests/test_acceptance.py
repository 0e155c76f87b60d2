"""End-to-end acceptance checks; one summary line per criterion is printed
at the end of the pytest run."""

import math
import time

import numpy as np
import pytest
import scipy.linalg as la

from conftest import random_antisymmetric, random_hermitian, record
from spectral_localizer.cli import resolve_scales
from spectral_localizer.clifford import build_clifford
from spectral_localizer.lattice import build_ball
from spectral_localizer.localizer import build_localizer, homotopy_localizer, min_abs_eigenvalue
from spectral_localizer.models import (
    build_model,
    chiral_3d_model,
    chiral_3d_orbital,
    chiral_3d_symmetry_blocks,
    defect_shift_model,
    diii_chain_model,
)
from spectral_localizer.operators import condition_report
from spectral_localizer.oracle import (
    BlochSymbol,
    eta_partial_sum,
    localizer_path,
    odd_chern_d3,
    perturbation_index,
    pfaffian_combinatorial,
    spectral_flow,
    winding_number_d1,
)
from spectral_localizer.signature import half_signature, inertia, inertia_eig, inertia_ldl, pfaffian_sign
from spectral_localizer.symmetry import (
    build_R,
    classify,
    dirac_signs,
    invariant_from_localizer,
    operator_signs,
    verify_symmetry,
)

REP1 = build_clifford(1)
REP3 = build_clifford(3)

KAPPA_SCAN = (0.1, 0.14, 0.2, 0.28, 0.4)
CHIRAL_MASSES = (0.5, 2.0, 4.0)
CHIRAL_RADII = (8.0, 10.0)


def auto_localizer(name, params):
    spec = build_model(name, params)
    kappa, rho, _ = resolve_scales(spec, "auto", "auto", REP1)
    L = build_localizer(spec.operator, REP1, build_ball(1, rho), kappa)
    return spec, kappa, rho, L


# ---------------------------------------------------------------- shared data


@pytest.fixture(scope="module")
def shift_chain():
    t0 = time.perf_counter()
    out = {}
    for n in range(-3, 4):
        spec, kappa, rho, L = auto_localizer("shift", {"n": n})
        out[n] = {"kappa": kappa, "rho": rho, "L": L, "half": half_signature(L)}
    elapsed = time.perf_counter() - t0
    for n in out:
        out[n]["eigs"] = la.eigvalsh(out[n]["L"].dense())
    return out, elapsed


@pytest.fixture(scope="module")
def plateau():
    op = build_model("shift", {"n": 1}).operator
    return {rho: build_localizer(op, REP1, build_ball(1, rho), 1 / 18) for rho in (36, 45, 54, 63, 72)}


@pytest.fixture(scope="module")
def defect():
    op = defect_shift_model(20)
    return op, build_localizer(op, REP1, build_ball(1, 20), 1 / 18)


@pytest.fixture(scope="module")
def ssh_cases():
    t0 = time.perf_counter()
    out = {}
    for m, t in ((0.5, 1.0), (2.0, 1.0), (0.2, 1.0)):
        spec, kappa, rho, L = auto_localizer("ssh", {"m": m, "t": t})
        report = condition_report(spec.operator, REP1, kappa, rho)
        wind = winding_number_d1(BlochSymbol.from_operator(spec.operator))
        out[(m, t)] = {"L": L, "kappa": kappa, "rho": rho, "report": report, "winding": wind, "half": half_signature(L)}
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def chiral_scan():
    """Half-signatures over the kappa scan and the full spectrum at the
    selected kappa for every mass and radius."""
    t0 = time.perf_counter()
    out = {}
    for m in CHIRAL_MASSES:
        op = chiral_3d_model(m)
        q = odd_chern_d3(BlochSymbol.from_operator(op, REP3.nu), grid=32)
        for rho in CHIRAL_RADII:
            ball = build_ball(3, rho)
            halves = {}
            for kappa in KAPPA_SCAN:
                L = build_localizer(op, REP3, ball, kappa, sparse=True)
                halves[kappa] = half_signature(L)
            kappa_sel = select_plateau(halves)
            entry = {"oracle": q, "halves": halves, "kappa": kappa_sel, "dim": None, "eigs": None, "sig": None}
            if kappa_sel is not None:
                L = build_localizer(op, REP3, ball, kappa_sel, sparse=True)
                entry["dim"] = L.dim
                entry["eigs"] = chiral_3d_symmetry_blocks(ball).spectrum(L)
                entry["sig"] = inertia(L).signature
            out[(m, rho)] = entry
    return out, time.perf_counter() - t0


def select_plateau(halves):
    """Middle of the first window [k, 2k] on which the half-signature is constant."""
    ks = sorted(halves)
    for i, lo in enumerate(ks):
        window = [k for k in ks if lo <= k <= 2 * lo + 1e-12]
        if window[-1] < 2 * lo - 1e-12:
            continue
        if len({halves[k] for k in window}) == 1:
            return window[len(window) // 2]
    return None


# ---------------------------------------------------------------- criteria


def test_criterion_01_shift_index_chain(shift_chain):
    data, elapsed = shift_chain
    bad = [n for n, e in data.items() if e["half"] != n]
    dims = {n: e["L"].dim for n, e in data.items()}
    assert data[1]["kappa"] == pytest.approx(1 / 18) and data[1]["rho"] == pytest.approx(36) and dims[1] == 146
    assert data[3]["kappa"] == pytest.approx(1 / 54) and data[3]["rho"] == pytest.approx(108) and dims[3] == 434
    ok = record(1, not bad and elapsed < 5, f"half_sig = n for n=-3..3 (mismatch {bad}), {elapsed:.2f}s")
    assert ok


def test_criterion_02_gap_bound(shift_chain):
    data, _ = shift_chain
    worst = min(float(np.min(np.abs(e["eigs"]))) for e in data.values())
    ok = record(2, worst >= 1 / math.sqrt(2) - 1e-9, f"min |eig| = {worst:.6f} >= 1/sqrt(2)")
    assert ok


def test_criterion_03_rho_plateau(plateau):
    halves = {rho: half_signature(L) for rho, L in plateau.items()}
    ok = record(3, set(halves.values()) == {1}, f"half_sig over rho 36..72: {sorted(set(halves.values()))}")
    assert ok


def test_criterion_04_counterexample(defect):
    op, L = defect
    half = half_signature(L)
    report = condition_report(op, REP1, 1 / 18, 20, strict=False)
    index = perturbation_index(op, (-60, 60)).index
    flagged = not report.verified and not report.invertible
    ok = record(4, half == 1 and flagged and index == 0, f"half_sig {half}, flagged {flagged}, index {index}")
    assert ok


def test_criterion_05_ssh_oracle(ssh_cases):
    data, elapsed = ssh_cases
    pairs = {k: (e["winding"], e["half"]) for k, e in data.items()}
    verified = all(e["report"].verified for e in data.values())
    match = all(w == h for w, h in pairs.values())
    assert [w for w, _ in pairs.values()] == [1, 0, 1]
    ok = record(5, match and verified and elapsed < 30, f"(winding, half_sig) {list(pairs.values())}, verified {verified}, {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_06_chiral_oracle(chiral_scan):
    data, elapsed = chiral_scan
    rows, ok = [], True
    for (m, rho), e in data.items():
        q = e["oracle"]
        good = e["kappa"] is not None and q.residual < 1e-3 and e["halves"][e["kappa"]] == q.value
        ok &= good
        rows.append(f"m={m} rho={rho:g}: Ch={q.value} half={e['halves'].get(e['kappa'])} kappa={e['kappa']}")
    record(6, ok, "; ".join(rows) + f"; {elapsed / 60:.1f} min")
    assert ok


def test_criterion_08_eta_random_and_1d(rng, shift_chain, plateau, defect, ssh_cases):
    bad = 0
    for _ in range(100):
        H = random_hermitian(rng, int(rng.integers(1, 120)))
        bad += eta_partial_sum(la.eigvalsh(H), 0) != inertia(H).signature
    mats = [e["L"] for e in shift_chain[0].values()] + list(plateau.values()) + [defect[1]]
    mats += [e["L"] for e in ssh_cases[0].values()]
    for L in mats:
        bad += eta_partial_sum(la.eigvalsh(L.dense()), 0) != inertia(L).signature
    ok = record(8, bad == 0, f"eta(0) = Sig on 100 random and {len(mats)} d=1 localizers")
    assert ok


@pytest.mark.slow
def test_criterion_08_eta_chiral(chiral_scan):
    data, _ = chiral_scan
    bad = [k for k, e in data.items() if e["eigs"] is None or eta_partial_sum(e["eigs"], 0) != e["sig"]]
    ok = record(8, not bad, f"eta(0) = Sig on {len(data) - len(bad)} d=3 localizers at the selected kappa")
    assert ok


def test_criterion_07_spectral_flow():
    rows, ok = [], True
    for n in (1, 2):
        spec, kappa, rho, _ = auto_localizer("shift", {"n": n})
        res = spectral_flow(localizer_path(spec.operator, REP1, build_ball(1, rho), kappa), steps=50)
        for lam, _ in res.crossings:
            ok &= any(abs(n**2 - (n - 2 * k) ** 2 - 4 * lam**2 / kappa**2) <= 1e-3 for k in range(n + 1))
        ok &= res.flow == n
        rows.append(f"n={n}: flow {res.flow}, crossings {[round(l, 6) for l, _ in res.crossings]}")
    record(7, ok, "; ".join(rows))
    assert ok


def test_criterion_09_homotopy():
    op = build_model("shift", {"n": 1}).operator
    ball = build_ball(1, 36)
    sigs, gaps = [], []
    for lam in np.linspace(0, 1, 11):
        L = homotopy_localizer(op, REP1, ball, 1 / 18, float(lam))
        sigs.append(inertia(L).signature)
        gaps.append(min_abs_eigenvalue(L))
    ok = record(9, len(set(sigs)) == 1 and min(gaps) > 0, f"Sig {sorted(set(sigs))}, min |eig| {min(gaps):.4f}")
    assert ok


def test_criterion_10_inertia(rng):
    bad = 0
    for _ in range(200):
        n = int(rng.integers(2, 201))
        H = random_hermitian(rng, n)
        a, b = inertia_ldl(H), inertia_eig(H)
        bad += (a.n_plus, a.n_minus, a.n_zero) != (b.n_plus, b.n_minus, b.n_zero)
    cong = 0
    for _ in range(50):
        n = int(rng.integers(2, 60))
        H = random_hermitian(rng, n)
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        cong += inertia(X @ H @ X.conj().T).signature != inertia(H).signature
    ok = record(10, bad == 0 and cong == 0, f"{bad} ldl/eig mismatches in 200, {cong} congruence failures in 50")
    assert ok


def test_criterion_11_pfaffian(rng):
    bad = 0
    for n in (2, 4, 6, 8):
        for _ in range(50):
            K = random_antisymmetric(rng, n)
            bad += pfaffian_sign(K) != int(np.sign(pfaffian_combinatorial(K)))
    law = 0
    for _ in range(50):
        n = 2 * int(rng.integers(1, 11))
        K = random_antisymmetric(rng, n)
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        law += pfaffian_sign(Q @ K @ Q.T) != round(np.linalg.det(Q)) * pfaffian_sign(K)
    ok = record(11, bad == 0 and law == 0, f"{bad} sign mismatches in 200, {law} det(Q) law failures in 50")
    assert ok


def test_criterion_12_z2_pipeline():
    values, sigs, residuals = {}, {}, {}
    for ratio in (0.5, 0.9, 1.1, 2.0):
        op, data = diii_chain_model(ratio, 1.0)
        ball = build_ball(1, 40)
        L = build_localizer(op, REP1, ball, 0.05)
        res = invariant_from_localizer(L, data, rep=REP1, op=op)
        R = build_R(data, len(ball), rep=REP1, op=op)
        values[ratio], sigs[ratio] = res.value, res.signature
        residuals[ratio] = verify_symmetry(L, R, data.s_L)
    left, right = {values[0.5], values[0.9]}, {values[1.1], values[2.0]}
    ok = (
        set(sigs.values()) == {0}
        and len(left) == 1
        and len(right) == 1
        and left != right
        and max(residuals.values()) <= 1e-10
    )
    record(12, ok, f"Z2 values {values}, Sig {sorted(set(sigs.values()))}, max residual {max(residuals.values()):.1e}")
    assert ok


def test_criterion_13_dispatch_table():
    expected = {
        1: [(-1, -1), (1, -1), (-1, 1), (1, 1)],
        3: [(1, -1), (-1, 1), (1, 1), (-1, -1)],
        5: [(-1, 1), (1, 1), (-1, -1), (1, -1)],
        7: [(1, 1), (-1, -1), (1, -1), (-1, 1)],
    }
    bad = [
        (d, j)
        for d in expected
        for col, j in enumerate((2, 4, 6, 8))
        if classify(*dirac_signs(d), *operator_signs(j))[:2] != expected[d][col]
    ]
    ok = record(13, not bad, f"16 entries, mismatches {bad}")
    assert ok
