import math

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_localizer.clifford import build_clifford
from spectral_localizer.errors import DimensionMismatchError
from spectral_localizer.lattice import build_ball, dirac_matrix
from spectral_localizer.localizer import (
    build_localizer,
    build_tapered_localizer,
    function_of_dirac,
    gap_check,
    haagerup_profile,
    homotopy_localizer,
    min_abs_eigenvalue,
)
from spectral_localizer.models import chiral_3d_model, shift_model, ssh_model
from spectral_localizer.operators import identity_operator, restrict

REP1 = build_clifford(1)
REP3 = build_clifford(3)


def test_block_structure():
    ball = build_ball(1, 5)
    op = ssh_model(0.5, 1.0)
    L = build_localizer(op, REP1, ball, 0.3).dense()
    M = len(ball)
    D = dirac_matrix(ball, REP1)
    A = restrict(op, ball)
    np.testing.assert_allclose(L[:M, :M], 0.3 * D)
    np.testing.assert_allclose(L[M:, M:], -0.3 * D)
    np.testing.assert_allclose(L[:M, M:], A)
    np.testing.assert_allclose(L, L.conj().T)


def test_odd_under_grading_swap():
    # J L J = -L for J = [[0, 1], [-1, 0]] when A is self-adjoint and commutes with D
    ball = build_ball(1, 4)
    L = build_localizer(identity_operator(1), REP1, ball, 0.7).dense()
    M = len(ball)
    J = np.block([[np.zeros((M, M)), np.eye(M)], [-np.eye(M), np.zeros((M, M))]])
    np.testing.assert_allclose(J @ L @ J.T, -L, atol=1e-14)


def test_identity_spectrum():
    kappa = 0.25
    ball = build_ball(1, 6)
    ev = la.eigvalsh(build_localizer(identity_operator(1), REP1, ball, kappa).dense())
    n = ball.sites[:, 0]
    ref = np.sort(np.concatenate([np.sqrt(kappa**2 * n**2 + 1), -np.sqrt(kappa**2 * n**2 + 1)]))
    np.testing.assert_allclose(ev, ref, atol=1e-12)


def test_sparse_equals_dense_3d():
    ball = build_ball(3, 2)
    op = chiral_3d_model(2.0)
    a = build_localizer(op, REP3, ball, 0.2)
    b = build_localizer(op, REP3, ball, 0.2, sparse=True)
    assert b.is_sparse and a.dim == b.dim == 2 * 4 * len(ball)
    np.testing.assert_allclose(a.dense(), b.dense())


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        build_localizer(identity_operator(1), REP3, build_ball(3, 1), 0.1)
    with pytest.raises(ValueError):
        build_localizer(identity_operator(1), REP1, build_ball(1, 1), 0.0)


def test_function_of_dirac_square():
    ball = build_ball(3, 2)
    D = dirac_matrix(ball, REP3)
    np.testing.assert_allclose(function_of_dirac(ball, REP3, lambda x: x**2), D @ D, atol=1e-12)
    np.testing.assert_allclose(function_of_dirac(ball, REP3, lambda x: x), D, atol=1e-12)
    expD = la.expm(0.3 * D)
    np.testing.assert_allclose(function_of_dirac(ball, REP3, lambda x: np.exp(0.3 * x)), expD, atol=1e-10)


@pytest.mark.parametrize("rho", [1.0, 10.0, 36.0])
def test_haagerup_values(rho):
    pair = haagerup_profile(rho)
    x = np.linspace(-1.5 * rho, 1.5 * rho, 4001)
    G = pair.G(x)
    assert np.all(G[np.abs(x) <= rho / 2] == 1)
    assert np.all(G[np.abs(x) >= rho] == 0)
    assert np.all((G >= 0) & (G <= 1))
    np.testing.assert_allclose(G, pair.G(-x))
    F = pair.F(x)
    np.testing.assert_allclose(4 * F * (1 - F), G**4, atol=1e-12)
    assert np.all(F[x >= rho] == 1) and np.all(F[x <= -rho] == 0)
    assert pair.F(0.0) == 0.5
    assert pair.F(rho * 0.75) > 0.5 > pair.F(-rho * 0.75)
    assert np.max(np.abs(pair.G_prime(x))) == pytest.approx(4 / rho)


@pytest.mark.parametrize("rho", [1.0, 10.0, 36.0])
def test_haagerup_derivative_l1(rho):
    # FT(G_rho')(p) = FT(G_1')(rho p), so the L1 norm scales as 1 / rho
    val = haagerup_profile(rho).derivative_fourier_l1()
    assert val * rho == pytest.approx(haagerup_profile(1.0).derivative_fourier_l1(), rel=1e-3)
    assert val <= 8 / rho


def test_tapered_structure():
    rho = 6.0
    ball = build_ball(1, rho)
    pair = haagerup_profile(rho)
    L = build_tapered_localizer(shift_model(1), REP1, ball, pair).dense()
    M = len(ball)
    n = ball.sites[:, 0].astype(float)
    np.testing.assert_allclose(np.diag(L[:M, :M]).real, 2 * pair.F(n) - 1)
    edge = np.abs(n) == rho
    assert np.all(np.abs(L[:M, M:][edge]) == 0) and np.all(np.abs(L[:M, M:][:, edge]) == 0)
    # away from the edge the hopping is untouched
    inner = np.abs(n) <= rho / 2
    np.testing.assert_allclose(L[:M, M:][np.ix_(inner, inner)], restrict(shift_model(1), ball)[np.ix_(inner, inner)])


def test_homotopy_endpoints():
    rho = 10.0
    ball = build_ball(1, rho)
    op = ssh_model(0.5, 1.0)
    kappa = 0.07
    lin = build_localizer(op, REP1, ball, kappa).dense()
    np.testing.assert_allclose(homotopy_localizer(op, REP1, ball, kappa, 1.0).dense(), lin, atol=1e-14)
    tap = build_tapered_localizer(op, REP1, ball, haagerup_profile(rho)).dense()
    np.testing.assert_allclose(homotopy_localizer(op, REP1, ball, 1 / rho, 0.0).dense(), tap, atol=1e-14)
    with pytest.raises(ValueError):
        homotopy_localizer(op, REP1, ball, kappa, 1.5)


@settings(max_examples=20, deadline=None)
@given(lam=st.floats(0, 1))
def test_homotopy_diagonal_affine(lam):
    # the diagonal block is affine in lambda
    ball = build_ball(1, 5)
    op = shift_model(1)
    h = lambda t: homotopy_localizer(op, REP1, ball, 0.1, t).dense()
    M = len(ball)
    mid = h(lam)[:M, :M]
    np.testing.assert_allclose(mid, lam * h(1.0)[:M, :M] + (1 - lam) * h(0.0)[:M, :M], atol=1e-13)


def test_min_abs_eigenvalue_paths():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 40))
    H = X + X.T
    ref = np.min(np.abs(la.eigvalsh(H)))
    assert min_abs_eigenvalue(H) == pytest.approx(ref)


def test_min_abs_eigenvalue_sparse_large(monkeypatch):
    import spectral_localizer.localizer as loc

    ball = build_ball(1, 80)
    L = build_localizer(shift_model(2), REP1, ball, 0.05, sparse=True)
    ref = min_abs_eigenvalue(L)
    monkeypatch.setattr(loc, "DENSE_LIMIT", 10)
    assert min_abs_eigenvalue(L) == pytest.approx(ref, rel=1e-8)


def test_gap_check():
    ball = build_ball(1, 36)
    res = gap_check(build_localizer(shift_model(1), REP1, ball, 1 / 18), 1.0)
    assert res.satisfies_bound and not res.vacuous and res.min_abs_eig >= 1 / math.sqrt(2)
    res = gap_check(build_localizer(ssh_model(1, 1), REP1, build_ball(1, 10), 0.1), 0.0)
    assert res.vacuous and not res.satisfies_bound
    res = gap_check(np.diag([0.1, -0.2]), 1.0)
    assert not res.satisfies_bound


def test_slab_partition_is_block_tridiagonal():
    op = chiral_3d_model(2.0)
    L = build_localizer(op, REP3, build_ball(3, 3), 0.3, sparse=True)
    parts = L.metadata["partition"]
    assert np.array_equal(np.sort(np.concatenate(parts)), np.arange(L.dim))
    H = L.matrix.tocsr()
    for i, p in enumerate(parts):
        for j, q in enumerate(parts):
            if abs(i - j) > 1:
                assert H[p][:, q].nnz == 0


def test_blocked_inertia_with_slabs_matches_dense():
    from spectral_localizer.signature import inertia, inertia_ldl

    L = build_localizer(chiral_3d_model(0.5), REP3, build_ball(3, 3), 0.3, sparse=True)
    got = inertia(L, method="blocked")
    ref = inertia_ldl(L.dense())
    assert (got.n_plus, got.n_minus, got.n_zero) == (ref.n_plus, ref.n_minus, ref.n_zero)
