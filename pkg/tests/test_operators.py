import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_localizer.clifford import build_clifford
from spectral_localizer.errors import DimensionMismatchError, NotInvertibleError
from spectral_localizer.lattice import build_ball
from spectral_localizer.operators import (
    HoppingOperator,
    commutator_with_position,
    condition_report,
    dirac_commutator_norm,
    evaluate_symbol,
    identity_operator,
    multiplicative_disorder,
    norm_and_gap,
    onsite_disorder,
    periodic_matrix,
    restrict,
    site_uniforms,
    symbol_extremum,
)

REP1 = build_clifford(1)


def right_hop(r, c=1.0):
    return HoppingOperator(1, 1, {(r,): [[c]]})


def random_op(seed, d=1, N=1, reach=2, count=3):
    rng = np.random.default_rng(seed)
    terms = {}
    for _ in range(count):
        r = tuple(int(x) for x in rng.integers(-reach, reach + 1, size=d))
        terms[r] = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return HoppingOperator(d, N, terms)


def test_restrict_hop_is_subdiagonal():
    M = restrict(right_hop(1), build_ball(1, 2))
    np.testing.assert_array_equal(M, np.eye(5, k=-1))


def test_restrict_identity():
    np.testing.assert_array_equal(restrict(identity_operator(2, 3), build_ball(2, 2)), np.eye(3 * 13))


def test_restrict_matches_convolution():
    m, t = 0.5, 1.0
    op = HoppingOperator(1, 1, {(0,): [[m]], (1,): [[t]]})
    ball = build_ball(1, 2)
    M = restrict(op, ball)
    for j in range(5):
        psi = np.zeros(5)
        psi[j] = 1
        direct = np.array([m * psi[i] + (t * psi[i - 1] if i >= 1 else 0) for i in range(5)])
        np.testing.assert_allclose(M @ psi, direct)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), d=st.sampled_from([1, 2]), N=st.integers(1, 3))
def test_restrict_linear_and_adjoint(seed, d, N):
    a, b = random_op(seed, d, N), random_op(seed + 1, d, N)
    ball = build_ball(d, 2.2)
    Ra, Rb = restrict(a, ball), restrict(b, ball)
    terms = {}
    for op, w in ((a, 2.0), (b, -1j)):
        for r, c in op.terms.items():
            terms[r] = terms.get(r, 0) + w * c
    np.testing.assert_allclose(restrict(HoppingOperator(d, N, terms), ball), 2.0 * Ra - 1j * Rb, atol=1e-12)
    np.testing.assert_allclose(restrict(a.adjoint(), ball), Ra.conj().T, atol=1e-12)


def test_sparse_restrict_agrees():
    op = random_op(3, 2, 2)
    ball = build_ball(2, 3)
    np.testing.assert_array_equal(restrict(op, ball, sparse=True).toarray(), restrict(op, ball))


def test_commutator_with_position():
    c = commutator_with_position(right_hop(1), 1)
    assert list(c.terms) == [(1,)] and c.terms[(1,)][0, 0] == 1
    assert commutator_with_position(identity_operator(1), 1).terms == {}
    c3 = commutator_with_position(right_hop(3), 1)
    assert c3.terms[(3,)][0, 0] == 3
    with pytest.raises(ValueError):
        commutator_with_position(right_hop(1), 2)


def test_commutator_matches_matrices():
    op = random_op(11, 2, 2)
    ball = build_ball(2, 3)
    X = np.repeat(ball.sites[:, 1].astype(float), 2)
    A = restrict(op, ball)
    np.testing.assert_allclose(restrict(commutator_with_position(op, 2), ball), X[:, None] * A - A * X[None, :], atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, -2])
def test_dirac_commutator_shift(n):
    val, mode = dirac_commutator_norm(right_hop(n), REP1)
    assert mode == "exact-symbol"
    assert val == pytest.approx(abs(n), abs=1e-9)


def test_dirac_commutator_identity_and_ssh():
    assert dirac_commutator_norm(identity_operator(1), REP1)[0] == 0
    ssh = HoppingOperator(1, 1, {(0,): [[0.5]], (1,): [[1.0]]})
    assert dirac_commutator_norm(ssh, REP1)[0] == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_upper_bound_dominates_exact(seed):
    op = random_op(seed, 1, 2, count=4)
    exact, _ = dirac_commutator_norm(op, REP1, "exact-symbol")
    bound, mode = dirac_commutator_norm(op, REP1, "upper-bound")
    assert mode == "upper-bound"
    assert bound >= exact - 1e-9


def test_upper_bound_dominates_exact_d3():
    rep = build_clifford(3)
    op = random_op(5, 3, 2, reach=1, count=5).tensor_clifford(2)
    assert dirac_commutator_norm(op, rep, "upper-bound")[0] >= dirac_commutator_norm(op, rep)[0] - 1e-9


def test_exact_mode_rejects_disorder():
    op = multiplicative_disorder(right_hop(1), 0.1, 0)
    with pytest.raises(ValueError):
        dirac_commutator_norm(op, REP1, "exact-symbol")


def test_noncommuting_coefficients_rejected():
    rep = build_clifford(3)
    op = HoppingOperator(3, 2, {(1, 0, 0): np.array([[1, 0], [0, -1]])})
    with pytest.raises(ValueError):
        dirac_commutator_norm(op, rep)


def test_norm_and_gap_examples():
    assert norm_and_gap(right_hop(1)) == pytest.approx((1.0, 1.0), abs=1e-9)
    ssh = HoppingOperator(1, 1, {(0,): [[0.5]], (1,): [[1.0]]})
    assert norm_and_gap(ssh) == pytest.approx((1.5, 0.5), abs=1e-9)
    crit = HoppingOperator(1, 1, {(0,): [[1.0]], (1,): [[1.0]]})
    assert norm_and_gap(crit)[1] == 0.0


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_unitary_symbol_norms(seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    r = int(rng.integers(-3, 4))
    norm, gap = norm_and_gap(HoppingOperator(1, 3, {(r,): q}))
    assert abs(norm - 1) < 1e-9 and abs(gap - 1) < 1e-9


def test_symbol_extremum_certificate():
    terms = {(0,): np.array([[0.3]]), (1,): np.array([[1.0]]), (2,): np.array([[0.4j]])}
    mx = symbol_extremum(terms, 1, "max")
    k = np.linspace(0, 2 * np.pi, 200001)[:, None]
    brute = np.abs(evaluate_symbol(terms, 1, k)[:, 0, 0])
    assert mx.value == pytest.approx(brute.max(), abs=1e-6)
    assert mx.certified >= mx.value
    mn = symbol_extremum(terms, 1, "min")
    assert mn.value == pytest.approx(brute.min(), abs=1e-6)
    assert mn.certified <= mn.value


def test_truncation_mode_estimates():
    ssh = HoppingOperator(1, 1, {(0,): [[0.5]], (1,): [[1.0]]})
    norm, gap = norm_and_gap(ssh, "truncation", rho_probe=20)
    assert norm == pytest.approx(1.5, abs=1e-2) and gap == pytest.approx(0.5, abs=1e-2)
    with pytest.raises(ValueError):
        norm_and_gap(ssh, "truncation")


def test_periodic_matrix_is_circulant():
    mat, sites = periodic_matrix(right_hop(1), 3)
    assert mat.shape == (6, 6)
    np.testing.assert_array_equal(mat, np.roll(np.eye(6), 1, axis=0))


def test_condition_report_examples():
    S = right_hop(1)
    r = condition_report(S, REP1, 1 / 18, 36)
    assert r.cond1_ok and r.cond2_ok and r.verified
    assert r.kappa_max == pytest.approx(1 / 18) and r.rho_min == pytest.approx(36)
    r = condition_report(S, REP1, 1 / 10, 36)
    assert not r.cond1_ok
    r = condition_report(S, REP1, 1 / 18, 35)
    assert r.cond1_ok and not r.cond2_ok
    assert set(r.to_dict()) >= {"norm_A", "gap_g", "comm_norm", "kappa_max", "rho_min", "cond1_ok", "cond2_ok", "bound_mode"}


def test_condition_report_not_invertible():
    crit = HoppingOperator(1, 1, {(0,): [[1.0]], (1,): [[1.0]]})
    with pytest.raises(NotInvertibleError):
        condition_report(crit, REP1, 0.1, 10)
    r = condition_report(crit, REP1, 0.1, 10, strict=False)
    assert not r.invertible and not r.verified and r.gap_g == 0


def test_site_uniforms_order_independent():
    sites = np.arange(-5, 6)[:, None]
    a = site_uniforms(3, 0, sites)
    b = site_uniforms(3, 0, sites[::-1])[::-1]
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, site_uniforms(4, 0, sites))
    assert not np.array_equal(a, site_uniforms(3, 1, sites))


def test_multiplicative_disorder():
    op = HoppingOperator(1, 1, {(0,): [[0.5]], (1,): [[1.0]]})
    dis = multiplicative_disorder(op, 0.2, 7)
    assert not dis.translation_invariant
    sites = np.arange(-50, 50)[:, None]
    c = dis.coefficients((1,), sites)[:, 0, 0].real
    assert np.all((c >= 0.8) & (c <= 1.2)) and np.std(c) > 0
    assert dis.sup_norm((1,)) == pytest.approx(1.2)
    np.testing.assert_array_equal(restrict(dis, build_ball(1, 10)), restrict(multiplicative_disorder(op, 0.2, 7), build_ball(1, 10)))
    assert multiplicative_disorder(op, 0.0, 1) is op
    with pytest.raises(ValueError):
        multiplicative_disorder(op, -1, 0)


def test_onsite_disorder():
    op = right_hop(1)
    dis = onsite_disorder(op, 0.4, 2)
    c = dis.coefficients((0,), np.arange(-20, 20)[:, None])[:, 0, 0].real
    assert np.all(np.abs(c) <= 0.2) and np.std(c) > 0
    assert dis.sup_norm((0,)) == pytest.approx(0.2)


def test_dimension_checks():
    with pytest.raises(DimensionMismatchError):
        HoppingOperator(2, 1, {(1,): [[1]]})
    with pytest.raises(DimensionMismatchError):
        restrict(right_hop(1), build_ball(2, 1))
    with pytest.raises(ValueError):
        HoppingOperator(1, 1, {(0,): [[1]]}, profile=lambda r, s: None)
