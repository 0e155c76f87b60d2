import numpy as np
import pytest

from spectral_localizer.clifford import PAULI, CliffordRep, build_clifford, verify_clifford

TABLE = {1: (1, 1), 3: (-1, -1), 5: (1, -1), 7: (-1, 1)}


@pytest.mark.parametrize("d", [1, 3, 5, 7])
def test_relations_and_signs(d):
    rep = build_clifford(d)
    assert rep.nu == 2 ** ((d - 1) // 2)
    assert len(rep.gammas) == d
    assert (rep.sign_D, rep.sign_prime_D) == TABLE[d]
    assert verify_clifford(rep, 1e-12)
    one = np.eye(rep.nu)
    for i, gi in enumerate(rep.gammas):
        assert np.linalg.norm(gi @ gi - one, 2) <= 1e-12
        for gj in rep.gammas[i + 1 :]:
            assert np.linalg.norm(gi @ gj + gj @ gi, 2) <= 1e-12


@pytest.mark.parametrize("d", [1, 3, 5, 7])
def test_sigma_is_exactly_real(d):
    sigma = np.asarray(build_clifford(d).sigma)
    assert not np.iscomplexobj(sigma) or not np.any(sigma.imag)


def test_d3_is_pauli():
    rep = build_clifford(3)
    for g, p in zip(rep.gammas, PAULI[1:]):
        np.testing.assert_array_equal(g, p)
    np.testing.assert_array_equal(rep.sigma, (1j * PAULI[2]).real)
    np.testing.assert_array_equal(rep.sigma @ rep.sigma, -np.eye(2))


def test_d1_scalar():
    rep = build_clifford(1)
    assert rep.gammas[0].shape == (1, 1) and rep.gammas[0][0, 0] == 1
    assert rep.sigma[0, 0] == 1 and rep.sign_D == 1


def test_d5_sigma_square():
    rep = build_clifford(5)
    assert rep.nu == 4
    np.testing.assert_allclose(rep.sigma @ rep.sigma, -np.eye(4), atol=0)


def test_verify_rejects_perturbed():
    rep = build_clifford(3)
    bad = CliffordRep(3, 2, (rep.gammas[0] + 0.1 * np.eye(2),) + rep.gammas[1:], rep.sigma, -1, -1)
    assert not verify_clifford(bad, 1e-12)
    assert verify_clifford(build_clifford(7), 1e-10)


@pytest.mark.parametrize("d", [0, -1, 2, 4, 9, 2.5])
def test_rejects_bad_dimension(d):
    with pytest.raises(ValueError):
        build_clifford(d)


def test_dirac_block():
    rep = build_clifford(3)
    b = rep.dirac_block([1, 0, 0])
    np.testing.assert_array_equal(b, PAULI[1])
    np.testing.assert_allclose(np.linalg.eigvalsh(rep.dirac_block([1, 2, 2])), [-3, 3])
