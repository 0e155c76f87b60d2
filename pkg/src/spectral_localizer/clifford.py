"""Irreducible Hermitian representations of the complex Clifford algebra.

For odd ``d`` the algebra generated by ``d`` mutually anticommuting Hermitian
involutions has an irreducible representation on ``C^nu`` with
``nu = 2**((d - 1) // 2)``.  Alongside the generators we build a real
orthogonal matrix ``Sigma`` with

    Sigma^T conj(Gamma_j) Sigma = sign_D * Gamma_j,     Sigma^2 = sign_prime_D,

where the signs depend on ``d mod 8``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CliffordRep", "build_clifford", "verify_clifford", "PAULI"]

_S0 = np.eye(2, dtype=complex)
_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S3 = np.array([[1, 0], [0, -1]], dtype=complex)

#: Pauli matrices sigma_0 .. sigma_3.
PAULI = (_S0, _S1, _S2, _S3)

MAX_DIMENSION = 7


@dataclass(frozen=True)
class CliffordRep:
    """Clifford generators together with the real symmetry ``Sigma``.

    Attributes
    ----------
    d : int
        Odd spatial dimension.
    nu : int
        Representation dimension ``2**((d-1)//2)``.
    gammas : tuple of ndarray
        ``d`` complex Hermitian ``nu x nu`` matrices.
    sigma : ndarray
        Real orthogonal ``nu x nu`` matrix.
    sign_D, sign_prime_D : int
        The signs ``s_D`` and ``s'_D``.
    """

    d: int
    nu: int
    gammas: tuple
    sigma: np.ndarray
    sign_D: int
    sign_prime_D: int

    def dirac_block(self, n) -> np.ndarray:
        """Return ``sum_j n_j Gamma_j`` for a single lattice vector ``n``."""
        n = np.asarray(n, dtype=float).reshape(self.d)
        return np.tensordot(n, np.stack(self.gammas), axes=1)


def _gammas(d: int) -> list[np.ndarray]:
    # d -> d+2: {s1 x 1, s2 x 1, s3 x G_j}
    if d == 1:
        return [np.ones((1, 1), dtype=complex)]
    inner = _gammas(d - 2)
    one = np.eye(inner[0].shape[0], dtype=complex)
    return [np.kron(_S1, one), np.kron(_S2, one)] + [np.kron(_S3, g) for g in inner]


def build_clifford(d: int) -> CliffordRep:
    """Build the Clifford representation for odd ``d`` with ``1 <= d <= 7``.

    The generators follow the recursive tensor scheme, which yields the Pauli
    matrices for ``d = 3``.  Every generator is either real or purely
    imaginary; ``Sigma`` is the product of the real ones in reverse order.
    Conjugating any generator by that product gives the sign
    ``(-1)**(k - 1)`` with ``k`` the number of real generators, and the product
    squares to ``(-1)**(k(k-1)/2)``.

    Parameters
    ----------
    d : int
        Odd dimension.

    Returns
    -------
    CliffordRep

    Raises
    ------
    ValueError
        If ``d`` is not an odd integer between 1 and 7.
    """
    if int(d) != d or d < 1 or d % 2 == 0:
        raise ValueError(f"Clifford dimension must be a positive odd integer, got {d!r}")
    if d > MAX_DIMENSION:
        raise ValueError(f"d={d} is not supported (maximum {MAX_DIMENSION})")
    d = int(d)
    gammas = _gammas(d)
    nu = gammas[0].shape[0]
    real = [g for g in gammas if not np.any(g.imag)]
    sigma = np.eye(nu)
    for g in reversed(real):
        sigma = sigma @ g.real
    k = len(real)
    sign_D = 1 if k % 2 == 1 else -1
    sign_prime_D = (-1) ** (k * (k - 1) // 2)
    for g in gammas:
        g.setflags(write=False)
    sigma.setflags(write=False)
    return CliffordRep(d, nu, tuple(gammas), sigma, sign_D, sign_prime_D)


def verify_clifford(rep: CliffordRep, tol: float = 1e-12) -> bool:
    """Check every defining relation of ``rep`` to ``tol`` in operator norm."""

    def small(x):
        return np.linalg.norm(x, 2) <= tol

    nu = rep.nu
    if nu != 2 ** ((rep.d - 1) // 2) or len(rep.gammas) != rep.d:
        return False
    one = np.eye(nu)
    for i, gi in enumerate(rep.gammas):
        if gi.shape != (nu, nu) or not small(gi - gi.conj().T) or not small(gi @ gi - one):
            return False
        for gj in rep.gammas[i + 1 :]:
            if not small(gi @ gj + gj @ gi):
                return False
    s = np.asarray(rep.sigma)
    if np.iscomplexobj(s) and np.any(s.imag):
        return False
    s = s.real
    if not small(s.T @ s - one) or not small(s @ s - rep.sign_prime_D * one):
        return False
    return all(small(s.T @ g.conj() @ s - rep.sign_D * g) for g in rep.gammas)
