"""Concrete operators: shifts, SSH chains, a defect shift, a 3D chiral model
and a class-DIII chain.

Hopping convention: ``(A psi)(n) = sum_r A_r(n) psi(n - r)``.  The shift
used throughout is ``(S psi)(m) = psi(m + 1)``, a single hopping at
``r = -1``.  Its Noether index is ``+1``, so ``shift_model(n)`` has index
``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .clifford import PAULI, build_clifford
from .lattice import LatticeBall
from .operators import HoppingOperator, multiplicative_disorder, onsite_disorder
from .signature import dihedral_blocks
from .symmetry import RealSymmetryData, check_preconditions

__all__ = [
    "ModelSpec",
    "shift_model",
    "defect_shift_model",
    "ssh_model",
    "chiral_3d_orbital",
    "chiral_3d_model",
    "chiral_3d_rotation",
    "chiral_3d_reflection",
    "chiral_3d_symmetry_blocks",
    "diii_chain_model",
    "MODELS",
    "build_model",
]

I2 = np.eye(2)


def shift_model(n: int) -> HoppingOperator:
    """``S^n``: one hopping of weight 1 at ``r = -n`` (``n = 0`` is the identity)."""
    n = int(n)
    return HoppingOperator(1, 1, {(-n,): np.ones((1, 1))}, name=f"shift({n})")


def defect_shift_model(rho: float, periodic: bool = False) -> HoppingOperator:
    """Shift on the window ``[-W, W]``, ``W = floor(2 rho)``, identity outside.

    Inside the window ``(A psi)(m) = psi(m + 1)`` for ``m < W`` and
    ``(A psi)(W) = 0``, so ``A`` has a kernel and is not invertible while being
    a finite-rank perturbation of the identity.  With ``periodic`` the window
    is closed into a cycle by the extra hopping ``(A psi)(W) = psi(-W)``,
    which has length ``2W`` and makes ``[X, A]`` of order ``rho``.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    W = int(math.floor(2 * rho))
    terms = {(0,): np.ones((1, 1)), (-1,): np.ones((1, 1))}
    if periodic:
        terms[(2 * W,)] = np.ones((1, 1))

    def profile(r, sites):
        m = np.asarray(sites)[:, 0]
        if r == (0,):
            c = np.abs(m) > W
        elif r == (-1,):
            c = (m >= -W) & (m < W)
        else:
            c = m == W
        return c.astype(complex)[:, None, None]

    sups = {r: 1.0 for r in terms}
    name = f"defect-shift({rho}{', periodic' if periodic else ''})"
    return HoppingOperator(1, 1, terms, profile, sups, name)


def ssh_model(m: float, t: float, disorder_w: float = 0.0, seed: int = 0) -> HoppingOperator:
    """Off-diagonal block of the SSH chain: ``A_0 = m``, ``A_{-1} = t``.

    The symbol is ``m + t e^{ik}``.  With ``disorder_w > 0`` each coefficient
    is multiplied by an independent factor uniform in ``[1 - w, 1 + w]``.
    """
    op = HoppingOperator(1, 1, {(0,): [[m]], (-1,): [[t]]}, name=f"ssh({m},{t})")
    return multiplicative_disorder(op, disorder_w, seed) if disorder_w else op


def chiral_3d_orbital(m: float) -> HoppingOperator:
    """Orbital 2x2 model with symbol ``sum_j sin(k_j) s_j + i (m + sum_j cos(k_j))``.

    Hoppings are ``a_0 = i m`` and ``a_{pm e_j} = i (1 pm s_j) / 2``.
    Gap closings sit at ``m in {-3, -1, 1, 3}``.
    """
    terms = {(0, 0, 0): 1j * m * I2}
    for j in range(3):
        e = [0, 0, 0]
        e[j] = 1
        terms[tuple(e)] = 0.5j * (I2 + PAULI[j + 1])
        e[j] = -1
        terms[tuple(e)] = 0.5j * (I2 - PAULI[j + 1])
    return HoppingOperator(3, 2, terms, name=f"chiral3d-orbital({m})")


def chiral_3d_model(m: float) -> HoppingOperator:
    """``1_2 (x) a`` on ``C^2 (Clifford) (x) C^2 (orbital)``, ``a = chiral_3d_orbital(m)``.

    The orbital Pauli matrices act on a separate factor from the Dirac
    matrices so that the coefficients commute with them and ``[D, A]`` stays
    bounded.
    """
    op = chiral_3d_orbital(m).tensor_clifford(2)
    return HoppingOperator(3, 4, op.terms, name=f"chiral3d({m})")


def chiral_3d_rotation(ball: LatticeBall) -> tuple[np.ndarray, np.ndarray, int]:
    """Quarter turn about the third axis as a monomial unitary on the localizer space.

    Sites move by ``(x, y, z) -> (-y, x, z)`` and the fiber picks up
    ``V (x) V`` with ``V = exp(-i pi s_3 / 4)``, which maps ``s_1 -> s_2`` and
    ``s_2 -> -s_1`` on both tensor factors.  The result ``(perm, phases, 4)``
    feeds ``signature.symmetry_blocks``; it commutes with every localizer of
    ``chiral_3d_model`` on a ball.
    """
    if ball.d != 3:
        raise ValueError("the rotation needs a 3D ball")
    pts = ball.sites
    rot = np.stack([-pts[:, 1], pts[:, 0], pts[:, 2]], axis=1)
    target = ball.lookup(rot)
    if np.any(target < 0):
        raise ValueError("ball is not rotation invariant")
    v = np.exp(np.array([-1j, 1j]) * np.pi / 4)
    fib = np.kron(v, v)
    F = fib.size
    M = len(ball)
    site_perm = (target[:, None] * F + np.arange(F)[None, :]).ravel()
    perm = np.concatenate([site_perm, site_perm + M * F])
    phases = np.tile(fib, 2 * M)
    return perm, phases, 4


def chiral_3d_reflection(ball: LatticeBall) -> tuple[np.ndarray, np.ndarray]:
    """Half turn about the first axis as a monomial unitary on the localizer space.

    Sites move by ``(x, y, z) -> (x, -y, -z)`` and the fiber picks up
    ``s_1 (x) s_1``.  It squares to one and conjugates the quarter turn of
    ``chiral_3d_rotation`` into its inverse, so the two generate a dihedral
    group of order 8 commuting with every ``chiral_3d_model`` localizer.
    """
    if ball.d != 3:
        raise ValueError("the reflection needs a 3D ball")
    pts = ball.sites
    target = ball.lookup(np.stack([pts[:, 0], -pts[:, 1], -pts[:, 2]], axis=1))
    if np.any(target < 0):
        raise ValueError("ball is not invariant under the half turn")
    flip = np.array([3, 2, 1, 0])
    M = len(ball)
    site_perm = (target[:, None] * 4 + flip[None, :]).ravel()
    perm = np.concatenate([site_perm, site_perm + M * 4])
    return perm, np.ones(perm.size, dtype=complex)


def chiral_3d_symmetry_blocks(ball: LatticeBall):
    """Dihedral block reduction of the ``chiral_3d_model`` localizer space on ``ball``."""
    perm, phases, order = chiral_3d_rotation(ball)
    return dihedral_blocks((perm, phases), chiral_3d_reflection(ball), order)


def diii_chain_model(m: float, t: float, coupling: float = 0.5) -> tuple[HoppingOperator, RealSymmetryData]:
    """Two SSH chains of opposite chirality coupled by a real symmetric term.

    ``A_0 = m``, ``A_{-1} = t diag(1, 0) + (c/2) s_1`` and
    ``A_{+1} = t diag(0, 1) - (c/2) s_1``; the symbol is
    ``m + t cos k + i sin k (t s_3 + c s_1)`` and the gap closes only at
    ``|m| = |t|``.  With ``S = [[0, 1], [-1, 0]]`` the relation
    ``S^T conj(A) S = A^*`` holds and ``S^2 = -1``.
    """
    c = float(coupling)
    terms = {
        (0,): m * I2,
        (-1,): t * np.diag([1.0, 0.0]) + 0.5 * c * PAULI[1],
        (1,): t * np.diag([0.0, 1.0]) - 0.5 * c * PAULI[1],
    }
    op = HoppingOperator(1, 2, terms, name=f"diii({m},{t},{c})")
    S = np.array([[0.0, 1.0], [-1.0, 0.0]])
    rep = build_clifford(1)
    data = RealSymmetryData.from_rep(rep, S, -1, -1)
    res = check_preconditions(data, rep, op)
    if max(res.values()) > 1e-12:
        raise AssertionError(f"model violates its symmetry: {res}")
    return op, data


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A named operator with its parameters and optional symmetry data."""

    name: str
    params: dict
    operator: HoppingOperator
    symmetry: RealSymmetryData | None = None
    extras: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.operator.d


def _shift(n=1):
    return shift_model(int(n)), None


def _defect(rho=20.0, periodic=0):
    return defect_shift_model(float(rho), bool(int(periodic))), None


def _ssh(m=0.5, t=1.0, w=0.0, seed=0):
    return ssh_model(float(m), float(t), float(w), int(seed)), None


def _chiral3d(m=2.0):
    return chiral_3d_model(float(m)), None


def _diii(m=0.5, t=1.0, coupling=0.5):
    return diii_chain_model(float(m), float(t), float(coupling))


MODELS: dict[str, Callable] = {
    "shift": _shift,
    "defect-shift": _defect,
    "ssh": _ssh,
    "chiral3d": _chiral3d,
    "diii": _diii,
}


def build_model(name: str, params: dict | None = None, onsite_w: float = 0.0, seed: int = 0) -> ModelSpec:
    """Instantiate a registered model; unknown parameters raise ``TypeError``."""
    if name not in MODELS:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    params = dict(params or {})
    op, sym = MODELS[name](**params)
    if onsite_w:
        op = onsite_disorder(op, onsite_w, seed)
    return ModelSpec(name, params, op, sym)
