"""Discrete Euclidean balls in Z^d and the finite-volume Dirac matrix."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .clifford import CliffordRep
from .errors import DimensionMismatchError

__all__ = ["LatticeBall", "build_ball", "dirac_matrix", "dirac_blocks"]

# relative slack so that e.g. rho = 2 g / kappa computed in floating point
# still contains the sites at distance exactly rho
_RADIUS_SLACK = 1e-9


@dataclass(frozen=True)
class LatticeBall:
    """Sites ``x`` of ``Z^d`` with ``|x|_2 <= rho`` in lexicographic order.

    Attributes
    ----------
    d : int
        Dimension.
    rho : float
        Radius.
    sites : ndarray of int, shape (M, d)
        Lexicographically sorted sites.
    """

    d: int
    rho: float
    sites: np.ndarray
    _table: np.ndarray = field(repr=False, compare=False)
    _reach: int = field(repr=False, compare=False)

    def __len__(self):
        return self.sites.shape[0]

    @property
    def index_of(self) -> dict:
        """Map from site tuple to its 0-based index."""
        return {tuple(int(c) for c in s): i for i, s in enumerate(self.sites)}

    def lookup(self, points) -> np.ndarray:
        """Vectorized site -> index map; points outside the ball give ``-1``."""
        pts = np.asarray(points, dtype=np.int64).reshape(-1, self.d)
        out = np.full(pts.shape[0], -1, dtype=np.int64)
        inside = np.all(np.abs(pts) <= self._reach, axis=1)
        if np.any(inside):
            shifted = pts[inside] + self._reach
            out[inside] = self._table[tuple(shifted.T)]
        return out

    def norms(self) -> np.ndarray:
        """Euclidean norm of every site."""
        return np.sqrt(np.sum(self.sites.astype(float) ** 2, axis=1))


def build_ball(d: int, rho: float) -> LatticeBall:
    """Enumerate the lattice points of the closed Euclidean ball of radius ``rho``.

    Examples
    --------
    >>> len(build_ball(3, 1))
    7
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if not rho > 0:
        raise ValueError(f"radius must be positive, got {rho!r}")
    reach = int(math.floor(rho * (1 + _RADIUS_SLACK)))
    bound = (rho * (1 + _RADIUS_SLACK)) ** 2
    axis = np.arange(-reach, reach + 1)
    # itertools.product enumerates in lexicographic order
    cube = np.array(list(itertools.product(axis, repeat=d)), dtype=np.int64).reshape(-1, d)
    sites = cube[np.sum(cube.astype(float) ** 2, axis=1) <= bound]
    table = np.full((2 * reach + 1,) * d, -1, dtype=np.int64)
    table[tuple((sites + reach).T)] = np.arange(sites.shape[0])
    sites.setflags(write=False)
    table.setflags(write=False)
    return LatticeBall(d, float(rho), sites, table, reach)


def dirac_blocks(ball: LatticeBall, rep: CliffordRep) -> np.ndarray:
    """Per-site blocks ``sum_j n_j Gamma_j``, shape ``(M, nu, nu)``."""
    if ball.d != rep.d:
        raise DimensionMismatchError(f"ball has d={ball.d} but representation has d={rep.d}")
    return np.einsum("mj,jab->mab", ball.sites.astype(float), np.stack(rep.gammas))


def dirac_matrix(ball: LatticeBall, rep: CliffordRep, multiplicity: int = 1, sparse: bool = False):
    """Finite-volume Dirac operator ``D_rho = sum_j Gamma_j X_j``.

    Parameters
    ----------
    ball : LatticeBall
    rep : CliffordRep
    multiplicity : int
        Orbital multiplicity ``m``; the fiber is ``C^nu (x) C^m`` and each site
        block is ``(sum_j n_j Gamma_j) (x) 1_m``.
    sparse : bool
        Return a CSR matrix instead of a dense array.

    Returns
    -------
    ndarray or scipy.sparse.csr_matrix
        Hermitian matrix of dimension ``nu * m * |ball|``.
    """
    blocks = dirac_blocks(ball, rep)
    if multiplicity != 1:
        blocks = np.kron(blocks, np.eye(multiplicity)[None])
    if sparse:
        return sp.block_diag(list(blocks), format="csr")
    M, b = blocks.shape[0], blocks.shape[1]
    out = np.zeros((M * b, M * b), dtype=complex)
    for i in range(M):
        out[i * b : (i + 1) * b, i * b : (i + 1) * b] = blocks[i]
    return out
