"""Independent reference computations.

* winding number and odd Chern number of a Bloch symbol;
* closed-form spectrum of the shift-model path operator;
* numerical spectral flow by inertia counting;
* eta partial sums of finite spectra;
* the index of a compact perturbation of the identity;
* the Pfaffian by expansion over perfect matchings.

Orientation: the shift ``(S psi)(m) = psi(m + 1)`` has symbol ``e^{ik}``,
counter-clockwise winding ``+1`` and Noether index
``dim ker - dim coker = +1`` for ``Pi S Pi + 1 - Pi`` with ``Pi`` the
projection onto ``x >= 0``.  All signs below are calibrated so that this
operator has index ``+1``: the d=1 index equals the counter-clockwise winding
of ``det A(k)``, and the d=3 index equals the odd Chern number with the
normalization ``(1/3!) (i / 2 pi)^2 int Tr((A^{-1} dA)^3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .clifford import CliffordRep
from .errors import ConvergenceError, DimensionMismatchError, NotInvertibleError
from .lattice import LatticeBall, dirac_matrix
from .operators import HoppingOperator, evaluate_symbol, restrict
from .signature import inertia

__all__ = [
    "BlochSymbol",
    "QuadratureResult",
    "FlowResult",
    "winding_number_d1",
    "odd_chern_d3",
    "odd_chern_number",
    "shift_localizer_spectrum",
    "shift_crossings",
    "localizer_path",
    "spectral_flow",
    "eta_partial_sum",
    "perturbation_index",
    "pfaffian_combinatorial",
]


@dataclass(frozen=True, eq=False)
class BlochSymbol:
    """``A(k) = sum_r A_r exp(-i k.r)`` for a translation-invariant operator."""

    d: int
    N: int
    terms: dict

    @classmethod
    def from_operator(cls, op: HoppingOperator, nu: int = 1) -> "BlochSymbol":
        """Symbol of ``op``; with ``nu > 1`` the operator must be ``1_nu (x) a``
        and the symbol of ``a`` is returned."""
        if not op.translation_invariant:
            raise ValueError("the symbol needs a translation-invariant operator")
        if op.N % nu:
            raise DimensionMismatchError(f"fiber {op.N} is not a multiple of {nu}")
        m = op.N // nu
        terms = {}
        for r, a in op.terms.items():
            small = a[:m, :m]
            if nu > 1 and not np.allclose(a, np.kron(np.eye(nu), small), atol=1e-14, rtol=0):
                raise ValueError("operator is not of the form 1_nu (x) a")
            terms[r] = np.array(small)
        return cls(op.d, m, terms)

    def __call__(self, k) -> np.ndarray:
        return evaluate_symbol(self.terms, self.d, k)

    def derivative(self, k, j: int) -> np.ndarray:
        """Exact ``d A / d k_j`` (axes numbered from 0)."""
        terms = {r: -1j * r[j] * a for r, a in self.terms.items() if r[j]}
        if not terms:
            k = np.asarray(k, dtype=float).reshape(-1, self.d)
            return np.zeros((k.shape[0], self.N, self.N), dtype=complex)
        return evaluate_symbol(terms, self.d, k)

    def conjugate_operator(self) -> "BlochSymbol":
        """Symbol of the entrywise complex conjugate operator, ``conj(A(-k))``."""
        return BlochSymbol(self.d, self.N, {r: a.conj() for r, a in self.terms.items()})


class QuadratureResult(NamedTuple):
    value: int
    raw: float
    residual: float
    grid: int
    refinement: float

    def __int__(self):
        return self.value


def _uniform_grid(n: int, d: int, lo: int, hi: int) -> np.ndarray:
    idx = np.arange(lo, hi)
    return 2 * np.pi * np.stack(np.unravel_index(idx, (n,) * d), axis=1) / n


def _winding_once(symbol: BlochSymbol, n: int, rtol: float):
    k = 2 * np.pi * np.arange(n + 1)[:, None] / n
    det = np.linalg.det(symbol(k))
    scale = max(1.0, float(np.max(np.abs(det))))
    if np.min(np.abs(det)) <= rtol * scale:
        raise NotInvertibleError("symbol determinant vanishes on the grid")
    steps = np.angle(det[1:] / det[:-1])
    return float(np.sum(steps) / (2 * np.pi)), float(np.max(np.abs(steps)))


def winding_number_d1(symbol: BlochSymbol, grid: int = 64, max_grid: int = 2**20, rtol: float = 1e-10) -> int:
    """Counter-clockwise winding of ``det A(k)`` over ``k in [0, 2 pi]``.

    Phase increments between neighbouring grid points are summed; the grid
    is doubled until two successive values agree and every increment is
    below ``pi / 2`` (so no turn can hide between grid points).

    Raises
    ------
    NotInvertibleError
        If ``|det A(k)|`` drops below ``rtol`` times its maximum on the grid.
    ConvergenceError
        If no agreement is reached by ``max_grid`` points.
    """
    if symbol.d != 1:
        raise DimensionMismatchError("winding number needs d = 1")
    n = int(grid)
    prev = None
    while n <= max_grid:
        w, step = _winding_once(symbol, n, rtol)
        if prev is not None and round(w) == round(prev) and step < np.pi / 2 and abs(w - round(w)) < 1e-6:
            return int(round(w))
        prev = w
        n *= 2
    raise ConvergenceError("winding number did not converge")


def _chern3_integrand(symbol: BlochSymbol, k) -> np.ndarray:
    A = symbol(k)
    Ainv = np.linalg.inv(A)
    B = [Ainv @ symbol.derivative(k, j) for j in range(3)]
    t123 = np.einsum("kab,kbc,kca->k", B[0], B[1], B[2])
    t132 = np.einsum("kab,kbc,kca->k", B[0], B[2], B[1])
    # sum over the 3! orderings with signs; cyclic orderings have equal traces
    return 3 * (t123 - t132)


def _chern3_once(symbol: BlochSymbol, n: int, chunk: int, rtol: float) -> complex:
    total = 0j
    N3 = n**3
    for lo in range(0, N3, chunk):
        k = _uniform_grid(n, 3, lo, min(N3, lo + chunk))
        s = np.linalg.svd(symbol(k), compute_uv=False)
        if np.min(s[:, -1]) <= rtol * max(1.0, float(np.max(s[:, 0]))):
            raise NotInvertibleError("symbol is singular on the grid")
        total += np.sum(_chern3_integrand(symbol, k))
    # (1/3!) (i / 2 pi)^2 times the integral; trapezoid = mean times (2 pi)^3
    const = (1 / 6) * (1j / (2 * np.pi)) ** 2 * (2 * np.pi) ** 3
    return const * total / N3


def odd_chern_d3(symbol: BlochSymbol, grid: int = 32, chunk: int = 2**15, rtol: float = 1e-10) -> QuadratureResult:
    """Odd Chern number of a d=3 symbol by the periodic trapezoidal rule.

    ``Ch = (1/3!) (i/2pi)^2 int Tr((A^{-1} dA)^3)``; the integrand is
    ``3 [Tr(B1 B2 B3) - Tr(B1 B3 B2)]`` with ``B_j = A^{-1} d_j A`` from
    exact derivatives.  The value is also computed on the doubled grid and
    the difference reported as ``refinement``.

    Raises
    ------
    ConvergenceError
        If the distance of the finer value to the nearest integer exceeds 0.1.
    """
    if symbol.d != 3:
        raise DimensionMismatchError("odd_chern_d3 needs d = 3")
    coarse = _chern3_once(symbol, grid, chunk, rtol)
    fine = _chern3_once(symbol, 2 * grid, chunk, rtol)
    raw = float(fine.real)
    value = int(round(raw))
    residual = abs(raw - value)
    if residual > 0.1:
        raise ConvergenceError(f"odd Chern number not converged (raw {raw:.4f}); refine the grid")
    return QuadratureResult(value, raw, residual, 2 * grid, float(abs(fine - coarse)))


def odd_chern_number(symbol: BlochSymbol, grid: int = 32) -> QuadratureResult:
    """Odd Chern number for ``d in {1, 3}``; for d = 1 it is minus the winding."""
    if symbol.d == 1:
        w = winding_number_d1(symbol, grid)
        return QuadratureResult(-w, float(-w), 0.0, grid, 0.0)
    return odd_chern_d3(symbol, grid)


def shift_localizer_spectrum(n: int, kappa: float, lam: float, k_range) -> list[tuple[float, float]]:
    """Eigenvalue pairs of ``[[kappa X, lam A], [lam A^*, -kappa X]]`` for ``A = S^n``.

    With ``(S psi)(m) = psi(m + 1)`` the upper site ``k`` couples only to the
    lower site ``k + n`` through the block ``[[kappa k, lam], [lam, -kappa (k+n)]]``,
    whose eigenvalues are

        b_pm(k) = -kappa n / 2 pm sqrt(kappa^2 (k + n/2)^2 + lam^2).

    ``b_+(k)`` vanishes exactly when ``n^2 - (n + 2k)^2 = 4 lam^2 / kappa^2``,
    i.e. for ``k = -j`` with ``n^2 - (n - 2j)^2 = 4 lam^2 / kappa^2``.

    Returns
    -------
    list of (b_minus, b_plus)
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if not 0 <= lam <= 1:
        raise ValueError("lambda must lie in [0, 1]")
    out = []
    for k in k_range:
        root = math.sqrt((kappa * (k + n / 2)) ** 2 + lam**2)
        out.append((-kappa * n / 2 - root, -kappa * n / 2 + root))
    return out


def shift_crossings(n: int, kappa: float) -> list[float]:
    """Crossing parameters ``lam_j = kappa sqrt(j (n - j))`` for ``j = 1..|n|``."""
    m = abs(n)
    return sorted(kappa * math.sqrt(j * (m - j)) for j in range(1, m + 1))


def localizer_path(op: HoppingOperator, rep: CliffordRep, ball: LatticeBall, kappa: float) -> Callable:
    """``lam -> kappa D_hat + lam H`` with ``D_hat = diag(D, -D)`` and
    ``H = [[0, A], [A^*, 0]]`` on the ball."""
    mult = op.N // rep.nu
    D = dirac_matrix(ball, rep, mult)
    A = restrict(op, ball)
    Dhat = np.block([[kappa * D, np.zeros_like(A)], [np.zeros_like(A), -kappa * D]])
    H = np.block([[np.zeros_like(A), A], [A.conj().T, np.zeros_like(A)]])

    def path(lam):
        return Dhat + lam * H

    return path


@dataclass(frozen=True)
class FlowResult:
    """Spectral flow with the located crossings.

    ``crossings`` lists ``(lam, change)`` with ``change`` the number of
    eigenvalues crossing upward minus downward near ``lam``.  ``sig_start``
    counts zero modes of the initial matrix with weight 0.
    """

    flow: int
    crossings: list
    sig_start: int
    sig_end: int
    start_kernel: int

    @property
    def half_difference(self) -> float:
        return (self.sig_end - self.sig_start) / 2


def spectral_flow(path: Callable, steps: int = 100, xtol: float = 1e-10, tol: float | None = None) -> FlowResult:
    """Spectral flow of ``lam -> path(lam)`` over ``[0, 1]`` by inertia counting.

    On each grid interval the signature difference counts the net number of
    eigenvalues crossing zero; intervals with a change are bisected down to
    ``xtol`` to locate the crossings.  A kernel of ``path(0)`` is allowed:
    its eigenvalues count with weight 0 at the start (the convention in which
    a finite matrix has eta invariant equal to its signature), and the
    change between ``lam = 0`` and ``lam = xtol`` is reported as a crossing at
    ``lam = 0``.

    Raises
    ------
    NotInvertibleError
        If ``path(1)`` is singular at the working tolerance.
    """
    cache = {}

    def sig(lam):
        if lam not in cache:
            cache[lam] = inertia(path(lam), tol)
        return cache[lam]

    start = sig(0.0)
    end = sig(1.0)
    if end.n_zero:
        raise NotInvertibleError("the end point of the path is singular")
    crossings = []
    lo = 0.0
    if start.n_zero:
        # walk away from the kernel geometrically; eigenvalues leaving zero
        # may grow only like a power of lam
        probe, first = xtol, 1.0 / steps
        while sig(probe).n_zero and probe < first:
            probe *= 10
        if sig(probe).n_zero:
            raise NotInvertibleError("kernel at the start of the path persists")
        delta = sig(probe).signature - start.signature
        if delta:
            crossings.append((0.0, delta / 2))
        lo = probe

    def locate(a, b):
        sa, sb = sig(a), sig(b)
        change = sb.signature - sa.signature
        if change == 0:
            return
        if b - a <= xtol:
            crossings.append((0.5 * (a + b), change / 2))
            return
        mid = 0.5 * (a + b)
        if sig(mid).n_zero:  # landed on a crossing; nudge
            mid = mid + 0.25 * (b - a) * 1e-3
        locate(a, mid)
        locate(mid, b)

    grid = np.linspace(lo, 1.0, steps + 1)
    for a, b in zip(grid[:-1], grid[1:]):
        locate(float(a), float(b))
    total = sum(c for _, c in crossings)
    half = (end.signature - start.signature) / 2
    if abs(total - half) > 1e-12 or total != int(total):
        raise ArithmeticError(f"crossing count {total} differs from half signature change {half}")
    return FlowResult(int(total), sorted(crossings), start.signature, end.signature, start.n_zero)


def eta_partial_sum(eigs, s: float) -> float:
    """``sum_j sgn(lambda_j) |lambda_j|^{-s}`` over a finite spectrum."""
    eigs = np.asarray(eigs, dtype=float).ravel()
    if np.any(eigs == 0):
        raise NotInvertibleError("eta sum undefined with a zero eigenvalue")
    if s == 0:
        return float(np.sum(np.sign(eigs)))
    return float(np.sum(np.sign(eigs) * np.abs(eigs) ** (-s)))


class IndexReport(NamedTuple):
    index: int
    kernel: int
    cokernel: int
    window: tuple


def perturbation_index(op: HoppingOperator, window: tuple[int, int], rtol: float = 1e-10) -> IndexReport:
    """Index of ``Pi A Pi + 1 - Pi`` for a d=1 operator equal to ``1`` outside ``window``.

    Outside the window the operator acts as the identity, so the Fredholm
    operator is the identity plus a matrix supported on the window and its
    index is that of the square window block.  Kernel and cokernel dimensions
    of the block are reported from its singular values.

    Raises
    ------
    ValueError
        If ``op`` is not the identity on the sites bordering the window or
        couples the window to the outside.
    """
    if op.d != 1:
        raise DimensionMismatchError("perturbation_index needs d = 1")
    lo, hi = int(window[0]), int(window[1])
    R = int(math.ceil(op.range))
    border = np.array([[x] for x in list(range(lo - 2 * R - 2, lo)) + list(range(hi + 1, hi + 2 * R + 3))])
    eye = np.eye(op.N)
    for r in op.terms:
        c = op.coefficients(r, border)
        target = eye if r == (0,) else np.zeros_like(eye)
        if not np.allclose(c, target[None]):
            raise ValueError("operator differs from the identity outside the window")
    sites = np.arange(lo, hi + 1)
    M = len(sites)
    T = np.zeros((M * op.N, M * op.N), dtype=complex)
    pi = np.repeat(sites >= 0, op.N).astype(float)
    for r in op.terms:
        coef = op.coefficients(r, sites[:, None])
        for i, m in enumerate(sites):
            j = m - r[0] - lo
            if 0 <= j < M:
                T[i * op.N : (i + 1) * op.N, j * op.N : (j + 1) * op.N] = coef[i]
            elif np.any(coef[i]):
                raise ValueError(f"site {m} couples to site {m - r[0]} outside the window")
    T = pi[:, None] * T * pi[None, :] + np.diag(1 - pi)
    s = la.svdvals(T)
    thresh = rtol * max(1.0, s[0])
    ker = int(np.sum(s <= thresh))
    coker = ker  # square block
    return IndexReport(ker - coker, ker, coker, (lo, hi))


def pfaffian_combinatorial(K) -> float:
    """Pfaffian as the signed sum over perfect matchings (exponential cost)."""
    K = np.asarray(K)
    n = K.shape[0]
    if n % 2:
        return 0.0

    def rec(idx):
        if not idx:
            return 1.0
        first, rest = idx[0], idx[1:]
        total = 0.0
        for pos, j in enumerate(rest):
            sign = -1.0 if pos % 2 else 1.0
            total += sign * K[first, j] * rec(rest[:pos] + rest[pos + 1 :])
        return total

    return float(rec(tuple(range(n))))
