"""Finite-range lattice operators and the scalar inputs of the index theorem.

An operator ``A`` on ``l^2(Z^d) (x) C^N`` is stored through its hoppings,

    (A psi)(n) = sum_r A_r(n) psi(n - r),

so that the matrix element between target ``m`` and source ``n`` is
``A_{m-n}(m)``.  Translation-invariant operators have constant ``A_r`` and
Bloch symbol ``A(k) = sum_r A_r exp(-i k.r)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg as la
import scipy.optimize as opt
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .clifford import CliffordRep
from .errors import DimensionMismatchError, NotInvertibleError
from .lattice import LatticeBall

__all__ = [
    "HoppingOperator",
    "ConditionReport",
    "SymbolExtremum",
    "identity_operator",
    "restrict",
    "commutator_with_position",
    "dirac_commutator_norm",
    "norm_and_gap",
    "condition_report",
    "evaluate_symbol",
    "symbol_extremum",
    "multiplicative_disorder",
    "onsite_disorder",
    "periodic_matrix",
]

# singular values below this fraction of the norm count as a closed gap
GAP_ZERO_RTOL = 1e-10
# relative slack in the comparisons of the two sufficient conditions
CONDITION_RTOL = 1e-12

Profile = Callable[[tuple, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class HoppingOperator:
    """Finite-range operator on ``l^2(Z^d) (x) C^N``.

    Attributes
    ----------
    d, N : int
        Lattice dimension and fiber dimension.
    terms : dict
        Displacement tuple ``r`` -> reference coefficient ``A_r`` (``N x N``).
        For translation-invariant operators this is the coefficient itself.
    profile : callable, optional
        ``profile(r, sites)`` returns the site-resolved coefficients
        ``A_r(n)`` with shape ``(M, N, N)`` for target sites ``sites``.
        ``None`` means translation invariant.
    sup_norms : dict, optional
        ``r`` -> upper bound on ``sup_n ||A_r(n)||``; required with a profile.
    name : str
        Free-form label.
    """

    d: int
    N: int
    terms: Mapping
    profile: Profile | None = field(default=None, compare=False)
    sup_norms: Mapping | None = None
    name: str = ""

    def __post_init__(self):
        clean = {}
        for r, a in self.terms.items():
            r = tuple(int(x) for x in np.atleast_1d(r))
            if len(r) != self.d:
                raise DimensionMismatchError(f"displacement {r} is not {self.d}-dimensional")
            a = np.array(a, dtype=complex).reshape(self.N, self.N)
            a.setflags(write=False)
            clean[r] = a
        object.__setattr__(self, "terms", dict(sorted(clean.items())))
        if self.profile is not None and self.sup_norms is None:
            raise ValueError("site-dependent operators must declare sup_norms")

    @classmethod
    def from_terms(cls, d: int, terms: Mapping, name: str = "") -> "HoppingOperator":
        """Translation-invariant operator from ``{r: A_r}``; scalars allowed for N=1."""
        mats = {r: np.atleast_2d(np.asarray(a, dtype=complex)) for r, a in terms.items()}
        N = next(iter(mats.values())).shape[0] if mats else 1
        return cls(d, N, mats, name=name)

    @property
    def translation_invariant(self) -> bool:
        return self.profile is None

    @property
    def support(self) -> list:
        return list(self.terms)

    @property
    def range(self) -> float:
        """``R_max``: the largest Euclidean length of a displacement."""
        return max((math.hypot(*r) for r in self.terms), default=0.0)

    def coefficients(self, r, sites) -> np.ndarray:
        """Coefficients ``A_r(n)`` at the target sites, shape ``(M, N, N)``."""
        r = tuple(int(x) for x in np.atleast_1d(r))
        sites = np.asarray(sites, dtype=np.int64).reshape(-1, self.d)
        if r not in self.terms:
            return np.zeros((sites.shape[0], self.N, self.N), dtype=complex)
        if self.profile is None:
            return np.broadcast_to(self.terms[r], (sites.shape[0], self.N, self.N))
        return np.asarray(self.profile(r, sites), dtype=complex).reshape(-1, self.N, self.N)

    def sup_norm(self, r) -> float:
        """Upper bound on ``sup_n ||A_r(n)||``."""
        if self.sup_norms is not None:
            return float(self.sup_norms.get(r, 0.0))
        return float(np.linalg.norm(self.terms[r], 2))

    def adjoint(self) -> "HoppingOperator":
        """The adjoint, with hoppings ``(A*)_r(n) = A_{-r}(n - r)^*``."""
        terms = {tuple(-x for x in r): a.conj().T for r, a in self.terms.items()}
        if self.profile is None:
            return HoppingOperator(self.d, self.N, terms, name=f"{self.name}*")
        prof = self.profile

        def adj_profile(r, sites):
            mr = tuple(-x for x in r)
            c = np.asarray(prof(mr, np.asarray(sites) - np.asarray(r)), dtype=complex)
            return np.conj(np.swapaxes(c, -1, -2))

        sups = {tuple(-x for x in r): v for r, v in self.sup_norms.items()}
        return HoppingOperator(self.d, self.N, terms, adj_profile, sups, f"{self.name}*")

    def tensor_clifford(self, nu: int) -> "HoppingOperator":
        """Lift to the fiber ``C^nu (x) C^N`` as ``1_nu (x) A``."""
        one = np.eye(nu)
        terms = {r: np.kron(one, a) for r, a in self.terms.items()}
        if self.profile is None:
            return HoppingOperator(self.d, nu * self.N, terms, name=self.name)
        prof = self.profile

        def lifted(r, sites):
            c = np.asarray(prof(r, sites), dtype=complex)
            return np.kron(one[None], c)

        return HoppingOperator(self.d, nu * self.N, terms, lifted, dict(self.sup_norms), self.name)


def identity_operator(d: int, N: int = 1) -> HoppingOperator:
    return HoppingOperator(d, N, {(0,) * d: np.eye(N)}, name="identity")


@dataclass(frozen=True)
class ConditionReport:
    """Inputs and verdicts of the two sufficient conditions.

    ``cond1_ok`` holds iff ``comm_norm <= g^3 / (18 norm_A kappa)`` and
    ``cond2_ok`` iff ``2 g / kappa <= rho``.  ``bound_mode`` is ``"exact"``
    when all three numbers come from the Bloch symbol and ``"upper-bound"``
    when the commutator is bounded by the triangle inequality and the gap is
    estimated from a periodic truncation.
    """

    norm_A: float
    gap_g: float
    comm_norm: float
    kappa_max: float
    rho_min: float
    kappa: float
    rho: float
    cond1_ok: bool
    cond2_ok: bool
    bound_mode: str
    invertible: bool = True

    @property
    def verified(self) -> bool:
        return self.invertible and self.cond1_ok and self.cond2_ok

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SymbolExtremum:
    """Extremum of a singular value of a trigonometric polynomial over the torus.

    ``value`` is the best attained value (grid plus local polishing), so it is
    a lower bound of a supremum or an upper bound of an infimum.
    ``certified`` is the other-sided bound from the grid value and the
    Lipschitz constant of the symbol.
    """

    value: float
    certified: float
    argument: np.ndarray
    grid: int


def _stack_terms(terms: Mapping, d: int):
    rs = np.array(list(terms), dtype=float).reshape(-1, d)
    mats = np.stack([np.asarray(a, dtype=complex) for a in terms.values()])
    return rs, mats


def evaluate_symbol(terms: Mapping, d: int, k) -> np.ndarray:
    """``sum_r A_r exp(-i k.r)`` at the rows of ``k`` (shape ``(K, d)``)."""
    rs, mats = _stack_terms(terms, d)
    k = np.asarray(k, dtype=float).reshape(-1, d)
    phases = np.exp(-1j * (k @ rs.T))
    return np.einsum("kt,tab->kab", phases, mats)


def _grid(n: int, d: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop)
    coords = np.stack(np.unravel_index(idx, (n,) * d), axis=1)
    return 2 * np.pi * coords / n


def symbol_extremum(
    terms: Mapping,
    d: int,
    kind: str,
    start: int | None = None,
    tol: float = 1e-6,
    max_points: int = 2**21,
    chunk: int = 2**16,
) -> SymbolExtremum:
    """Supremum of the largest or infimum of the smallest singular value.

    The uniform grid is doubled until the polished value changes by less than
    ``tol`` (or the grid would exceed ``max_points``).  The Lipschitz bound
    ``sum_r ||A_r|| |r|_1`` of the symbol turns the grid value into a
    certificate.

    Parameters
    ----------
    terms : mapping
        ``{r: A_r}``.
    d : int
        Dimension.
    kind : {"max", "min"}
        ``"max"`` for ``sup_k s_max(A(k))``, ``"min"`` for ``inf_k s_min(A(k))``.
    start : int, optional
        Initial points per axis; 64 in one dimension and 32 otherwise.
    """
    if kind not in ("max", "min"):
        raise ValueError("kind must be 'max' or 'min'")
    if not terms:
        return SymbolExtremum(0.0, 0.0, np.zeros(d), 0)
    rs, mats = _stack_terms(terms, d)
    lip = float(sum(np.abs(r).sum() * np.linalg.norm(a, 2) for r, a in zip(rs, mats)))
    sign = 1.0 if kind == "max" else -1.0

    def sv(k):
        s = np.linalg.svd(evaluate_symbol(terms, d, k), compute_uv=False)
        return s[:, 0] if kind == "max" else s[:, -1]

    def scan(n):
        best_val, best_k = -np.inf, None
        cands = []
        total = n**d
        for lo in range(0, total, chunk):
            ks = _grid(n, d, lo, min(total, lo + chunk))
            vals = sign * sv(ks)
            top = np.argsort(vals)[-4:]
            cands.extend((vals[i], ks[i]) for i in top)
        cands.sort(key=lambda c: c[0])
        best_val, best_k = cands[-1]
        return sign * best_val, [c[1] for c in cands[-4:]]

    def polish(seeds, n):
        h = 2 * np.pi / n
        best = -np.inf
        arg = seeds[-1]
        for k0 in seeds:
            simplex = np.vstack([k0] + [k0 + h * e for e in np.eye(d)])
            res = opt.minimize(
                lambda k: -sign * sv(k)[0],
                k0,
                method="Nelder-Mead",
                options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000},
            )
            if -res.fun > best:
                best, arg = -res.fun, np.mod(res.x, 2 * np.pi)
        return sign * best, arg

    n = (64 if d == 1 else 32) if start is None else int(start)
    prev = None
    while True:
        grid_val, seeds = scan(n)
        pol, arg = polish(seeds, n)
        value = max(grid_val, pol) if kind == "max" else min(grid_val, pol)
        certified = grid_val + sign * lip * np.pi / n
        if prev is not None and abs(value - prev) < tol:
            break
        if (2 * n) ** d > max_points:
            break
        prev = value
        n *= 2
    if kind == "min":
        certified = max(certified, 0.0)
    return SymbolExtremum(float(value), float(certified), np.asarray(arg), n)


def restrict(op: HoppingOperator, ball: LatticeBall, sparse: bool = False):
    """Dirichlet restriction of ``op`` to the sites of ``ball``.

    Block ``(m, n)`` equals ``A_{m-n}(m)`` when both sites lie in the ball;
    hoppings leaving the ball are dropped.  Rows and columns are site-major
    with the fiber index minor.
    """
    if op.d != ball.d:
        raise DimensionMismatchError(f"operator has d={op.d} but ball has d={ball.d}")
    N, M = op.N, len(ball)
    rows, cols, vals = [], [], []
    a = np.arange(N)
    for r in op.terms:
        src = ball.lookup(ball.sites - np.asarray(r))
        ok = src >= 0
        if not np.any(ok):
            continue
        tgt = np.nonzero(ok)[0]
        coef = op.coefficients(r, ball.sites[ok])
        rows.append((tgt[:, None, None] * N + a[None, :, None]).repeat(N, axis=2).ravel())
        cols.append((src[ok][:, None, None] * N + a[None, None, :]).repeat(N, axis=1).ravel())
        vals.append(np.asarray(coef).ravel())
    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N * M, N * M)
        ).tocsr()
    else:
        mat = sp.csr_matrix((N * M, N * M), dtype=complex)
    mat.eliminate_zeros()
    return mat if sparse else mat.toarray()


def commutator_with_position(op: HoppingOperator, j: int) -> HoppingOperator:
    """The operator ``[X_j, A]`` (axes numbered from 1), with hoppings ``r_j A_r(n)``."""
    if not 1 <= j <= op.d:
        raise ValueError(f"axis must lie in 1..{op.d}, got {j}")
    keep = [r for r in op.terms if r[j - 1] != 0]
    terms = {r: r[j - 1] * op.terms[r] for r in keep}
    if op.profile is None:
        return HoppingOperator(op.d, op.N, terms, name=f"[X{j},{op.name}]")
    prof = op.profile

    def scaled(r, sites):
        return r[j - 1] * np.asarray(prof(r, sites), dtype=complex)

    sups = {r: abs(r[j - 1]) * op.sup_norm(r) for r in keep}
    return HoppingOperator(op.d, op.N, terms, scaled, sups, f"[X{j},{op.name}]")


def _clifford_fiber(op: HoppingOperator, rep: CliffordRep):
    if op.N % rep.nu:
        raise DimensionMismatchError(f"fiber dimension {op.N} is not a multiple of nu={rep.nu}")
    mult = op.N // rep.nu
    return [np.kron(g, np.eye(mult)) for g in rep.gammas]


def check_clifford_compatible(op: HoppingOperator, rep: CliffordRep, tol: float = 1e-12) -> float:
    """Largest ``||[Gamma_j (x) 1, A_r]||``; nonzero means ``[D, A]`` is unbounded."""
    gam = _clifford_fiber(op, rep)
    worst = 0.0
    for a in op.terms.values():
        for g in gam:
            worst = max(worst, float(np.linalg.norm(g @ a - a @ g, 2)))
    return worst


def dirac_commutator_norm(op: HoppingOperator, rep: CliffordRep, mode: str = "exact-symbol"):
    """Norm of ``[D, A]`` with ``D = sum_j Gamma_j X_j``.

    When the coefficients commute with the Clifford factor,
    ``[D, A] = sum_j Gamma_j [X_j, A]`` and its symbol is
    ``sum_j Gamma_j (sum_r r_j A_r exp(-i k.r))``.

    Parameters
    ----------
    mode : {"exact-symbol", "upper-bound"}
        ``"exact-symbol"`` maximizes the largest singular value of that
        symbol over the torus; ``"upper-bound"`` returns
        ``sum_r |r|_2 sup_n ||A_r(n)||``.

    Returns
    -------
    (float, str)
        The value and the mode actually used.
    """
    if op.d != rep.d:
        raise DimensionMismatchError(f"operator has d={op.d} but representation has d={rep.d}")
    gam = _clifford_fiber(op, rep)
    if check_clifford_compatible(op, rep) > 1e-12:
        raise ValueError("coefficients do not commute with the Clifford factor; [D, A] is unbounded")
    if mode == "upper-bound":
        return float(sum(math.hypot(*r) * op.sup_norm(r) for r in op.terms)), "upper-bound"
    if mode != "exact-symbol":
        raise ValueError(f"unknown mode {mode!r}")
    if not op.translation_invariant:
        raise ValueError("exact-symbol mode needs a translation-invariant operator")
    terms = {}
    for r, a in op.terms.items():
        c = sum(rj * g for rj, g in zip(r, gam)) @ a
        if np.any(c):
            terms[r] = c
    if not terms:
        return 0.0, "exact-symbol"
    return symbol_extremum(terms, op.d, "max").value, "exact-symbol"


def periodic_matrix(op: HoppingOperator, half_width: int, sparse: bool = False):
    """Restriction of ``op`` to the torus ``[-P, P)^d`` with periodic closure.

    Returns the matrix together with the array of box sites.
    """
    P = int(half_width)
    if 2 * P <= 2 * max((max(abs(x) for x in r) for r in op.terms), default=0):
        raise ValueError("periodic box is too small for the hopping range")
    d, N = op.d, op.N
    axis = np.arange(-P, P)
    sites = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    shape = (2 * P,) * d
    rows, cols, vals = [], [], []
    a = np.arange(N)
    tgt = np.arange(sites.shape[0])
    for r in op.terms:
        src_sites = np.mod(sites - np.asarray(r) + P, 2 * P)
        src = np.ravel_multi_index(tuple(src_sites.T), shape)
        coef = op.coefficients(r, sites)
        rows.append((tgt[:, None, None] * N + a[None, :, None]).repeat(N, axis=2).ravel())
        cols.append((src[:, None, None] * N + a[None, None, :]).repeat(N, axis=1).ravel())
        vals.append(np.asarray(coef).ravel())
    dim = N * sites.shape[0]
    mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    mat = mat.tocsr()
    return (mat if sparse else mat.toarray()), sites


def _extreme_singular_values(mat) -> tuple[float, float]:
    if not sp.issparse(mat) or mat.shape[0] <= 3000:
        dense = mat.toarray() if sp.issparse(mat) else mat
        s = la.svdvals(dense)
        return float(s[0]), float(s[-1])
    gram = (mat.conj().T @ mat).tocsc()
    top = spla.eigsh(gram, k=1, which="LA", return_eigenvectors=False)[0]
    try:
        low = spla.eigsh(gram, k=1, sigma=0, which="LM", return_eigenvectors=False)[0]
    except RuntimeError:  # exactly singular factorization
        low = 0.0
    return math.sqrt(max(top, 0.0)), math.sqrt(max(low, 0.0))


def norm_and_gap(op: HoppingOperator, mode: str = "symbol", rho_probe: float | None = None):
    """``||A||`` and ``g = ||A^{-1}||^{-1}``.

    Parameters
    ----------
    op : HoppingOperator
    mode : {"symbol", "truncation"}
        ``"symbol"`` takes extreme singular values of the Bloch symbol over a
        refined grid; ``"truncation"`` uses the periodic restriction to a box
        of side ``2 * rho_probe``.  The latter is an estimate, not a bound.
    rho_probe : float
        Half-width of the periodic box (truncation mode only).

    Returns
    -------
    (float, float)
        ``(norm_A, gap_g)``; ``gap_g`` is exactly ``0.0`` when the gap is
        closed to relative precision ``GAP_ZERO_RTOL``.
    """
    if mode == "symbol":
        if not op.translation_invariant:
            raise ValueError("symbol mode needs a translation-invariant operator")
        norm = symbol_extremum(op.terms, op.d, "max").value
        gap = symbol_extremum(op.terms, op.d, "min").value
    elif mode == "truncation":
        if rho_probe is None:
            raise ValueError("truncation mode needs rho_probe")
        P = max(int(math.ceil(rho_probe)), int(math.ceil(op.range)) + 1)
        mat, _ = periodic_matrix(op, P, sparse=True)
        norm, gap = _extreme_singular_values(mat)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if gap <= GAP_ZERO_RTOL * max(norm, 1.0):
        gap = 0.0
    return float(norm), float(gap)


def condition_report(
    op: HoppingOperator,
    rep: CliffordRep,
    kappa: float,
    rho: float,
    strict: bool = True,
    probe_factor: float = 4.0,
) -> ConditionReport:
    """Evaluate the two sufficient conditions for the half-signature identity.

    Translation-invariant operators use exact symbol values; site-dependent
    ones use a periodic truncation of half-width ``probe_factor * rho`` for
    ``||A||`` and ``g`` and the triangle-inequality bound for ``[D, A]``.

    Raises
    ------
    NotInvertibleError
        If the gap vanishes and ``strict`` is true.  With ``strict=False`` a
        report with ``invertible=False`` and both conditions failed is
        returned instead.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if op.translation_invariant:
        norm, gap = norm_and_gap(op, "symbol")
        comm, _ = dirac_commutator_norm(op, rep, "exact-symbol")
        mode = "exact"
    else:
        norm, gap = norm_and_gap(op, "truncation", rho_probe=probe_factor * rho)
        comm, _ = dirac_commutator_norm(op, rep, "upper-bound")
        mode = "upper-bound"
    if gap == 0.0:
        if strict:
            raise NotInvertibleError("operator is not invertible (gap closed)")
        return ConditionReport(norm, 0.0, comm, 0.0, math.inf, kappa, rho, False, False, mode, False)
    kappa_max = gap**3 / (18 * norm * comm) if comm > 0 else math.inf
    rho_min = 2 * gap / kappa
    cond1 = comm <= gap**3 / (18 * norm * kappa) * (1 + CONDITION_RTOL)
    cond2 = rho_min <= rho * (1 + CONDITION_RTOL)
    return ConditionReport(norm, gap, comm, kappa_max, rho_min, kappa, rho, bool(cond1), bool(cond2), mode)


def _zigzag(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, 2 * x, -2 * x - 1)


def site_uniforms(seed: int, stream: int, sites: np.ndarray) -> np.ndarray:
    """One uniform number in ``[0, 1)`` per site, independent of query order.

    Each site gets its own generator seeded by ``(seed, stream, site)``, so
    the disorder realization does not depend on which region is assembled.
    """
    sites = np.asarray(sites, dtype=np.int64).reshape(len(sites), -1)
    out = np.empty(sites.shape[0])
    for i, s in enumerate(_zigzag(sites)):
        out[i] = np.random.default_rng([int(seed), int(stream), *map(int, s)]).random()
    return out


def multiplicative_disorder(op: HoppingOperator, w: float, seed: int) -> HoppingOperator:
    """Multiply every coefficient ``A_r(n)`` by an independent factor in ``[1 - w, 1 + w]``."""
    if w < 0:
        raise ValueError("disorder strength must be non-negative")
    if w == 0:
        return op
    base = op
    order = {r: i for i, r in enumerate(op.terms)}

    def profile(r, sites):
        u = site_uniforms(seed, order[r], sites)
        return base.coefficients(r, sites) * (1 + w * (2 * u - 1))[:, None, None]

    sups = {r: (1 + w) * op.sup_norm(r) for r in op.terms}
    return HoppingOperator(op.d, op.N, op.terms, profile, sups, f"{op.name}+mult({w},{seed})")


def onsite_disorder(op: HoppingOperator, w: float, seed: int) -> HoppingOperator:
    """Add ``v_n 1`` to the on-site coefficient, ``v_n`` uniform in ``[-w/2, w/2]``."""
    if w < 0:
        raise ValueError("disorder strength must be non-negative")
    if w == 0:
        return op
    zero = (0,) * op.d
    terms = dict(op.terms)
    terms.setdefault(zero, np.zeros((op.N, op.N)))
    base = op
    stream = len(terms) + 1
    eye = np.eye(op.N)

    def profile(r, sites):
        c = np.array(base.coefficients(r, sites))
        if r == zero:
            c = c + (w * (site_uniforms(seed, stream, sites) - 0.5))[:, None, None] * eye
        return c

    sups = {r: op.sup_norm(r) if r in op.terms else 0.0 for r in terms}
    sups[zero] = sups[zero] + w / 2
    return HoppingOperator(op.d, op.N, terms, profile, sups, f"{op.name}+onsite({w},{seed})")
