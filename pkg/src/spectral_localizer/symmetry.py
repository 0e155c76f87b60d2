"""Real symmetries of the localizer and the resulting invariants.

Sign data:

* Dirac side: ``Sigma^T conj(D) Sigma = s_D D`` and ``Sigma^2 = s'_D``,
  fixed by ``d mod 8``.
* Operator side: ``S^T conj(A) S = A`` (``s_A = +1``) or ``A^*``
  (``s_A = -1``) and ``S^2 = s'_A``, fixed by an index ``j mod 8``.

The localizer then satisfies ``R^T conj(L) R = s_L L`` with

    s_L = s_A s_D,    s'_L = s'_D s'_A s_A^((s_D + 1) / 2),
    R = Sigma S sigma_1^{s_A} sigma_3^{s_A s_D},

where ``sigma^{+1} = 1`` and ``sigma^{-1} = sigma`` act on the 2x2 grading.
The invariant is ``Z``-valued for ``(+, +)``, ``2Z``-valued for ``(+, -)``,
a Pfaffian sign for ``(-, +)`` and trivial for ``(-, -)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .clifford import PAULI, CliffordRep
from .errors import DimensionMismatchError, NotInvertibleError, OddSignatureError, SymmetryError
from .operators import ConditionReport, HoppingOperator
from .signature import Inertia, inertia, pfaffian_sign

__all__ = [
    "DIRAC_SIGNS",
    "OPERATOR_SIGNS",
    "RealSymmetryData",
    "InvariantResult",
    "classify",
    "dirac_signs",
    "operator_signs",
    "build_R",
    "verify_symmetry",
    "z2_invariant",
    "reference_localizer",
    "square_root_R",
    "check_preconditions",
    "invariant_from_localizer",
]

#: (s_D, s'_D) by d mod 8
DIRAC_SIGNS = {1: (1, 1), 3: (-1, -1), 5: (1, -1), 7: (-1, 1)}
#: (s_A, s'_A) by j mod 8 (j = 8 stored under 0)
OPERATOR_SIGNS = {2: (-1, 1), 4: (1, -1), 6: (-1, -1), 0: (1, 1)}

KINDS = {(1, 1): "Z", (1, -1): "2Z", (-1, 1): "Z2", (-1, -1): "trivial"}


def dirac_signs(d: int) -> tuple[int, int]:
    if d % 2 == 0:
        raise ValueError("d must be odd")
    return DIRAC_SIGNS[d % 8]


def operator_signs(j: int) -> tuple[int, int]:
    if j % 2:
        raise ValueError("j must be even")
    return OPERATOR_SIGNS[j % 8]


def _sign(x, name):
    if x not in (1, -1):
        raise ValueError(f"{name} must be +1 or -1, got {x!r}")
    return int(x)


def classify(s_D: int, sp_D: int, s_A: int, sp_A: int) -> tuple[int, int, str]:
    """Localizer signs ``(s_L, s'_L)`` and the kind of invariant they allow."""
    s_D, sp_D = _sign(s_D, "s_D"), _sign(sp_D, "s'_D")
    s_A, sp_A = _sign(s_A, "s_A"), _sign(sp_A, "s'_A")
    s_L = s_A * s_D
    sp_L = sp_D * sp_A * (s_A if s_D == 1 else 1)
    return s_L, sp_L, KINDS[(s_L, sp_L)]


@dataclass(frozen=True, eq=False)
class RealSymmetryData:
    """Real unitaries and sign data of a symmetric pair ``(A, D)``.

    Attributes
    ----------
    sigma : ndarray
        ``Sigma`` on the Clifford factor (``nu x nu``, real).
    S : ndarray
        Real orthogonal matrix on the fiber ``C^nu (x) C^m`` with
        ``S^2 = s'_A``.
    sign_A, sign_prime_A : int
    sign_D, sign_prime_D : int
    """

    sigma: np.ndarray
    S: np.ndarray
    sign_A: int
    sign_prime_A: int
    sign_D: int
    sign_prime_D: int

    @classmethod
    def from_rep(cls, rep: CliffordRep, S, sign_A: int, sign_prime_A: int) -> "RealSymmetryData":
        S = np.asarray(S)
        if np.iscomplexobj(S):
            if np.any(S.imag):
                raise ValueError("S must be real")
            S = S.real
        return cls(np.asarray(rep.sigma, dtype=float), S.astype(float), sign_A, sign_prime_A, rep.sign_D, rep.sign_prime_D)

    @property
    def classification(self) -> tuple[int, int, str]:
        return classify(self.sign_D, self.sign_prime_D, self.sign_A, self.sign_prime_A)

    @property
    def s_L(self) -> int:
        return self.classification[0]

    @property
    def sp_L(self) -> int:
        return self.classification[1]

    @property
    def kind(self) -> str:
        return self.classification[2]

    def fiber_matrix(self) -> np.ndarray:
        """``(Sigma (x) 1_m) S`` on the fiber."""
        N = self.S.shape[0]
        nu = self.sigma.shape[0]
        if N % nu:
            raise DimensionMismatchError(f"fiber {N} is not a multiple of nu={nu}")
        return np.kron(self.sigma, np.eye(N // nu)) @ self.S


def _grading_factor(s_A: int, s_D: int) -> np.ndarray:
    g = np.eye(2)
    if s_A == -1:
        g = g @ PAULI[1].real
    if s_A * s_D == -1:
        g = g @ PAULI[3].real
    return g


def check_preconditions(data: RealSymmetryData, rep: CliffordRep | None = None, op: HoppingOperator | None = None):
    """Residuals of the standing assumptions; returns a dict of norms.

    Checks ``S`` real orthogonal with ``S^2 = s'_A``, ``S Sigma = Sigma S``,
    ``S`` commuting with the Clifford factor, ``Sigma`` commuting with the
    coefficients of ``A`` and ``S^T conj(A_r) S`` matching ``A_r`` or
    ``(A_{-r})^*`` as selected by ``s_A``.
    """
    S, N = data.S, data.S.shape[0]
    nu = data.sigma.shape[0]
    sig = np.kron(data.sigma, np.eye(N // nu))
    res = {
        "S_orthogonal": float(np.linalg.norm(S.T @ S - np.eye(N), 2)),
        "S_square": float(np.linalg.norm(S @ S - data.sign_prime_A * np.eye(N), 2)),
        "S_Sigma": float(np.linalg.norm(S @ sig - sig @ S, 2)),
    }
    if rep is not None:
        gam = [np.kron(g, np.eye(N // nu)) for g in rep.gammas]
        res["S_D"] = max(float(np.linalg.norm(S @ g - g @ S, 2)) for g in gam)
    if op is not None:
        res["Sigma_A"] = max(float(np.linalg.norm(sig @ a - a @ sig, 2)) for a in op.terms.values())
        worst = 0.0
        for r, a in op.terms.items():
            lhs = S.T @ a.conj() @ S
            if data.sign_A == 1:
                rhs = a
            else:
                mr = tuple(-x for x in r)
                rhs = op.terms[mr].conj().T if mr in op.terms else np.zeros_like(a)
            worst = max(worst, float(np.linalg.norm(lhs - rhs, 2)))
        res["S_A"] = worst
    return res


def build_R(data: RealSymmetryData, n_sites: int, tol: float = 1e-12, rep=None, op=None) -> sp.csr_matrix:
    """The real orthogonal ``R`` on the localizer space.

    The layout is grading outermost, then sites, then fiber, so
    ``R = g (x) 1_sites (x) (Sigma (x) 1_m) S`` with the grading factor
    ``g = sigma_1^{s_A} sigma_3^{s_A s_D}``.

    Raises
    ------
    SymmetryError
        If a standing assumption fails by more than ``tol``.
    """
    res = check_preconditions(data, rep, op)
    bad = {k: v for k, v in res.items() if v > tol}
    if bad:
        name, worst = max(bad.items(), key=lambda kv: kv[1])
        raise SymmetryError(f"symmetry precondition {name} violated (residual {worst:.3g})", worst)
    g = _grading_factor(data.sign_A, data.sign_D)
    fiber = data.fiber_matrix()
    R = sp.kron(sp.csr_matrix(g), sp.kron(sp.identity(n_sites), sp.csr_matrix(fiber)), format="csr")
    R.eliminate_zeros()
    return R


def verify_symmetry(L, R, s_L: int) -> float:
    """Frobenius norm of ``R^T conj(L) R - s_L L``."""
    M = getattr(L, "matrix", L)
    if M.shape != R.shape:
        raise DimensionMismatchError(f"L has shape {M.shape} but R has shape {R.shape}")
    if sp.issparse(M):
        diff = R.T @ M.conj() @ R - s_L * M
        return float(spla.norm(diff)) if diff.nnz else 0.0
    Rd = R.toarray() if sp.issparse(R) else np.asarray(R)
    return float(np.linalg.norm(Rd.T @ np.conj(M) @ Rd - s_L * M))


def square_root_R(R, branch: int = 1) -> np.ndarray:
    """``M`` with ``M^2 = R`` for an orthogonal involution ``R``.

    With ``P_pm = (1 pm R) / 2`` the first branch is ``M = P_+ + i P_-``
    (spectrum ``{1, i}``); ``branch = -1`` gives ``P_+ - i P_-``.
    """
    Rd = R.toarray() if sp.issparse(R) else np.asarray(R, dtype=float)
    one = np.eye(Rd.shape[0])
    return 0.5 * (one + Rd) + 0.5j * branch * (one - Rd)


def z2_invariant(L, R, tol: float = 1e-10, s_L: int | None = None, branch: int = 1) -> int:
    """Pfaffian sign of ``K = i M L M^*`` with ``M = R^{1/2}``.

    Requires ``R^2 = 1`` and ``R^T conj(L) R = -L``, which make ``K`` real and
    antisymmetric.

    Raises
    ------
    SymmetryError
        If ``R`` is not an involution or one of the required relations
        fails by more than ``tol``.
    """
    M0 = getattr(L, "matrix", L)
    Ld = M0.toarray() if sp.issparse(M0) else np.asarray(M0)
    Rd = R.toarray() if sp.issparse(R) else np.asarray(R, dtype=float)
    scale = max(1.0, float(np.max(np.abs(Ld))))
    if np.linalg.norm(Rd @ Rd - np.eye(Rd.shape[0])) > tol:
        raise SymmetryError("R is not an involution; the Pfaffian invariant needs s'_L = +1")
    if s_L is not None and s_L != -1:
        raise SymmetryError("the Pfaffian invariant needs s_L = -1")
    res = verify_symmetry(Ld, Rd, -1)
    if res > tol * scale:
        raise SymmetryError(f"R^T conj(L) R = -L fails (residual {res:.3g})", res)
    M = square_root_R(Rd, branch)
    K = 1j * M @ Ld @ M.conj().T
    imag = float(np.max(np.abs(K.imag)))
    asym = float(np.max(np.abs(K + K.T)))
    if imag > tol * scale or asym > tol * scale:
        raise SymmetryError(f"i M L M^* is not real antisymmetric (imag {imag:.3g}, sym {asym:.3g})", max(imag, asym))
    try:
        return pfaffian_sign(K.real, tol * scale)
    except NotInvertibleError:
        raise NotInvertibleError("localizer is singular; the Pfaffian sign is undefined") from None


def reference_localizer(L):
    """``[[L_11, 1], [1, L_22]]``: the localizer of ``A = 1`` with the same Dirac blocks.

    ``A = 1`` is the trivial representative of every symmetry class, so its
    Pfaffian sign serves as the reference for the relative Z2 value.
    """
    M0 = getattr(L, "matrix", L)
    n = M0.shape[0] // 2
    if sp.issparse(M0):
        M0 = sp.csr_matrix(M0)
        one = sp.identity(n, format="csr")
        return sp.bmat([[M0[:n, :n], one], [one, M0[n:, n:]]], format="csr")
    M0 = np.asarray(M0)
    one = np.eye(n)
    return np.block([[M0[:n, :n], one], [one, M0[n:, n:]]])


@dataclass(frozen=True, eq=False)
class InvariantResult:
    """Outcome of an index computation.

    ``kind`` is one of ``"Z"`` (value is the half-signature), ``"2Z"``
    (half-signature, even by symmetry), ``"Z2"`` and ``"trivial"`` (value 0).
    For ``"Z2"`` the value is the Pfaffian sign relative to the localizer of
    ``A = 1``: ``+1`` trivial, ``-1`` nontrivial; ``details`` keeps the raw
    sign and the reference sign.
    """

    kind: str
    value: int
    signature: int
    inertia: Inertia
    condition_report: ConditionReport | None = None
    symmetry_residuals: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.condition_report is not None and self.condition_report.verified


def invariant_from_localizer(
    L,
    symmetry: RealSymmetryData | None = None,
    n_sites: int | None = None,
    tol: float | None = None,
    report: ConditionReport | None = None,
    rep: CliffordRep | None = None,
    op: HoppingOperator | None = None,
    sym_tol: float = 1e-10,
) -> InvariantResult:
    """Dispatch an assembled localizer to the invariant its symmetry class allows.

    Without symmetry data the result is the half-signature.  With symmetry
    data the relation ``R^T conj(L) R = s_L L`` is verified first and its
    residual stored in the result.
    """
    inn = inertia(L, tol)
    if inn.n_zero:
        raise NotInvertibleError(f"localizer has {inn.n_zero} eigenvalues within tol={inn.tol:.3g} of zero")
    sig = inn.signature
    if symmetry is None:
        if sig % 2:
            raise OddSignatureError(f"signature {sig} is odd")
        return InvariantResult("Z", sig // 2, sig, inn, report)
    M0 = getattr(L, "matrix", L)
    if n_sites is None:
        n_sites = M0.shape[0] // (2 * symmetry.S.shape[0])
    R = build_R(symmetry, n_sites, rep=rep, op=op)
    s_L, sp_L, kind = symmetry.classification
    residual = verify_symmetry(M0, R, s_L)
    residuals = {"localizer": residual}
    scale = max(1.0, float(abs(M0).max()))
    if residual > sym_tol * scale:
        raise SymmetryError(f"localizer violates its declared real symmetry (residual {residual:.3g})", residual)
    if kind in ("Z", "2Z"):
        if sig % 2:
            raise OddSignatureError(f"signature {sig} is odd")
        return InvariantResult(kind, sig // 2, sig, inn, report, residuals)
    if sig != 0:
        raise SymmetryError(f"signature {sig} must vanish when s_L = -1")
    if kind == "trivial":
        return InvariantResult(kind, 0, sig, inn, report, residuals)
    raw = z2_invariant(M0, R, sym_tol, s_L)
    ref = z2_invariant(reference_localizer(M0), R, sym_tol, s_L)
    details = {"raw_pfaffian_sign": raw, "reference_sign": ref}
    return InvariantResult(kind, raw * ref, sig, inn, report, residuals, details)
