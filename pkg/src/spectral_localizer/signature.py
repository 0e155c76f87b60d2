"""Inertia of Hermitian matrices and Pfaffian signs of real antisymmetric ones.

Inertia is computed from a symmetric-indefinite factorization
``P H P^T = L B L^*`` with ``B`` block diagonal (1x1 and 2x2 pivots); by
Sylvester's law of inertia ``H`` and ``B`` have the same inertia.  Large sparse
matrices are split into a block-tridiagonal partition and reduced level by
level with the Haynsworth additivity ``In(H) = In(S) + In(H / S)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from .errors import DimensionMismatchError, NotInvertibleError, OddSignatureError

__all__ = [
    "Inertia",
    "default_tol",
    "inertia",
    "inertia_ldl",
    "inertia_eig",
    "inertia_blocked",
    "level_partition",
    "half_signature",
    "pfaffian",
    "pfaffian_sign",
    "SymmetryBlocks",
    "symmetry_blocks",
    "dihedral_blocks",
]

DENSE_LIMIT = 6000
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Inertia:
    """Eigenvalue counts by sign.

    ``n_zero`` counts eigenvalues with ``|lambda| <= tol``.
    """

    n_plus: int
    n_minus: int
    n_zero: int
    tol: float
    method: str = ""

    @property
    def signature(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def dim(self) -> int:
        return self.n_plus + self.n_minus + self.n_zero

    def __add__(self, other: "Inertia") -> "Inertia":
        return Inertia(
            self.n_plus + other.n_plus,
            self.n_minus + other.n_minus,
            self.n_zero + other.n_zero,
            max(self.tol, other.tol),
            self.method or other.method,
        )


def _norm_inf(H) -> float:
    if sp.issparse(H):
        return float(abs(H).sum(axis=1).max()) if H.shape[0] else 0.0
    return float(np.max(np.sum(np.abs(H), axis=1))) if H.shape[0] else 0.0


def default_tol(H, tol: float | None = None) -> float:
    """``max(dim * eps * ||H||_inf, tol)``."""
    base = float(H.shape[0] * np.finfo(float).eps * _norm_inf(H))
    return base if tol is None else max(base, float(tol))


def _check_hermitian(H):
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, _norm_inf(H))
    diff = H - H.conj().T
    err = abs(diff).max() if sp.issparse(diff) else np.max(np.abs(diff), initial=0.0)
    if err > HERMITIAN_TOL * scale:
        raise ValueError(f"matrix is not Hermitian (max |H - H^*| = {err:.3g})")


def _count(vals, tol):
    vals = np.asarray(vals, dtype=float)
    return int(np.sum(vals > tol)), int(np.sum(vals < -tol)), int(np.sum(np.abs(vals) <= tol))


def _pivot_eigenvalues(dmat) -> np.ndarray:
    # eigenvalues of the block-diagonal factor with 1x1 and 2x2 blocks
    n = dmat.shape[0]
    sub = np.abs(np.diagonal(dmat, -1)) > 0 if n > 1 else np.zeros(0, bool)
    out = np.empty(n)
    i = 0
    while i < n:
        if i < n - 1 and sub[i]:
            out[i : i + 2] = np.linalg.eigvalsh(dmat[i : i + 2, i : i + 2])
            i += 2
        else:
            out[i] = dmat[i, i].real
            i += 1
    return out


def inertia_eig(H, tol: float | None = None) -> Inertia:
    """Inertia from the full eigenvalue list (oracle path)."""
    H = H.toarray() if sp.issparse(H) else np.asarray(H)
    tol = default_tol(H, tol)
    return Inertia(*_count(la.eigvalsh(H), tol), tol, "eig")


def inertia_ldl(H, tol: float | None = None) -> Inertia:
    """Inertia from the Bunch-Kaufman factorization; falls back to eigenvalues
    when a pivot is within ``tol`` of zero."""
    H = H.toarray() if sp.issparse(H) else np.asarray(H)
    tol = default_tol(H, tol)
    if H.shape[0] == 0:
        return Inertia(0, 0, 0, tol, "ldl")
    # drop round-off asymmetry so the diagonal is exactly real
    _, dmat, _ = la.ldl(0.5 * (H + H.conj().T), lower=True, hermitian=True)
    piv = _pivot_eigenvalues(dmat)
    if np.min(np.abs(piv)) <= tol:
        return inertia_eig(H, tol)
    return Inertia(*_count(piv, tol), tol, "ldl")


def level_partition(H) -> list[np.ndarray]:
    """Block-tridiagonal partition of a sparse Hermitian matrix.

    Index sets are breadth-first levels of the adjacency graph of ``H``, rooted
    at a pseudo-peripheral vertex of each connected component.  Entries of
    ``H`` only couple equal or neighbouring levels.
    """
    A = sp.csr_matrix(H)
    A = (abs(A) + abs(A).T).tocsr()
    ncomp, labels = csgraph.connected_components(A, directed=False)
    parts = []
    for c in range(ncomp):
        nodes = np.nonzero(labels == c)[0]
        if nodes.size == 1:
            parts.append(nodes)
            continue
        sub = A[nodes][:, nodes]
        start = 0
        for _ in range(2):
            dist = csgraph.shortest_path(sub, unweighted=True, indices=start, directed=False)
            start = int(np.argmax(dist))
        dist = dist.astype(int)
        order = np.argsort(dist, kind="stable")
        bounds = np.searchsorted(dist[order], np.arange(dist.max() + 2))
        parts.extend(nodes[order[bounds[i] : bounds[i + 1]]] for i in range(dist.max() + 1))
    return parts


def _ldl_solver(S):
    S = 0.5 * (S + S.conj().T)
    lu, dmat, perm = la.ldl(S, lower=True, hermitian=True)
    piv = _pivot_eigenvalues(dmat)
    tri = lu[perm]

    n = S.shape[0]
    band = np.zeros((3, n), dtype=dmat.dtype)
    band[1] = np.diagonal(dmat)
    if n > 1:
        band[0, 1:] = np.diagonal(dmat, 1)
        band[2, :-1] = np.diagonal(dmat, -1)

    def solve(B):
        # S = lu B lu^*, with lu[perm] unit lower triangular and B block diagonal
        y = la.solve_triangular(tri, B[perm], lower=True, unit_diagonal=True)
        z = la.solve_banded((1, 1), band, y)
        x = np.empty_like(z)
        x[perm] = la.solve_triangular(tri.conj().T, z, lower=False, unit_diagonal=True)
        return x

    return piv, solve


def inertia_blocked(H, tol: float | None = None, partition=None, merge_rtol: float = 1e-6) -> Inertia:
    """Inertia by successive Schur complements over a block-tridiagonal partition.

    For a partition with ``H_ij = 0`` when ``|i - j| > 1`` the complements
    ``S_1 = H_11`` and ``S_k = H_kk - H_k,k-1 S_{k-1}^{-1} H_k-1,k`` satisfy
    ``In(H) = sum_k In(S_k)``.  A level whose complement has a pivot below
    ``merge_rtol * ||H||`` is merged with the next level before elimination.

    Parameters
    ----------
    H : sparse or dense Hermitian matrix
    tol : float, optional
        Zero threshold, defaulted as in :func:`default_tol`.
    partition : list of index arrays, optional
        Defaults to :func:`level_partition`.
    """
    H = sp.csr_matrix(H)
    tol = default_tol(H, tol)
    scale = _norm_inf(H)
    parts = level_partition(H) if partition is None else [np.asarray(p) for p in partition]
    total = Inertia(0, 0, 0, tol, "blocked")
    cur_idx = parts[0]
    cur = H[cur_idx][:, cur_idx].toarray()
    k = 0
    while True:
        piv, solve = _ldl_solver(cur)
        last = k + 1 == len(parts)
        if np.min(np.abs(piv)) <= merge_rtol * scale and not last:
            # ill-conditioned complement: merge the next level and retry
            nxt = parts[k + 1]
            cross = H[cur_idx][:, nxt].toarray()
            cur = np.block([[cur, cross], [cross.conj().T, H[nxt][:, nxt].toarray()]])
            cur_idx = np.concatenate([cur_idx, nxt])
            k += 1
            continue
        if np.min(np.abs(piv)) <= tol:
            # the last complement is numerically singular; count it exactly
            total = total + inertia_eig(cur, tol)
        else:
            total = total + Inertia(*_count(piv, tol), tol, "blocked")
        if last:
            return Inertia(total.n_plus, total.n_minus, total.n_zero, tol, "blocked")
        # earlier levels do not couple to the next one, so raw entries suffice
        nxt = parts[k + 1]
        coupling = H[nxt][:, cur_idx].toarray()
        cur = H[nxt][:, nxt].toarray()
        if np.any(coupling):
            cur = cur - coupling @ solve(coupling.conj().T)
        cur_idx = nxt
        k += 1


def inertia(H, tol: float | None = None, method: str = "auto") -> Inertia:
    """Inertia of a Hermitian matrix.

    Parameters
    ----------
    H : ndarray, sparse matrix or LocalizerMatrix
    tol : float, optional
        Eigenvalues with ``|lambda| <= tol`` count as zero; the effective
        threshold is ``max(dim * eps * ||H||_inf, tol)``.
    method : {"auto", "ldl", "eig", "blocked"}
        ``"auto"`` uses the dense factorization up to ``DENSE_LIMIT`` and the
        blocked sparse elimination beyond.  For a LocalizerMatrix the blocked
        path uses its slab partition.

    Returns
    -------
    Inertia
    """
    partition = getattr(H, "metadata", {}).get("partition")
    H = getattr(H, "matrix", H)
    if not sp.issparse(H):
        H = np.asarray(H)
    _check_hermitian(H)
    if method == "auto":
        method = "ldl" if H.shape[0] <= DENSE_LIMIT else "blocked"
    if method == "ldl":
        return inertia_ldl(H, tol)
    if method == "eig":
        return inertia_eig(H, tol)
    if method == "blocked":
        return inertia_blocked(H, tol, partition)
    raise ValueError(f"unknown method {method!r}")


def half_signature(H, tol: float | None = None, method: str = "auto") -> int:
    """Half of the signature of an invertible Hermitian matrix.

    Raises
    ------
    NotInvertibleError
        If an eigenvalue lies within ``tol`` of zero.
    OddSignatureError
        If ``n_plus - n_minus`` is odd.
    """
    inn = inertia(H, tol, method)
    if inn.n_zero:
        raise NotInvertibleError(f"matrix is not invertible at tol={inn.tol:.3g} ({inn.n_zero} zero modes)")
    if inn.signature % 2:
        raise OddSignatureError(f"signature {inn.signature} is odd")
    return inn.signature // 2


def _check_antisymmetric(K, tol):
    K = np.asarray(K)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {K.shape}")
    if K.shape[0] % 2:
        raise DimensionMismatchError("Pfaffian of an odd-dimensional matrix")
    if np.iscomplexobj(K):
        if np.max(np.abs(K.imag), initial=0.0) > tol:
            raise ValueError("matrix is not real")
        K = K.real
    K = K.astype(float)
    if np.max(np.abs(K + K.T), initial=0.0) > tol:
        raise ValueError("matrix is not antisymmetric")
    return 0.5 * (K - K.T)


def _tridiagonalize(K):
    # Householder reduction T = Q^T K Q; returns T and the number of reflections
    A = np.array(K, dtype=float)
    n = A.shape[0]
    reflections = 0
    for k in range(n - 2):
        x = A[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0 or np.all(x[1:] == 0):
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0]) if x[0] != 0 else alpha
        v /= np.linalg.norm(v)
        # H A H with H = 1 - 2 v v^T on the trailing block; v^T A v = 0
        sub = A[k + 1 :, :]
        w = v @ sub  # row vector v^T A
        A[k + 1 :, :] = sub - 2 * np.outer(v, w)
        sub = A[:, k + 1 :]
        w = sub @ v
        A[:, k + 1 :] = sub - 2 * np.outer(w, v)
        reflections += 1
    return A, reflections


def pfaffian(K, tol: float = 1e-10) -> float:
    """Pfaffian of a real antisymmetric matrix via Householder tridiagonalization.

    Each reflection is orthogonal with determinant ``-1`` and
    ``Pf(Q^T K Q) = det(Q) Pf(K)``, so ``Pf(K)`` is the product of the
    superdiagonal entries ``T[2i, 2i+1]`` times ``(-1)**reflections``.
    """
    K = _check_antisymmetric(K, tol)
    if K.shape[0] == 0:
        return 1.0
    T, refl = _tridiagonalize(K)
    return float((-1) ** refl * np.prod(np.diagonal(T, 1)[::2]))


def pfaffian_sign(K, tol: float = 1e-10) -> int:
    """Sign of the Pfaffian of a real antisymmetric invertible matrix.

    The sign is read from the tridiagonal form (no overflow-prone product is
    needed); ``|Pf(K)|^2 = det(K)`` is checked in logarithmic form.

    Raises
    ------
    NotInvertibleError
        If a tridiagonal pivot vanishes at ``tol`` relative to ``||K||``.
    """
    K = _check_antisymmetric(K, tol)
    if K.shape[0] == 0:
        return 1
    T, refl = _tridiagonalize(K)
    piv = np.diagonal(T, 1)[::2]
    scale = max(np.max(np.abs(K)), np.finfo(float).tiny)
    if np.min(np.abs(piv)) <= tol * scale:
        raise NotInvertibleError("antisymmetric matrix is singular at tolerance")
    logpf = np.sum(np.log(np.abs(piv)))
    sign_det, logdet = np.linalg.slogdet(K)
    if sign_det <= 0 or abs(2 * logpf - logdet) > 1e-6 * max(1.0, abs(logdet)):
        raise ArithmeticError("Pfaffian magnitude inconsistent with the determinant")
    s = (-1) ** refl * int(np.prod(np.sign(piv)))
    return int(s)


@dataclass(frozen=True, eq=False)
class SymmetryBlocks:
    """Isometries onto invariant subspaces of a symmetry group.

    ``bases[key]`` is a sparse ``n x n_key`` isometry; the spectrum of a
    commuting ``H`` is the union of the spectra of ``Q^* H Q`` over the keys,
    each repeated ``multiplicities[key]`` times.
    """

    labels: tuple
    bases: dict
    multiplicities: dict = field(default_factory=dict)

    @property
    def eigenvalues(self) -> tuple:
        return self.labels

    def multiplicity(self, key) -> int:
        return int(self.multiplicities.get(key, 1))

    @property
    def dim(self) -> int:
        return sum(Q.shape[1] * self.multiplicity(k) for k, Q in self.bases.items())

    def blocks(self, H):
        """Restrictions ``Q^* H Q`` for every key."""
        H = sp.csr_matrix(getattr(H, "matrix", H))
        return {k: (Q.conj().T @ H @ Q).tocsr() for k, Q in self.bases.items()}

    def leakage(self, H) -> float:
        """``max_key || H Q - Q (Q^* H Q) ||_max``; zero iff every subspace is invariant."""
        H = sp.csr_matrix(getattr(H, "matrix", H))
        worst = 0.0
        for Q in self.bases.values():
            HQ = H @ Q
            diff = HQ - Q @ (Q.conj().T @ HQ)
            if diff.nnz:
                worst = max(worst, float(abs(diff).max()))
        return worst

    def spectrum(self, H, check_tol: float = 1e-10) -> np.ndarray:
        """Full spectrum of ``H`` from the blocks, sorted.

        Raises
        ------
        DimensionMismatchError
            If the subspaces do not account for the whole space.
        ValueError
            If ``H`` does not commute with the symmetry (leakage above
            ``check_tol`` times the largest entry).
        """
        M = getattr(H, "matrix", H)
        if self.dim != M.shape[0]:
            raise DimensionMismatchError(f"blocks cover {self.dim} of {M.shape[0]} dimensions")
        scale = max(1.0, float(abs(M).max()))
        leak = self.leakage(M)
        if leak > check_tol * scale:
            raise ValueError(f"matrix does not commute with the symmetry (leakage {leak:.3g})")
        out = []
        H = sp.csr_matrix(M)
        for k, Q in self.bases.items():
            # one dense block at a time; eigvalsh reads a single triangle and
            # may overwrite it, so no symmetrized copy is needed
            B = (Q.conj().T @ H @ Q).toarray()
            vals = la.eigvalsh(B, overwrite_a=True, check_finite=False)
            del B
            out.extend([vals] * self.multiplicity(k))
        return np.sort(np.concatenate(out))


def symmetry_blocks(perm, phases, order: int) -> SymmetryBlocks:
    """Eigenbasis of the monomial unitary ``U e_j = phases[j] e_{perm[j]}``.

    ``U**order`` must be the identity.  For each cycle ``O`` of ``perm`` with
    phase product ``c`` and every ``mu`` with ``mu**order = 1`` and
    ``mu**|O| = c``, the vector ``sum_t mu^{-t} U^t e_j`` is an eigenvector.
    """
    perm = np.asarray(perm, dtype=np.int64)
    phases = np.asarray(phases, dtype=complex)
    n = perm.size
    mus = np.exp(2j * np.pi * np.arange(order) / order)
    seen = np.zeros(n, dtype=bool)
    cols = {i: ([], [], []) for i in range(order)}  # rows, col ids, values
    counters = [0] * order
    for j in range(n):
        if seen[j]:
            continue
        pos, amp = [j], [1.0 + 0j]
        cur, a = j, 1.0 + 0j
        while True:
            a = a * phases[cur]
            cur = perm[cur]
            if cur == j:
                break
            pos.append(cur)
            amp.append(a)
        seen[pos] = True
        length = len(pos)
        c = a  # U^length e_j = c e_j
        for i, mu in enumerate(mus):
            if abs(mu**length - c) > 1e-9:
                continue
            coef = np.array([mu ** (-t) * amp[t] for t in range(length)]) / np.sqrt(length)
            r, ci, v = cols[i]
            r.extend(pos)
            ci.extend([counters[i]] * length)
            v.extend(coef)
            counters[i] += 1
    bases = {}
    for i, mu in enumerate(mus):
        r, ci, v = cols[i]
        if counters[i]:
            key = complex(np.round(mu.real, 12), np.round(mu.imag, 12))
            bases[key] = sp.csr_matrix((v, (r, ci)), shape=(n, counters[i]))
    if sum(counters) != n:
        raise ValueError("U**order is not the identity on every cycle")
    return SymmetryBlocks(tuple(bases), bases)


def _compose(g, h):
    """Monomial product ``g h`` with ``x e_j = phases[j] e_{perm[j]}``."""
    pg, fg = g
    ph, fh = h
    return pg[ph], fh * fg[ph]


def _same(g, h) -> bool:
    return np.array_equal(g[0], h[0]) and np.allclose(g[1], h[1], atol=1e-12)


def _group_with_character(generators, chars, limit: int = 64):
    """Elements of the group generated by monomial unitaries with a candidate
    character value on each; returns ``None`` if the values are not a homomorphism."""
    n = generators[0][0].size
    ident = (np.arange(n), np.ones(n, dtype=complex))
    elems, vals = [ident], [1.0 + 0j]
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for gen, c in zip(generators, chars):
                cand = _compose(gen, elems[i])
                cv = c * vals[i]
                for j, e in enumerate(elems):
                    if _same(cand, e):
                        if abs(vals[j] - cv) > 1e-9:
                            return None
                        break
                else:
                    elems.append(cand)
                    vals.append(cv)
                    nxt.append(len(elems) - 1)
                    if len(elems) > limit:
                        raise ValueError("generated group is larger than expected")
        frontier = nxt
    return elems, vals


def _isotypic_basis(elems, vals) -> sp.csr_matrix:
    """One normalized projected vector per orbit for a one-dimensional character."""
    n = elems[0][0].size
    perms = np.stack([e[0] for e in elems])
    phases = np.stack([e[1] for e in elems])
    chi = np.conj(np.asarray(vals))[:, None]
    seen = np.zeros(n, dtype=bool)
    rows, cols, data = [], [], []
    col = 0
    for j in range(n):
        if seen[j]:
            continue
        idx = perms[:, j]
        seen[idx] = True
        coef = chi[:, 0] * phases[:, j]
        uniq, inv = np.unique(idx, return_inverse=True)
        acc = np.zeros(uniq.size, dtype=complex)
        np.add.at(acc, inv, coef)
        nrm = np.linalg.norm(acc)
        if nrm < 1e-9:
            continue
        rows.extend(uniq)
        cols.extend([col] * uniq.size)
        data.extend(acc / nrm)
        col += 1
    return sp.csr_matrix((data, (rows, cols)), shape=(n, col))


def dihedral_blocks(rotation, reflection, order: int) -> SymmetryBlocks:
    """Block reduction for the dihedral group generated by a monomial rotation
    ``U`` (``U**order = 1``, ``order`` even) and reflection ``P``
    (``P**2 = 1``, ``P U P = U^{-1}``).

    One-dimensional irreducible representations (``U -> pm 1``,
    ``P -> pm 1``) give blocks of multiplicity one.  Each two-dimensional
    irreducible representation is represented by the ``U``-eigenspace with
    eigenvalue ``mu``, ``Im mu > 0``, with multiplicity two since ``P`` maps it
    onto the isospectral ``conj(mu)`` eigenspace.
    """
    if order % 2:
        raise ValueError("order must be even")
    U = (np.asarray(rotation[0], dtype=np.int64), np.asarray(rotation[1], dtype=complex))
    P = (np.asarray(reflection[0], dtype=np.int64), np.asarray(reflection[1], dtype=complex))
    n = U[0].size
    ident = (np.arange(n), np.ones(n, dtype=complex))
    PP = _compose(P, P)
    if not _same(PP, ident):
        raise ValueError("reflection does not square to the identity")
    Uinv = U
    for _ in range(order - 2):
        Uinv = _compose(U, Uinv)
    if not _same(_compose(_compose(P, U), P), Uinv):
        raise ValueError("reflection does not invert the rotation")
    bases, mults = {}, {}
    for cu in (1, -1):
        for cp in (1, -1):
            found = _group_with_character([U, P], [cu, cp], limit=2 * order)
            if found is None:
                raise ValueError("generators do not define a dihedral group")
            Q = _isotypic_basis(*found)
            if Q.shape[1]:
                bases[f"U{cu:+d}P{cp:+d}"] = Q
                mults[f"U{cu:+d}P{cp:+d}"] = 1
    cyc = symmetry_blocks(U[0], U[1], order)
    for mu, Q in cyc.bases.items():
        if mu.imag > 1e-9:
            key = f"mu={mu.real:+.6g}{mu.imag:+.6g}i"
            bases[key] = Q
            mults[key] = 2
    out = SymmetryBlocks(tuple(bases), bases, mults)
    if out.dim != n:
        raise ValueError(f"reduction covers {out.dim} of {n} dimensions")
    return out
