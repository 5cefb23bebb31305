"""Smallest eigenpairs of K x = lambda M x for SPD K and M.

``solve_smallest`` runs block Lanczos on the shift-inverted operator
``K^{-1} M`` (shift 0) in the M-inner product, with full
reorthogonalization and a fixed-seed start block. ``dense_reference_solve``
is an independent oracle for small systems: Cholesky of M followed by a
dense symmetric eigensolve.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionMismatch, FactorizationFailed, NoConvergence, TooLarge
from .femcore.assembly import SparseSym

logger = logging.getLogger(__name__)

LANCZOS_SEED = 20170519
# ||K x - lam M x|| / ||K x|| cannot drop below ~ eps ||K|| ||x|| / ||K x||,
# which is ~1e-6 for cubic Hermite meshes of a few hundred elements
DEFAULT_TOL = 1e-5
# convergence test on the shift-inverted operator, relative to the Ritz value
KRYLOV_TOL = 1e-11
DEFAULT_BLOCK = 3
CLUSTER_RTOL = 1e-8
DENSE_LIMIT = 2000


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with M-orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def residuals(self):
        return self.meta.get("residuals")

    def clusters(self, rtol: float = CLUSTER_RTOL):
        """Index groups of eigenvalues equal to relative ``rtol``."""
        groups, cur = [], [0]
        lam = self.eigenvalues
        for i in range(1, len(lam)):
            if abs(lam[i] - lam[cur[-1]]) <= rtol * abs(lam[cur[-1]]):
                cur.append(i)
            else:
                groups.append(cur)
                cur = [i]
        if len(lam):
            groups.append(cur)
        return groups

    def head(self, k: int) -> "Spectrum":
        return Spectrum(self.eigenvalues[:k], self.eigenvectors[:, :k],
                        {**self.meta, "residuals": None if self.residuals is None
                         else np.asarray(self.residuals)[:k]})


def _as_csr(A):
    if isinstance(A, SparseSym):
        return A.full
    return sp.csr_matrix(A)


def fix_signs(X: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry is positive."""
    X = np.array(X, copy=True)
    for j in range(X.shape[1]):
        i = int(np.argmax(np.abs(X[:, j])))
        if X[i, j] < 0:
            X[:, j] *= -1.0
    return X


def factorize_spd(K) -> spla.SuperLU:
    """Symmetric-pivoting LU (= LDL^T) of K; fails unless K is SPD."""
    A = _as_csr(K).tocsc()
    try:
        lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options=dict(SymmetricMode=True))
    except RuntimeError as exc:
        raise FactorizationFailed(f"factorization of K failed: {exc}") from exc
    d = lu.U.diagonal()
    if not np.all(d > 0) or not np.array_equal(lu.perm_r, lu.perm_c):
        raise FactorizationFailed("K is not symmetric positive definite")
    return lu


def residual_report(K, M, spectrum: Spectrum) -> np.ndarray:
    """Relative residuals ``||K x - lam M x|| / ||K x||`` recomputed from scratch."""
    K, M = _as_csr(K), _as_csr(M)
    X = spectrum.eigenvectors
    KX = K @ X
    R = KX - (M @ X) * spectrum.eigenvalues[None, :]
    return np.linalg.norm(R, axis=0) / np.linalg.norm(KX, axis=0)


def _m_orthonormalize(W, V, MV, M, rng, n_basis):
    """M-orthonormalize the columns of W against V[:, :n_basis] and each other.

    Columns that vanish (invariant subspace reached) are replaced by random
    vectors so the Krylov basis keeps growing.
    """
    n, b = W.shape
    Q = np.empty_like(W)
    MQ = np.empty_like(W)
    Vb, MVb = V[:, :n_basis], MV[:, :n_basis]
    for i in range(b):
        w = W[:, i].copy()
        ref = np.sqrt(max(w @ (M @ w), 0.0))
        for attempt in range(4):
            for _ in range(2):
                w -= Vb @ (MVb.T @ w)
                if i:
                    w -= Q[:, :i] @ (MQ[:, :i].T @ w)
            Mw = M @ w
            nrm = np.sqrt(max(w @ Mw, 0.0))
            if ref > 0 and nrm > 1e-10 * ref:
                break
            w = rng.standard_normal(n)
            ref = np.sqrt(w @ (M @ w))
        else:
            raise NoConvergence("could not extend the Krylov basis")
        Q[:, i] = w / nrm
        MQ[:, i] = Mw / nrm
    return Q, MQ


def solve_smallest(K, M, k: int, tol: float = DEFAULT_TOL, max_iters: int = 400,
                   block: int = DEFAULT_BLOCK, seed: int = LANCZOS_SEED,
                   meta: dict | None = None, rayleigh=None) -> Spectrum:
    """The ``k`` smallest eigenpairs of ``K x = lam M x``.

    Parameters
    ----------
    K, M : SparseSym or sparse matrix
        Symmetric, K positive definite, M positive definite.
    k : int
        Number of eigenpairs, ``k < n``.
    tol : float
        Bound on the relative residual ``||K x - lam M x|| / ||K x||``.
    max_iters : int
        Maximum number of Lanczos blocks.
    block : int
        Block size; eigenvalues of multiplicity up to ``block`` are resolved.
    rayleigh : callable, optional
        Maps eigenvector columns to Rayleigh quotients evaluated without the
        assembled matrices (see ``femcore.rayleigh_quotients``). When given,
        these replace the eigenvalues; on fine meshes they are several
        digits more accurate than quotients of the assembled matrices.

    Returns
    -------
    Spectrum
        Ascending eigenvalues, M-orthonormal eigenvectors.
    """
    t0 = time.perf_counter()
    Kc, Mc = _as_csr(K), _as_csr(M)
    n = Kc.shape[0]
    if Kc.shape != Mc.shape or Kc.shape[0] != Kc.shape[1]:
        raise DimensionMismatch(f"K is {Kc.shape}, M is {Mc.shape}")
    if not 0 < k < n:
        raise DimensionMismatch(f"need 0 < k < n, got k={k}, n={n}")
    lu = factorize_spd(Kc)
    rng = np.random.default_rng(seed)
    b = max(1, min(block, n))
    mmax = min(n, max_iters * b)
    V = np.empty((n, mmax))
    MV = np.empty((n, mmax))
    T = np.zeros((mmax, mmax))

    Q, MQ = _m_orthonormalize(rng.standard_normal((n, b)), V, MV, Mc, rng, 0)
    m = 0
    check_from = max(k + 2, 2 * b)
    for it in range(max_iters):
        bb = min(Q.shape[1], mmax - m)
        V[:, m:m + bb], MV[:, m:m + bb] = Q[:, :bb], MQ[:, :bb]
        W = lu.solve(MQ[:, :bb])
        C = MV[:, :m + bb].T @ W
        T[:m + bb, m:m + bb] = C
        T[m:m + bb, :m + bb] = C.T
        m += bb
        if m >= n:
            Bn = np.zeros((0, bb))
        else:
            for _ in range(2):
                W -= V[:, :m] @ (MV[:, :m].T @ W)
            nb = min(bb, n - m)
            Q, MQ = _m_orthonormalize(W[:, :nb], V, MV, Mc, rng, m)
            Bn = MQ.T @ W
        if m < check_from and m < mmax:
            continue
        mu, S = np.linalg.eigh(0.5 * (T[:m, :m] + T[:m, :m].T))
        idx = np.argsort(mu)[::-1][:k]
        mu_k, S_k = mu[idx], S[:, idx]
        est = np.linalg.norm(Bn @ S_k[m - bb:, :], axis=0) / np.abs(mu_k)
        if np.all(est <= KRYLOV_TOL) or m >= mmax:
            lam, X = _rayleigh_ritz(Kc, Mc, V[:, :m] @ S_k)
            # one inverse-iteration sweep smooths the rounding noise the
            # orthogonalized basis carries in stiff directions; eigenvalues
            # stay those of the Krylov Ritz step, which are more accurate
            _, X = _rayleigh_ritz(Kc, Mc, lu.solve(Mc @ X))
            if rayleigh is not None:
                lam = np.asarray(rayleigh(X), dtype=float)
                order = np.argsort(lam, kind="stable")
                lam, X = lam[order], X[:, order]
            spec = Spectrum(lam, X, {})
            res = residual_report(Kc, Mc, spec)
            if np.all(res <= tol):
                X = fix_signs(X)
                info = dict(meta or {})
                info.update(residuals=res, n=n, krylov_dim=m, blocks=it + 1,
                            seconds=time.perf_counter() - t0, tol=tol)
                logger.debug("lanczos: n=%d k=%d dim=%d max res=%.2e", n, k, m, res.max())
                return Spectrum(lam, X, info)
            if m >= mmax:
                raise NoConvergence(
                    f"residual {res.max():.2e} > tol {tol:g} after {it + 1} blocks (dim {m})")
    raise NoConvergence(f"no convergence within {max_iters} blocks")


def _rayleigh_ritz(K, M, X):
    """Rayleigh-Ritz of the pencil (K, M) on span(X); ascending, M-orthonormal."""
    Ka = X.T @ (K @ X)
    Ma = X.T @ (M @ X)
    lam, Y = sla.eigh(0.5 * (Ka + Ka.T), 0.5 * (Ma + Ma.T))
    return lam, X @ Y


def dense_reference_solve(K, M, meta: dict | None = None) -> Spectrum:
    """Full spectrum by Cholesky of M and a dense symmetric eigensolve."""
    Kd = K.toarray() if hasattr(K, "toarray") else np.asarray(K, dtype=float)
    Md = M.toarray() if hasattr(M, "toarray") else np.asarray(M, dtype=float)
    if Kd.shape != Md.shape:
        raise DimensionMismatch(f"K is {Kd.shape}, M is {Md.shape}")
    if Kd.shape[0] > DENSE_LIMIT:
        raise TooLarge(f"dense solve limited to {DENSE_LIMIT} DOFs, got {Kd.shape[0]}")
    L = sla.cholesky(Md, lower=True)
    C = sla.solve_triangular(L, sla.solve_triangular(L, Kd, lower=True).T, lower=True)
    lam, Y = sla.eigh(0.5 * (C + C.T))
    X = sla.solve_triangular(L.T, Y, lower=False)
    # Rayleigh quotients in the original pencil remove the O(eps ||C||)
    # error of the transformed eigenvalues
    lam = np.einsum("ij,ij->j", X, Kd @ X) / np.einsum("ij,ij->j", X, Md @ X)
    order = np.argsort(lam, kind="stable")
    spec = Spectrum(lam[order], fix_signs(X[:, order]), dict(meta or {}))
    spec.meta["residuals"] = residual_report(sp.csr_matrix(Kd), sp.csr_matrix(Md), spec)
    return spec
