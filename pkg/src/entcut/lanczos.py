"""Lanczos solver for the lowest eigenpair of a real symmetric map.

Full reorthogonalization against the whole Krylov basis: the spectra in this
package carry near-degenerate multiplets, and without it ghost copies of
converged eigenvalues pollute the tridiagonal problem.  Restarts happen from
the current Ritz vector, so the eigenvalue estimate is monotone
non-increasing across restarts (variational bound).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import ConvergenceError

__all__ = ["lanczos_lowest"]

# relative threshold below which a new Krylov vector counts as linearly
# dependent on the previous ones (invariant-subspace breakdown)
_BREAKDOWN = 1e-13


def lanczos_lowest(apply, dim, seed=0, tol=1e-10, max_iter=60,
                   krylov_dim=40, v0=None):
    """Lowest eigenpair of the symmetric linear map ``apply`` on R^dim.

    Parameters
    ----------
    apply : callable
        Maps a length-``dim`` vector to ``A @ v``.  Must be symmetric.
    dim : int
        Dimension of the space.
    seed : int
        Seeds the random start vector (and nothing else); a fixed seed makes
        the result deterministic.
    tol : float
        Convergence requires ``||A v - lam v|| <= tol * max(1, |lam|)``.
    max_iter : int
        Maximum number of restart cycles.
    krylov_dim : int
        Krylov-space size per restart cycle.
    v0 : array, optional
        Start vector (e.g. a warm start from a previous solve); defaults to
        a seeded Gaussian vector.

    Returns
    -------
    (eigenvalue, eigenvector)

    Raises
    ------
    ConvergenceError
        After ``max_iter`` restarts without meeting the residual bound; the
        error carries the best value and residual reached.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    if v0 is None:
        v = rng.standard_normal(dim)
    else:
        v = np.array(v0, dtype=np.float64).reshape(dim)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        v = rng.standard_normal(dim)
        nv = np.linalg.norm(v)
    v = v / nv

    if dim == 1:
        lam = float(apply(np.ones(1))[0])
        return lam, np.ones(1)

    m = min(krylov_dim, dim)
    best_val = np.inf
    best_res = np.inf

    for _ in range(max_iter):
        V = np.empty((m, dim))
        V[0] = v
        alphas = np.empty(m)
        betas = np.empty(max(m - 1, 1))
        k = 0
        for j in range(m):
            w = apply(V[j])
            alphas[j] = V[j] @ w
            k = j + 1
            if j > 0:
                w = w - betas[j - 1] * V[j - 1]
            w = w - alphas[j] * V[j]
            # full reorthogonalization, twice for good measure
            Vk = V[:k]
            w -= Vk.T @ (Vk @ w)
            w -= Vk.T @ (Vk @ w)
            beta = np.linalg.norm(w)
            # a tiny beta means the Krylov space is (numerically) invariant:
            # the Ritz pair is already as good as this start can get
            if j == m - 1 or beta <= max(_BREAKDOWN, tol) * max(1.0, abs(alphas[j])):
                break
            betas[j] = beta
            V[j + 1] = w / beta
            # cheap interior convergence estimate: last component of the
            # Ritz vector times the next off-diagonal
            if j >= 2:
                vals, vecs = scipy.linalg.eigh_tridiagonal(
                    alphas[:k], betas[:k - 1], select="i",
                    select_range=(0, 0))
                if beta * abs(vecs[-1, 0]) <= 0.5 * tol * max(1.0, abs(vals[0])):
                    k = j + 1
                    break

        if k == 1:
            theta = alphas[0]
            x = V[0]
        else:
            vals, vecs = scipy.linalg.eigh_tridiagonal(
                alphas[:k], betas[:k - 1], select="i", select_range=(0, 0))
            theta = vals[0]
            x = vecs[:, 0] @ V[:k]
            x /= np.linalg.norm(x)
        # restarting from the Ritz vector keeps theta non-increasing, so the
        # latest cycle is always the best one
        resid = np.linalg.norm(apply(x) - theta * x)
        best_val, best_res = theta, resid
        if resid <= tol * max(1.0, abs(theta)):
            return float(theta), x
        v = x

    raise ConvergenceError(
        f"no convergence after {max_iter} restarts "
        f"(best residual {best_res:.3e})",
        best_value=float(best_val), best_residual=float(best_res))
