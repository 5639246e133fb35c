"""Exact ground states and Schmidt decompositions at small sizes.

This is the ground truth the DMRG engine is checked against.  Constrained
Schmidt spectra are computed block-by-block over the shared cut height;
tensor-space spectra embed the state in the full product space and run one
plain bipartite SVD.

Cut convention: a cut at ``l`` puts sites 0..l-1 into the left subsystem,
so the shared height a_{l-1} belongs to the left block and labels it.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .lanczos import lanczos_lowest
from .rsos import PathBasis
from .spectrum import EntanglementSpectrum

__all__ = ["ground_state", "schmidt_constrained", "schmidt_tensor",
           "embed_tensor_state", "occupation_constrained"]


def ground_state(h, seed=0, tol=1e-12, max_iter=200, krylov_dim=60):
    """Lowest eigenpair of a sparse symmetric operator.

    The eigenvector sign is fixed by making its largest-magnitude component
    positive, so results are reproducible across runs and backends.
    """
    dim = h.shape[0]
    energy, vec = lanczos_lowest(lambda v: h @ v, dim, seed=seed, tol=tol,
                                 max_iter=max_iter, krylov_dim=krylov_dim)
    i = int(np.argmax(np.abs(vec)))
    if vec[i] < 0:
        vec = -vec
    return energy, vec


def schmidt_constrained(state, basis: PathBasis, l: int) -> EntanglementSpectrum:
    """Schmidt spectrum of a constrained-basis state at cut ``l``.

    The state matrix is indexed by the admissible left configurations
    (a_0..a_{l-1}) and right configurations (a_l..a_{L-1}); the adjacency
    constraint across the cut only bands the matrix, it does not decouple
    it, so one SVD of the whole (small) matrix is taken.  Labels tag each
    Schmidt vector with its dominant height at the cut site l-1.
    """
    state = np.asarray(state, dtype=np.float64).reshape(-1)
    if state.size != basis.dim:
        raise DomainError("state length does not match the basis")
    L = basis.L
    if not (1 <= l <= L - 1):
        raise DomainError(f"cut {l} out of range for L={L}")
    lef, il = np.unique(basis.paths[:, :l], axis=0, return_inverse=True)
    rig, ir = np.unique(basis.paths[:, l:], axis=0, return_inverse=True)
    m = np.zeros((lef.shape[0], rig.shape[0]))
    m[il, ir] = state
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    keep = s > 1e-300
    s, u = s[keep], u[:, keep]
    # dominant cut height of each left Schmidt vector
    edge = lef[:, l - 1].astype(np.intp) - 1
    prob = np.zeros((basis.p, s.size))
    np.add.at(prob, edge, u * u)
    labels = np.argmax(prob, axis=0) + 1
    return EntanglementSpectrum.from_weights(s * s, cut=l, labels=labels)


def embed_tensor_state(state, basis: PathBasis) -> np.ndarray:
    """Embed a constrained-basis state into the full p^L product space."""
    state = np.asarray(state, dtype=np.float64).reshape(-1)
    if state.size != basis.dim:
        raise DomainError("state length does not match the basis")
    digits = (basis.paths - 1).astype(np.int64)
    flat = np.ravel_multi_index(tuple(digits.T), (basis.p,) * basis.L)
    out = np.zeros(basis.p ** basis.L)
    out[flat] = state
    return out


def schmidt_tensor(state, l: int, site_dim: int) -> EntanglementSpectrum:
    """Schmidt spectrum of a full tensor-space state: one bipartite SVD."""
    state = np.asarray(state, dtype=np.float64).reshape(-1)
    L = int(round(np.log(state.size) / np.log(site_dim)))
    if site_dim ** L != state.size:
        raise DomainError(f"state length {state.size} is not a power of {site_dim}")
    if not (1 <= l <= L - 1):
        raise DomainError(f"cut {l} out of range for L={L}")
    m = state.reshape(site_dim ** l, -1)
    s = np.linalg.svd(m, compute_uv=False)
    return EntanglementSpectrum.from_weights(s * s, cut=l)


def occupation_constrained(state, basis: PathBasis) -> np.ndarray:
    """Per-site level probabilities of a constrained-basis state, (L, p)."""
    state = np.asarray(state, dtype=np.float64).reshape(-1)
    w = state * state
    out = np.zeros((basis.L, basis.p))
    for i in range(basis.L):
        out[i] = np.bincount(basis.paths[:, i] - 1, weights=w,
                             minlength=basis.p)
    return out
