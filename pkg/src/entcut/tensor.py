"""Dense tensor primitives used by the exact and DMRG solvers.

Tensors are C-contiguous float64 numpy arrays throughout, so a reshape is
always a free view and never reorders data.  Everything in scope is real
symmetric, hence no complex arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericError, ShapeError

__all__ = ["SvdResult", "contract", "truncated_svd"]


@dataclass
class SvdResult:
    """Truncated SVD factors together with the exact discarded weight.

    ``u`` has orthonormal columns, ``vt`` orthonormal rows, ``s`` is sorted
    descending and nonnegative.  ``discarded_weight`` is the sum of the
    squared singular values that were dropped.
    """

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray
    discarded_weight: float

    @property
    def rank(self) -> int:
        return self.s.size


def contract(a, b, pairs):
    """Contract ``a`` and ``b`` over the given ``(axis_of_a, axis_of_b)`` pairs.

    The result carries the unpaired axes of ``a`` in their original order,
    followed by the unpaired axes of ``b``; each entry is the sum over the
    paired indices.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    axes_a, axes_b = [], []
    for pa, pb in pairs:
        if not (-a.ndim <= pa < a.ndim) or not (-b.ndim <= pb < b.ndim):
            raise ShapeError(f"axis pair ({pa},{pb}) out of range for shapes "
                             f"{a.shape} and {b.shape}")
        if a.shape[pa] != b.shape[pb]:
            raise ShapeError(f"axis {pa} of {a.shape} does not match axis {pb} "
                             f"of {b.shape}")
        axes_a.append(pa % a.ndim)
        axes_b.append(pb % b.ndim)
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def truncated_svd(m, max_keep: int, weight_cutoff: float = 0.0) -> SvdResult:
    """SVD of a matrix, truncated by rank cap and discarded-weight budget.

    Keeps the smallest number ``k <= max_keep`` of leading singular values
    whose discarded squared weight stays strictly under ``weight_cutoff``;
    with ``weight_cutoff = 0`` nothing is discarded except by the rank cap.
    At least one singular value is always kept.  The discarded weight is
    reported as the actual sum of the dropped squared values.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {m.shape}")
    if max_keep < 1:
        raise DomainError("max_keep must be >= 1")
    if not (0.0 <= weight_cutoff < 1.0):
        raise DomainError("weight_cutoff must lie in [0, 1)")
    if not np.all(np.isfinite(m)):
        raise NumericError("non-finite entries in SVD input")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        u, s, vt = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    w = s * s
    n = s.size
    # tail[k] = squared weight discarded when keeping the leading k values
    tail = np.zeros(n + 1)
    tail[:n] = np.cumsum(w[::-1])[::-1]
    k = n
    if weight_cutoff > 0.0:
        feasible = np.nonzero(tail[1:] < weight_cutoff)[0]
        if feasible.size:
            k = int(feasible[0]) + 1
    k = max(1, min(k, max_keep, n))
    return SvdResult(u=np.ascontiguousarray(u[:, :k]),
                     s=s[:k].copy(),
                     vt=np.ascontiguousarray(vt[:k]),
                     discarded_weight=float(np.sum(w[k:])))
