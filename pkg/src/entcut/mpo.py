"""Matrix product operators with site-dependent tensors.

Tensor index order is (left bond, right bond, physical out, physical in).
The first tensor has left bond 1, the last right bond 1.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

__all__ = ["Mpo"]


class Mpo:
    def __init__(self, tensors):
        self.tensors = [np.ascontiguousarray(t, dtype=np.float64) for t in tensors]
        for i, t in enumerate(self.tensors):
            if t.ndim != 4:
                raise ShapeError(f"MPO tensor {i} must be rank 4, got {t.shape}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[1] != 1:
            raise ShapeError("MPO must start and end with trivial bonds")
        for a, b in zip(self.tensors, self.tensors[1:]):
            if a.shape[1] != b.shape[0]:
                raise ShapeError("mismatched internal MPO bonds")

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def phys_dims(self):
        return [t.shape[2] for t in self.tensors]

    @property
    def bond_dims(self):
        return [t.shape[1] for t in self.tensors[:-1]]

    def dense(self) -> np.ndarray:
        """Contract to a full d^L x d^L matrix.  Small chains only."""
        cur = self.tensors[0][0]            # (w, dout, din)
        cur = cur.transpose(1, 2, 0)        # (dout, din, w)
        for t in self.tensors[1:]:
            cur = np.einsum("abw,wvst->asbtv", cur, t)
            do, s, di, ti, w = cur.shape
            cur = cur.reshape(do * s, di * ti, w)
        return np.ascontiguousarray(cur[:, :, 0])

    def expectation(self, mps) -> float:
        """<psi|H|psi> for a (not necessarily canonical) MPS."""
        env = np.ones((1, 1, 1))            # (bra bond, mpo bond, ket bond)
        for a, w in zip(mps.tensors, self.tensors):
            env = np.tensordot(env, a, axes=(2, 0))          # (bra, w, dphys, ket')
            env = np.tensordot(env, w, axes=((1, 2), (0, 3)))  # (bra, ket', w', dout)
            env = np.tensordot(a, env, axes=((0, 1), (0, 3)))  # (bra', ket', w') -> wait order
            env = env.transpose(0, 2, 1)
        return float(env[0, 0, 0])
