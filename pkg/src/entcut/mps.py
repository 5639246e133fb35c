"""Matrix product states for finite open chains.

Site tensors have index order (left bond, physical, right bond).  A state
keeps a mixed-canonical gauge: tensors strictly left of ``center`` are left
isometries, tensors strictly right of it right isometries.  Gauge moves use
QR factorizations, so they never truncate.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ShapeError
from .spectrum import EntanglementSpectrum

__all__ = ["Mps"]


class Mps:
    def __init__(self, tensors, center=0):
        self.tensors = [np.ascontiguousarray(t, dtype=np.float64) for t in tensors]
        self.center = center
        for i, t in enumerate(self.tensors):
            if t.ndim != 3:
                raise ShapeError(f"MPS tensor {i} must be rank 3, got {t.shape}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ShapeError("MPS must start and end with trivial bonds")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def product(cls, local_states) -> "Mps":
        """Bond-dimension-1 product state from per-site vectors."""
        tensors = []
        for v in local_states:
            v = np.asarray(v, dtype=np.float64)
            v = v / np.linalg.norm(v)
            tensors.append(v.reshape(1, v.size, 1))
        return cls(tensors, center=0)

    @classmethod
    def basis_product(cls, dims, levels) -> "Mps":
        """Product state |levels[0], levels[1], ...> (0-based levels)."""
        locs = []
        for d, a in zip(dims, levels):
            v = np.zeros(d)
            v[a] = 1.0
            locs.append(v)
        return cls.product(locs)

    @classmethod
    def two_branch(cls, branch_a, branch_b) -> "Mps":
        """Equal-weight superposition of two product states (bond dim 2)."""
        La = len(branch_a)
        tensors = []
        for i, (va, vb) in enumerate(zip(branch_a, branch_b)):
            va = np.asarray(va, float) / np.linalg.norm(va)
            vb = np.asarray(vb, float) / np.linalg.norm(vb)
            d = va.size
            if La == 1:
                t = (va + vb).reshape(1, d, 1)
            elif i == 0:
                t = np.zeros((1, d, 2))
                t[0, :, 0] = va
                t[0, :, 1] = vb
            elif i == La - 1:
                t = np.zeros((2, d, 1))
                t[0, :, 0] = va
                t[1, :, 0] = vb
            else:
                t = np.zeros((2, d, 2))
                t[0, :, 0] = va
                t[1, :, 1] = vb
            tensors.append(t)
        psi = cls(tensors, center=0)
        psi.canonicalize(0)
        psi.normalize()
        return psi

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------
    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def phys_dims(self):
        return [t.shape[1] for t in self.tensors]

    @property
    def bond_dims(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "Mps":
        return Mps([t.copy() for t in self.tensors], center=self.center)

    def norm(self) -> float:
        c = self.tensors[self.center]
        return float(np.linalg.norm(c))

    def normalize(self) -> None:
        c = self.tensors[self.center]
        n = np.linalg.norm(c)
        if n == 0.0:
            raise DomainError("cannot normalize a zero MPS")
        self.tensors[self.center] = c / n

    # ------------------------------------------------------------------
    # gauge moves (QR based, lossless)
    # ------------------------------------------------------------------
    def _move_right(self) -> None:
        c = self.center
        t = self.tensors[c]
        dl, d, dr = t.shape
        q, r = np.linalg.qr(t.reshape(dl * d, dr))
        k = q.shape[1]
        self.tensors[c] = q.reshape(dl, d, k)
        self.tensors[c + 1] = np.tensordot(r, self.tensors[c + 1], axes=(1, 0))
        self.center = c + 1

    def _move_left(self) -> None:
        c = self.center
        t = self.tensors[c]
        dl, d, dr = t.shape
        q, r = np.linalg.qr(t.reshape(dl, d * dr).T)
        k = q.shape[1]
        self.tensors[c] = np.ascontiguousarray(q.T).reshape(k, d, dr)
        self.tensors[c - 1] = np.tensordot(self.tensors[c - 1], r.T, axes=(2, 0))
        self.center = c - 1

    def canonicalize(self, center: int) -> None:
        """Bring the state to mixed-canonical form around ``center``."""
        if not (0 <= center < self.L):
            raise DomainError(f"center {center} out of range")
        # sweep gauge in from both ends
        self.center = 0
        while self.center < self.L - 1:
            self._move_right()
        while self.center > center:
            self._move_left()

    def move_center(self, to: int) -> None:
        if not (0 <= to < self.L):
            raise DomainError(f"center target {to} out of range")
        while self.center < to:
            self._move_right()
        while self.center > to:
            self._move_left()

    # ------------------------------------------------------------------
    # measurements
    # ------------------------------------------------------------------
    def schmidt_at(self, l: int) -> EntanglementSpectrum:
        """Schmidt spectrum across the cut between sites l-1 and l.

        The left subsystem holds ``l`` sites.  Also records, per Schmidt
        vector, the most likely physical level at site l-1 (the shared
        height of the cut for height-chain states).
        """
        if not (1 <= l <= self.L - 1):
            raise DomainError(f"cut {l} out of range for L={self.L}")
        self.move_center(l - 1)
        t = self.tensors[l - 1]
        dl, d, dr = t.shape
        u, s, _ = np.linalg.svd(t.reshape(dl * d, dr), full_matrices=False)
        keep = s > 1e-300
        s = s[keep]
        u = u[:, keep]
        proj = (u.reshape(dl, d, -1) ** 2).sum(axis=0)   # (d, n_schmidt)
        labels = np.argmax(proj, axis=0) + 1
        return EntanglementSpectrum.from_weights(s * s, cut=l, labels=labels)

    def occupation_profile(self) -> np.ndarray:
        """Probability of each local level at each site, shape (L, d)."""
        psi = self.copy()
        psi.move_center(0)
        out = np.zeros((psi.L, max(psi.phys_dims)))
        for i in range(psi.L):
            t = psi.tensors[i]
            out[i, :t.shape[1]] = np.einsum("lar,lar->a", t, t)
            if i < psi.L - 1:
                psi._move_right()
        return out

    def product_expectation(self, mats) -> float:
        """<psi| O_0 x O_1 x ... |psi> for one single-site operator per site."""
        env = np.ones((1, 1))
        for t, op in zip(self.tensors, mats):
            k = np.tensordot(env, t, axes=(1, 0))            # (bra, d, ket')
            k = np.tensordot(k, np.asarray(op, float), axes=(1, 0))  # (bra, ket', d_out)
            env = np.tensordot(t, k, axes=((0, 1), (0, 2)))  # (bra', ket')
        return float(env[0, 0])

    def dense(self) -> np.ndarray:
        """Full state vector (small chains only)."""
        vec = self.tensors[0][0]            # (d, r)
        for t in self.tensors[1:]:
            vec = np.tensordot(vec, t, axes=(vec.ndim - 1, 0))
        return vec.reshape(-1)
