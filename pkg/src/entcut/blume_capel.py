"""Spin-1 Blume-Capel chain at its tricritical point.

A second lattice realization of the same critical theory as the p=4 height
chain.  H = xi * sum_j [alpha (Sx_j)^2 + beta Sz_j + gamma_bc (Sz_j)^2]
- xi * sum_j Sx_j Sx_{j+1} - h_b Sx_1 - h_b Sx_L.  The boundary field picks
the end condition: h_b = 0 keeps the spin-flip symmetric ends, a large
positive (negative) h_b polarizes the ends along +x (-x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse

from .errors import DomainError
from .mpo import Mpo

__all__ = ["BlumeCapelParams", "spin1_matrices", "build_bc_mpo",
           "build_bc_sparse", "spin_flip_operator"]


@dataclass(frozen=True)
class BlumeCapelParams:
    alpha: float
    beta: float
    gamma_bc: float
    xi: float
    h_b: float = 0.0

    @classmethod
    def tricritical(cls, h_b: float = 0.0) -> "BlumeCapelParams":
        return cls(alpha=0.910207, beta=0.415685, gamma_bc=0.0,
                   xi=1.0 / 0.56557, h_b=h_b)

    def with_h_b(self, h_b: float) -> "BlumeCapelParams":
        return replace(self, h_b=h_b)


def spin1_matrices():
    """Standard spin-1 (Sx, Sz) in the Sz eigenbasis."""
    sx = np.array([[0.0, 1.0, 0.0],
                   [1.0, 0.0, 1.0],
                   [0.0, 1.0, 0.0]]) / math.sqrt(2.0)
    sz = np.diag([1.0, 0.0, -1.0])
    return sx, sz


def _onsite(params: BlumeCapelParams, boundary: bool) -> np.ndarray:
    sx, sz = spin1_matrices()
    m = params.xi * (params.alpha * (sx @ sx) + params.beta * sz
                     + params.gamma_bc * (sz @ sz))
    if boundary:
        m = m - params.h_b * sx
    return m


def build_bc_mpo(params: BlumeCapelParams, L: int) -> Mpo:
    """Hamiltonian as a bond-dimension-3 MPO over 3-level sites."""
    if L < 2:
        raise DomainError("need at least two sites")
    sx, _ = spin1_matrices()
    eye = np.eye(3)
    tensors = []
    for i in range(L):
        w = np.zeros((3, 3, 3, 3))
        w[0, 0] = eye
        w[2, 2] = eye
        w[0, 2] = _onsite(params, boundary=(i == 0 or i == L - 1))
        if i < L - 1:
            w[0, 1] = sx
        if i > 0:
            w[1, 2] = -params.xi * sx
        if i == 0:
            w = w[0:1]
        if i == L - 1:
            w = w[:, 2:3]
        tensors.append(w)
    return Mpo(tensors)


def build_bc_sparse(params: BlumeCapelParams, L: int):
    """Hamiltonian as a sparse matrix on the full 3^L space (small L)."""
    if L < 2:
        raise DomainError("need at least two sites")
    sx, _ = spin1_matrices()
    sx_s = scipy.sparse.csr_matrix(sx)

    def embed(op, site):
        left = scipy.sparse.identity(3 ** site, format="csr")
        right = scipy.sparse.identity(3 ** (L - site - 1), format="csr")
        return scipy.sparse.kron(scipy.sparse.kron(left, op), right,
                                 format="csr")

    h = scipy.sparse.csr_matrix((3 ** L, 3 ** L))
    for j in range(L):
        h = h + embed(scipy.sparse.csr_matrix(
            _onsite(params, boundary=(j == 0 or j == L - 1))), j)
    for j in range(L - 1):
        left = scipy.sparse.identity(3 ** j, format="csr")
        mid = scipy.sparse.kron(sx_s, sx_s)
        right = scipy.sparse.identity(3 ** (L - j - 2), format="csr")
        h = h - params.xi * scipy.sparse.kron(
            scipy.sparse.kron(left, mid), right, format="csr")
    return h.tocsr()


def spin_flip_operator() -> np.ndarray:
    """Unitary sending Sx -> -Sx (and fixing Sz): diag(-1, 1, -1)."""
    return np.diag([-1.0, 1.0, -1.0])
