"""A_p height chains: weights, Temperley-Lieb action, bases, Hamiltonians.

States are height paths |a_0, ..., a_{L-1}> with a_i in 1..p and
|a_{i+1} - a_i| = 1.  The Hamiltonian is -gamma/(pi sin gamma) * sum_j e_j
with gamma = pi/(p+1); the bond generator e_j acts on sites (j-1, j, j+1)
and, for a path whose outer heights agree (both equal to a), maps the
middle height m to b = a -+ 1 with amplitude sqrt(phi_m phi_b)/phi_a, where
phi_a = sqrt(2 gamma/pi) sin(a gamma).

Two boundary realizations are supported per end:

* ``fixed_height(s)``: freeze a_0 = s (the (1, s) condition);
* ``fixed_pair(r)``: freeze (a_0, a_1) = (r, r+1) (the (r, 1) condition).
  In the constrained basis the bond acting on the frozen pair is dropped;
  the tensor-product realization instead adds a -h_b |r, r+1><r, r+1|
  pinning term on the two outermost sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from . import _kernels
from .cft import KacLabel
from .errors import DomainError, ValidationError
from .mpo import Mpo

__all__ = [
    "RsosBc", "SpinChainSpec", "PathBasis",
    "tl_coupling", "phi_weights", "apply_tl", "enumerate_paths",
    "build_hamiltonian_sparse", "build_hamiltonian_mpo", "adjacency_matrix",
    "single_bond_matrix", "path_dimension", "is_valid_path",
    "parity_operators", "pinning_energy_offset",
]


def tl_coupling(p: int) -> float:
    """Overall coupling gamma / (pi sin gamma) of the critical chain."""
    gamma = math.pi / (p + 1)
    return gamma / (math.pi * math.sin(gamma))


def phi_weights(p: int) -> np.ndarray:
    """Height weights phi_a = sqrt(2 gamma/pi) sin(a gamma), a = 1..p."""
    if p < 3:
        raise DomainError("p must be >= 3")
    gamma = math.pi / (p + 1)
    a = np.arange(1, p + 1)
    return np.sqrt(2 * gamma / math.pi) * np.sin(a * gamma)


def _phi_padded(p: int) -> np.ndarray:
    """phi indexed by height with zero padding at 0 and p+1."""
    out = np.zeros(p + 2)
    out[1:p + 1] = phi_weights(p)
    return out


def adjacency_matrix(p: int) -> np.ndarray:
    """Adjacency matrix of the A_p diagram (heights differing by one)."""
    m = np.zeros((p, p), dtype=np.int64)
    for a in range(p - 1):
        m[a, a + 1] = m[a + 1, a] = 1
    return m


@dataclass(frozen=True)
class RsosBc:
    """One end of the chain: which heights are frozen, and how hard.

    ``kind`` is "height" (freeze the end height to ``value``) or "pair"
    (freeze the outer two heights to ``value``, ``value``+1).  ``h_b`` is
    the pinning strength used only by the tensor-product (DMRG)
    realization.
    """

    kind: str
    value: int
    h_b: float = 0.0

    @classmethod
    def fixed_height(cls, s: int, h_b: float = 0.0) -> "RsosBc":
        return cls(kind="height", value=s, h_b=h_b)

    @classmethod
    def fixed_pair(cls, r: int, h_b: float = 10.0) -> "RsosBc":
        return cls(kind="pair", value=r, h_b=h_b)

    def validate(self, p: int) -> None:
        if self.kind == "height":
            if not (1 <= self.value <= p):
                raise DomainError(f"end height {self.value} outside 1..{p}")
        elif self.kind == "pair":
            if not (1 <= self.value <= p - 1):
                raise DomainError(f"frozen pair ({self.value},{self.value + 1}) "
                                  f"outside the height range of p={p}")
        else:
            raise DomainError(f"unknown boundary kind {self.kind!r}")
        if self.h_b < 0:
            raise DomainError("pinning strength must be nonnegative")

    def kac_label(self) -> KacLabel:
        if self.kind == "height":
            return KacLabel(1, self.value)
        return KacLabel(self.value, 1)

    def end_height(self) -> int:
        """The frozen height at the outermost site."""
        return self.value

    def describe(self) -> str:
        if self.kind == "height":
            return f"height={self.value}"
        return f"pair=({self.value},{self.value + 1}),h_b={self.h_b}"


@dataclass(frozen=True)
class SpinChainSpec:
    """What to diagonalize: lattice model, length, boundary data."""

    model: str                      # "rsos" or "blume-capel"
    L: int
    p: int = 0
    left: RsosBc | None = None
    right: RsosBc | None = None
    h_b: float = 0.0                # Blume-Capel boundary field on S^x

    def validate(self) -> None:
        if self.L < 3:
            raise ValidationError("need at least three sites")
        if self.model == "rsos":
            if self.p < 3:
                raise ValidationError("rsos chains need p >= 3")
            if self.left is None or self.right is None:
                raise ValidationError("rsos chains need both end conditions")
            self.left.validate(self.p)
            self.right.validate(self.p)
            # the end heights fix the path parity: a walk of L-1 steps must
            # connect them
            if (self.right.end_height() - self.left.end_height()
                    - (self.L - 1)) % 2 != 0:
                raise ValidationError(
                    f"ends {self.left.describe()} / {self.right.describe()} "
                    f"are unreachable in {self.L - 1} steps; identical ends "
                    f"need odd L")
        elif self.model == "blume-capel":
            pass
        else:
            raise ValidationError(f"unknown model {self.model!r}")


# ----------------------------------------------------------------------
# constrained basis
# ----------------------------------------------------------------------

def _allowed_mask(p, L, left, right):
    allowed = np.zeros((L, p + 2), dtype=bool)
    allowed[:, 1:p + 1] = True

    def freeze(site, height):
        mask = np.zeros(p + 2, dtype=bool)
        mask[height] = True
        allowed[site] &= mask

    freeze(0, left.value)
    if left.kind == "pair":
        freeze(1, left.value + 1)
    freeze(L - 1, right.value)
    if right.kind == "pair":
        freeze(L - 2, right.value + 1)
    return allowed


def _completions(p, L, allowed):
    """table[i, h]: admissible completions from height h at site i."""
    # float shadow pass guards against int64 overflow for long chains
    shadow = np.zeros(p + 2)
    shadow[1:p + 1] = allowed[L - 1, 1:p + 1]
    for i in range(L - 2, -1, -1):
        nxt = np.zeros(p + 2)
        nxt[1:p + 1] = np.where(allowed[i, 1:p + 1],
                                shadow[0:p] + shadow[2:p + 2], 0.0)
        shadow = nxt
    if shadow.sum() >= 2 ** 62:
        raise ValidationError("constrained basis too large to enumerate")
    table = np.zeros((L, p + 2), dtype=np.int64)
    table[L - 1, 1:p + 1] = allowed[L - 1, 1:p + 1]
    for i in range(L - 2, -1, -1):
        nxt = table[i + 1]
        table[i, 1:p + 1] = np.where(allowed[i, 1:p + 1],
                                     nxt[0:p] + nxt[2:p + 2], 0)
    return table


@dataclass
class PathBasis:
    """Lexicographically ordered admissible paths plus the ranking table."""

    p: int
    L: int
    left: RsosBc
    right: RsosBc
    paths: np.ndarray        # (n, L) uint8
    table: np.ndarray        # (L, p+2) int64 completion counts

    @property
    def dim(self) -> int:
        return self.paths.shape[0]

    def index(self, path) -> int:
        row = np.asarray(path, dtype=np.uint8).reshape(1, -1)
        return int(_kernels.path_ranks(row, self.table)[0])

    def bonds(self):
        """Middle sites of the active bond generators."""
        lo = 2 if self.left.kind == "pair" else 1
        hi = self.L - 3 if self.right.kind == "pair" else self.L - 2
        return list(range(lo, hi + 1))


def path_dimension(p, L, left, right) -> int:
    """Basis size without enumerating (may be huge)."""
    allowed = _allowed_mask(p, L, left, right)
    shadow = np.zeros(p + 2)
    shadow[1:p + 1] = allowed[L - 1, 1:p + 1]
    for i in range(L - 2, -1, -1):
        nxt = np.zeros(p + 2)
        nxt[1:p + 1] = np.where(allowed[i, 1:p + 1],
                                shadow[0:p] + shadow[2:p + 2], 0.0)
        shadow = nxt
    return int(shadow.sum())


def enumerate_paths(p, L, left, right, impl="auto") -> PathBasis:
    """All admissible paths for the given ends, lexicographically sorted.

    Incompatible ends yield an empty basis rather than an error.
    """
    left.validate(p)
    right.validate(p)
    if L < 3:
        raise DomainError("need at least three sites")
    allowed = _allowed_mask(p, L, left, right)
    table = _completions(p, L, allowed)
    count = int(table[0].sum())
    paths = _kernels.fill_paths(p, L, table, count, impl=impl)
    return PathBasis(p=p, L=L, left=left, right=right, paths=paths,
                     table=table)


def is_valid_path(p, path) -> bool:
    arr = np.asarray(path, dtype=np.int64)
    if arr.min(initial=p) < 1 or arr.max(initial=1) > p:
        return False
    return bool(np.all(np.abs(np.diff(arr)) == 1))


def apply_tl(p, path, j):
    """Action of the bond generator e_j on a single path.

    Returns (new_path, amplitude) pairs; empty unless the heights flanking
    site j agree.
    """
    path = tuple(int(a) for a in path)
    L = len(path)
    if not (1 <= j <= L - 2):
        raise DomainError(f"bond {j} out of range for L={L}")
    if not is_valid_path(p, path):
        raise DomainError("not an admissible height path")
    a = path[j - 1]
    if path[j + 1] != a:
        return []
    phi = _phi_padded(p)
    m = path[j]
    out = []
    for b in (a - 1, a + 1):
        if 1 <= b <= p:
            out.append((path[:j] + (b,) + path[j + 1:],
                        math.sqrt(phi[m] * phi[b]) / phi[a]))
    return out


# ----------------------------------------------------------------------
# Hamiltonians
# ----------------------------------------------------------------------

def build_hamiltonian_sparse(p, L, left, right, impl="auto"):
    """Chain Hamiltonian on the constrained basis as a symmetric CSR matrix.

    Returns (matrix, basis).  Bonds acting on frozen end pairs are dropped;
    they act trivially on the basis.
    """
    basis = enumerate_paths(p, L, left, right, impl=impl)
    if basis.dim == 0:
        raise DomainError("empty path basis for the requested ends")
    rows, cols, vals = _kernels.tl_elements(
        basis.paths, basis.table, _phi_padded(p), basis.bonds(),
        -tl_coupling(p), p, impl=impl)
    h = scipy.sparse.coo_matrix((vals, (rows, cols)),
                                shape=(basis.dim, basis.dim)).tocsr()
    return h, basis


def single_bond_matrix(p, basis: PathBasis, j, impl="auto"):
    """One bond generator e_j on the basis (unit coupling), for algebra checks."""
    rows, cols, vals = _kernels.tl_elements(
        basis.paths, basis.table, _phi_padded(p), [j], 1.0, p, impl=impl)
    return scipy.sparse.coo_matrix((vals, (rows, cols)),
                                   shape=(basis.dim, basis.dim)).tocsr()


def _projector(p, a):
    """P^(a) = |a><a| / sqrt(phi_a) on the p-level site space."""
    phi = _phi_padded(p)
    m = np.zeros((p, p))
    m[a - 1, a - 1] = 1.0 / math.sqrt(phi[a])
    return m


def _middle_operator(p, a):
    """e~^(a): rank-one |v_a><v_a| with v_a = sum_{b=a+-1} sqrt(phi_b)|b>."""
    phi = _phi_padded(p)
    v = np.zeros(p)
    for b in (a - 1, a + 1):
        if 1 <= b <= p:
            v[b - 1] = math.sqrt(phi[b])
    return np.outer(v, v)


def build_hamiltonian_mpo(p, L, left, right, h_b=None) -> Mpo:
    """Chain Hamiltonian as an MPO on the p-level tensor-product space.

    Encodes the bond generators as three-site strings
    P^(a) . e~^(a) . P^(a) via a finite-state automaton, plus end pinning:
    frozen-pair ends get -h_b |r, r+1><r, r+1| on the outer two sites
    (mirrored on the right), frozen-height ends optionally get
    -h_b |s><s| on the end site.  ``h_b=None`` uses each end's own value.
    Bond dimension is 2p+3 independent of L.
    """
    left.validate(p)
    right.validate(p)
    if L < 3:
        raise DomainError("need at least three sites")
    kappa = tl_coupling(p)
    d = p
    idle, done = 0, 2 * p + 2
    pin = 2 * p + 1
    w = 2 * p + 3
    eye = np.eye(d)

    def mid1(a):
        return a          # after seeing the left projector of channel a

    def mid2(a):
        return p + a      # after seeing the middle operator of channel a

    h_left = left.h_b if h_b is None else h_b
    h_right = right.h_b if h_b is None else h_b

    tensors = []
    for i in range(L):
        W = np.zeros((w, w, d, d))
        W[idle, idle] = eye
        W[done, done] = eye
        # bond strings: a triple may start at sites 0 .. L-3
        start_lo = 1 if left.kind == "pair" else 0
        start_hi = L - 4 if right.kind == "pair" else L - 3
        if start_lo <= i <= start_hi:
            for a in range(1, p + 1):
                W[idle, mid1(a)] = _projector(p, a)
        if start_lo + 1 <= i <= start_hi + 1:
            for a in range(1, p + 1):
                W[mid1(a), mid2(a)] = _middle_operator(p, a)
        if start_lo + 2 <= i <= start_hi + 2:
            for a in range(1, p + 1):
                W[mid2(a), done] = -kappa * _projector(p, a)
        # pinning terms
        if left.kind == "pair" and h_left:
            r = left.value
            if i == 0:
                m = np.zeros((d, d))
                m[r - 1, r - 1] = 1.0
                W[idle, pin] = m
            if i == 1:
                m = np.zeros((d, d))
                m[r, r] = 1.0
                W[pin, done] = -h_left * m
        if right.kind == "pair" and h_right:
            r = right.value
            if i == L - 2:
                m = np.zeros((d, d))
                m[r, r] = 1.0
                W[idle, pin] = m
            if i == L - 1:
                m = np.zeros((d, d))
                m[r - 1, r - 1] = 1.0
                W[pin, done] = -h_right * m
        if left.kind == "height" and h_left and i == 0:
            m = np.zeros((d, d))
            m[left.value - 1, left.value - 1] = 1.0
            W[idle, done] += -h_left * m
        if right.kind == "height" and h_right and i == L - 1:
            m = np.zeros((d, d))
            m[right.value - 1, right.value - 1] = 1.0
            W[idle, done] += -h_right * m
        if i == 0:
            W = W[idle:idle + 1]
        if i == L - 1:
            W = W[:, done:done + 1]
        tensors.append(W)
    return Mpo(tensors)


def pinning_energy_offset(left: RsosBc, right: RsosBc, h_b=None) -> float:
    """Energy carried by fully satisfied pinning terms.

    Adding this to a pinned tensor-product ground energy makes it comparable
    to the constrained-basis energy, where frozen heights carry no term.
    """
    total = 0.0
    for bc in (left, right):
        hb = bc.h_b if h_b is None else h_b
        if bc.kind == "pair" and hb:
            total += hb
        if bc.kind == "height" and hb:
            total += hb
    return total


def parity_operators(p, L):
    """Per-site parity matrices diag((-1)^a), whose product H conserves."""
    diag = np.diag([(-1.0) ** a for a in range(1, p + 1)])
    return [diag] * L
