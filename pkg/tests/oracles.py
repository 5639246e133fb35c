"""Independent reference implementations used only by the tests.

Everything here is deliberately naive (loops, exact rational arithmetic,
dense eigensolvers) and shares no code with the package paths it checks.
"""

from fractions import Fraction
from functools import lru_cache

import numpy as np


# ----------------------------------------------------------------------
# tensor contraction by explicit loops
# ----------------------------------------------------------------------

def contract_loops(a, b, pairs):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    axes_a = [p for p, _ in pairs]
    axes_b = [q for _, q in pairs]
    keep_a = [i for i in range(a.ndim) if i not in axes_a]
    keep_b = [i for i in range(b.ndim) if i not in axes_b]
    out_shape = [a.shape[i] for i in keep_a] + [b.shape[i] for i in keep_b]
    out = np.zeros(out_shape if out_shape else (1,))
    sum_shape = [a.shape[i] for i in axes_a]
    for idx_a in np.ndindex(*[a.shape[i] for i in keep_a]):
        for idx_b in np.ndindex(*[b.shape[i] for i in keep_b]):
            total = 0.0
            for idx_s in np.ndindex(*sum_shape):
                ia = [0] * a.ndim
                ib = [0] * b.ndim
                for pos, i in enumerate(keep_a):
                    ia[i] = idx_a[pos]
                for pos, i in enumerate(keep_b):
                    ib[i] = idx_b[pos]
                for pos, (i, j) in enumerate(pairs):
                    ia[i] = idx_s[pos]
                    ib[j] = idx_s[pos]
                total += a[tuple(ia)] * b[tuple(ib)]
            out[idx_a + idx_b if out_shape else (0,)] = total
    return out if out_shape else out[0]


# ----------------------------------------------------------------------
# Virasoro level degeneracies by Gram-matrix rank over exact rationals
# ----------------------------------------------------------------------

def _partitions(n, cap=None):
    if cap is None:
        cap = n
    if n == 0:
        return [()]
    out = []
    for k in range(min(n, cap), 0, -1):
        for rest in _partitions(n - k, k):
            out.append((k,) + rest)
    return out


@lru_cache(maxsize=None)
def _act_mono(n, part, h, c):
    """L_n applied to the canonical monomial L_{-part}|h>, as {part: coeff}."""
    if n == 0:
        return {part: h + sum(part)}
    if not part:
        if n > 0:
            return {}
        return {(-n,): Fraction(1)}
    k, rest = part[0], part[1:]
    out = {}

    def add(d, scale):
        for q, co in d.items():
            if co:
                out[q] = out.get(q, Fraction(0)) + scale * co

    if n < 0 and -n >= k:
        return {(-n,) + part: Fraction(1)}
    # commute L_n through the leading L_{-k}
    for q, co in _act_mono(n, rest, h, c).items():
        add(_act_mono(-k, q, h, c), co)
    add(_act_mono(n - k, rest, h, c), Fraction(n + k))
    if n == k:
        add({rest: Fraction(1)}, Fraction(c * n * (n * n - 1), 12))
    return {q: co for q, co in out.items() if co}


def virasoro_level_degeneracy(p, r, s, level):
    """Number of independent descendants at ``level`` above h_{r,s} in M(p+1,p).

    Builds the Gram matrix of all partition monomials with exact rational
    Virasoro commutators and returns its rank over the rationals.
    """
    c = Fraction(p * (p + 1) - 6, p * (p + 1))
    h = Fraction((r * (p + 1) - s * p) ** 2 - 1, 4 * p * (p + 1))
    parts = _partitions(level)
    if level == 0:
        return 1
    gram = []
    for bra in parts:
        row = []
        for ket in parts:
            state = {ket: Fraction(1)}
            # adjoint of L_{-mu1}...L_{-mum} applied to the ket
            for mu in bra:
                nxt = {}
                for q, co in state.items():
                    for q2, co2 in _act_mono(mu, q, h, c).items():
                        nxt[q2] = nxt.get(q2, Fraction(0)) + co * co2
                state = nxt
            row.append(state.get((), Fraction(0)))
        gram.append(row)
    return _rational_rank(gram)


def _rational_rank(mat):
    mat = [row[:] for row in mat]
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    rank = 0
    for col in range(ncols):
        piv = None
        for rr in range(rank, nrows):
            if mat[rr][col] != 0:
                piv = rr
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pivot = mat[rank][col]
        for rr in range(rank + 1, nrows):
            f = mat[rr][col] / pivot
            if f:
                mat[rr] = [a - f * b for a, b in zip(mat[rr], mat[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


# ----------------------------------------------------------------------
# path counting by adjacency-matrix powers
# ----------------------------------------------------------------------

def adjacency_count(p, steps, start, end):
    """Walks of ``steps`` steps from height ``start`` to ``end`` on A_p."""
    a = np.zeros((p, p), dtype=object)
    for i in range(p - 1):
        a[i, i + 1] = a[i + 1, i] = 1
    out = np.eye(p, dtype=object)
    for _ in range(steps):
        out = out @ a
    return int(out[start - 1, end - 1])
