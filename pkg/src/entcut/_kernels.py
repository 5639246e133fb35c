"""Hot kernels for the constrained height-path basis.

Enumerating admissible height paths, ranking a path inside the
lexicographic basis, and assembling the nearest-bond operator all loop over
the basis, which is the only place in the package where plain Python/numpy
loops would dominate.  Each kernel therefore exists twice: a numba-compiled
version (default) and a vectorized pure-numpy one.

Selection: ``impl="auto"`` uses numba when it imported cleanly and the
environment variable ``ENTCUT_NO_NUMBA`` is unset/empty/0; ``impl="numba"``
or ``impl="numpy"`` force a backend.  ``benchmarks/bench_kernels.py``
compares the two.

Conventions shared by all kernels:
* heights are 1..p; ``table[i, h]`` counts the admissible completions of a
  path that sits at height h on site i (0 for forbidden heights, columns 0
  and p+1 are zero padding);
* bases are lexicographically sorted, and ``rank`` means the index in that
  order.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["numba_enabled", "resolve_impl", "fill_paths", "path_ranks",
           "tl_elements"]


def _env_disabled() -> bool:
    return os.environ.get("ENTCUT_NO_NUMBA", "").strip() not in ("", "0")


try:
    from numba import njit

    _NUMBA_OK = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _NUMBA_OK = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


def numba_enabled() -> bool:
    return _NUMBA_OK and not _env_disabled()


def resolve_impl(impl: str) -> str:
    if impl == "auto":
        return "numba" if numba_enabled() else "numpy"
    if impl == "numba" and not _NUMBA_OK:
        raise RuntimeError("numba backend requested but numba is unavailable")
    if impl not in ("numba", "numpy"):
        raise ValueError(f"unknown impl {impl!r}")
    return impl


# ----------------------------------------------------------------------
# path enumeration
# ----------------------------------------------------------------------

@njit(cache=True)
def _fill_paths_nb(p, L, table, out):
    n = out.shape[0]
    cur = np.zeros(L, np.uint8)
    idx = 0
    pos = 0
    h = 0  # last candidate height tried at pos
    while idx < n:
        found = False
        if pos == 0:
            for hh in range(h + 1, p + 1):
                if table[0, hh] > 0:
                    h = hh
                    found = True
                    break
        else:
            prev = int(cur[pos - 1])
            for hh in (prev - 1, prev + 1):
                if hh > h and 1 <= hh <= p and table[pos, hh] > 0:
                    h = hh
                    found = True
                    break
        if not found:
            pos -= 1
            if pos < 0:
                break
            h = int(cur[pos])
            continue
        cur[pos] = h
        if pos == L - 1:
            out[idx] = cur
            idx += 1
        else:
            pos += 1
            h = 0
    return idx


def _fill_paths_np(p, L, table):
    starts = np.nonzero(table[0] > 0)[0]
    cur = starts.reshape(-1, 1).astype(np.uint8)
    for i in range(1, L):
        prev = cur[:, -1].astype(np.intp)
        cand = np.stack([prev - 1, prev + 1], axis=1)     # per parent, ascending
        valid = table[i, cand] > 0
        parents = np.repeat(np.arange(cur.shape[0]), 2)[valid.ravel()]
        childs = cand.ravel()[valid.ravel()].astype(np.uint8)
        cur = np.concatenate([cur[parents], childs[:, None]], axis=1)
    return cur


def fill_paths(p, L, table, count, impl="auto"):
    """All admissible paths as a lexicographically sorted (count, L) array."""
    if count == 0:
        return np.zeros((0, L), dtype=np.uint8)
    if resolve_impl(impl) == "numba":
        out = np.zeros((count, L), dtype=np.uint8)
        filled = _fill_paths_nb(p, L, table, out)
        if filled != count:
            raise RuntimeError("path enumeration disagrees with the count table")
        return out
    out = _fill_paths_np(p, L, table)
    if out.shape[0] != count:
        raise RuntimeError("path enumeration disagrees with the count table")
    return out


# ----------------------------------------------------------------------
# lexicographic ranking
# ----------------------------------------------------------------------

@njit(cache=True)
def _path_ranks_nb(paths, table, start_prefix):
    n, L = paths.shape
    out = np.empty(n, np.int64)
    for i in range(n):
        r = start_prefix[paths[i, 0]]
        for j in range(1, L):
            prev = int(paths[i, j - 1])
            if paths[i, j] > prev:
                r += table[j, prev - 1]
        out[i] = r
    return out


def _start_prefix(table):
    """start_prefix[h] = number of paths starting below height h."""
    pref = np.zeros(table.shape[1] + 1, dtype=np.int64)
    pref[1:] = np.cumsum(table[0])
    return pref


def path_ranks(paths, table, impl="auto"):
    """Index of each path row inside the lexicographic basis."""
    if paths.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    pref = _start_prefix(table)
    if resolve_impl(impl) == "numba":
        return _path_ranks_nb(paths, table, pref)
    prev = paths[:, :-1].astype(np.intp)
    cur = paths[:, 1:].astype(np.intp)
    L = paths.shape[1]
    contrib = table[np.arange(1, L)[None, :], prev - 1] * (cur > prev)
    return pref[paths[:, 0].astype(np.intp)] + contrib.sum(axis=1)


# ----------------------------------------------------------------------
# nearest-bond operator assembly
# ----------------------------------------------------------------------

@njit(cache=True)
def _tl_count_nb(paths, bonds, p):
    n = paths.shape[0]
    total = 0
    for bi in range(bonds.size):
        j = bonds[bi]
        for i in range(n):
            if paths[i, j - 1] == paths[i, j + 1]:
                a = int(paths[i, j - 1])
                if a - 1 >= 1:
                    total += 1
                if a + 1 <= p:
                    total += 1
    return total


@njit(cache=True)
def _tl_fill_nb(paths, table, ranks, phi, bonds, coeff, p,
                rows, cols, vals):
    n, L = paths.shape
    k = 0
    for bi in range(bonds.size):
        j = bonds[bi]
        for i in range(n):
            a = int(paths[i, j - 1])
            if int(paths[i, j + 1]) != a:
                continue
            m = int(paths[i, j])
            # rank contribution of the current middle height
            if m == a + 1:
                rem = table[j, a - 1]
            else:
                rem = table[j + 1, a - 2] if a >= 2 else 0
            for b in (a - 1, a + 1):
                if b < 1 or b > p:
                    continue
                if b == a + 1:
                    add = table[j, a - 1]
                else:
                    add = table[j + 1, a - 2] if a >= 2 else 0
                rows[k] = i
                cols[k] = ranks[i] - rem + add
                vals[k] = coeff * np.sqrt(phi[m] * phi[b]) / phi[a]
                k += 1
    return k


def tl_elements(paths, table, phi_padded, bonds, coeff, p, impl="auto"):
    """COO triples of ``coeff * sum_j e_j`` over the path basis.

    ``bonds`` lists the middle sites j (e_j acts on sites j-1, j, j+1);
    ``phi_padded`` has length p+2 with zeros at both ends.  Matrix elements
    follow the projector decomposition: for a path with equal neighbors
    ``a`` around site j, the middle height m maps to b = a -+ 1 with weight
    sqrt(phi_m phi_b) / phi_a.
    """
    bonds = np.asarray(bonds, dtype=np.int64)
    ranks = path_ranks(paths, table, impl=impl)
    if resolve_impl(impl) == "numba":
        cap = _tl_count_nb(paths, bonds, p)
        rows = np.empty(cap, dtype=np.int64)
        cols = np.empty(cap, dtype=np.int64)
        vals = np.empty(cap, dtype=np.float64)
        k = _tl_fill_nb(paths, table, ranks, phi_padded, bonds, coeff, p,
                        rows, cols, vals)
        return rows[:k], cols[:k], vals[:k]
    heights = paths.astype(np.intp)
    rows_l, cols_l, vals_l = [], [], []
    for j in bonds:
        a_l = heights[:, j - 1]
        sel = np.nonzero(a_l == heights[:, j + 1])[0]
        if sel.size == 0:
            continue
        a = a_l[sel]
        m = heights[sel, j]
        base = ranks[sel]
        up = m == a + 1
        rem = np.where(up, table[j, a - 1],
                       table[j + 1, np.maximum(a - 2, 0)] * (a >= 2))
        for dirn in (-1, 1):
            b = a + dirn
            ok = (b >= 1) & (b <= p)
            if dirn == 1:
                add = table[j, a - 1]
            else:
                add = table[j + 1, np.maximum(a - 2, 0)] * (a >= 2)
            rows_l.append(sel[ok])
            cols_l.append((base - rem + add)[ok])
            vals_l.append(coeff * np.sqrt(phi_padded[m[ok]] * phi_padded[b[ok]])
                          / phi_padded[a[ok]])
    if not rows_l:
        return (np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
    return (np.concatenate(rows_l), np.concatenate(cols_l),
            np.concatenate(vals_l))
