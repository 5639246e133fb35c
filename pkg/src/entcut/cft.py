"""Exact boundary data for the unitary minimal models M(p+1, p).

Conformal weights and the central charge are exact rationals, level
degeneracies are exact integers; floating point enters only for boundary
g-functions and their logs.  Conventions:

* a boundary condition / primary field is a Kac label (r, s) with
  1 <= r <= p-1, 1 <= s <= p;
* (r, s) and (p-r, p+1-s) name the same primary.  The canonical
  representative minimizes (r(p+1) - s*p)**2, ties broken by smaller r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError

__all__ = [
    "MinimalModel", "KacLabel", "QSeries", "CardyTower",
    "conformal_weight", "g_function", "quasi_free_bc", "fuse",
    "character_qseries", "cardy_degeneracies", "delta_s_cft", "nu_prediction",
]


@dataclass(frozen=True, order=True)
class KacLabel:
    r: int
    s: int

    def __str__(self):
        return f"({self.r},{self.s})"

    @classmethod
    def parse(cls, text: str) -> "KacLabel":
        """Parse an 'r,s' string (surrounding parentheses tolerated)."""
        parts = text.strip().strip("()").split(",")
        if len(parts) != 2:
            raise DomainError(f"cannot parse Kac label from {text!r}")
        return cls(int(parts[0]), int(parts[1]))


@dataclass(frozen=True)
class MinimalModel:
    """The unitary minimal model M(p+1, p), p >= 3."""

    p: int

    def __post_init__(self):
        if self.p < 3:
            raise DomainError(f"p must be >= 3, got {self.p}")

    @property
    def gamma(self) -> float:
        """Anisotropy angle pi/(p+1) of the lattice realization."""
        return math.pi / (self.p + 1)

    @property
    def central_charge(self) -> Fraction:
        return 1 - Fraction(6, self.p * (self.p + 1))

    def validate(self, x: KacLabel) -> None:
        if not (1 <= x.r <= self.p - 1 and 1 <= x.s <= self.p):
            raise DomainError(f"label {x} outside the Kac table of p={self.p}")

    def labels(self):
        """All labels of the Kac table, including both members of each pair."""
        return [KacLabel(r, s)
                for r in range(1, self.p)
                for s in range(1, self.p + 1)]

    def canonical(self, x: KacLabel) -> KacLabel:
        """Canonical representative under (r,s) ~ (p-r, p+1-s)."""
        self.validate(x)
        p = self.p
        mirror = KacLabel(p - x.r, p + 1 - x.s)
        kx = (x.r * (p + 1) - x.s * p) ** 2
        km = (mirror.r * (p + 1) - mirror.s * p) ** 2
        if kx != km:
            return x if kx < km else mirror
        return x if x.r <= mirror.r else mirror

    def primaries(self):
        """Canonical labels, one per primary field."""
        seen = []
        for x in self.labels():
            c = self.canonical(x)
            if c not in seen:
                seen.append(c)
        return seen


@dataclass(frozen=True)
class QSeries:
    """Integer level degeneracies above a rational base weight.

    ``coeffs[n]`` counts the independent states ``n`` levels above ``h``.
    """

    h: Fraction
    coeffs: tuple

    @property
    def max_level(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "QSeries") -> "QSeries":
        if self.h != other.h:
            raise DomainError("can only add q-series with equal base weight")
        n = min(len(self.coeffs), len(other.coeffs))
        return QSeries(self.h, tuple(a + b for a, b in
                                     zip(self.coeffs[:n], other.coeffs[:n])))


def conformal_weight(m: MinimalModel, x: KacLabel) -> Fraction:
    """Kac weight h_{r,s} = ((r(p+1) - s p)^2 - 1) / (4 p (p+1))."""
    m.validate(x)
    p = m.p
    return Fraction((x.r * (p + 1) - x.s * p) ** 2 - 1, 4 * p * (p + 1))


def g_function(m: MinimalModel, x: KacLabel) -> float:
    """Boundary g-function sin(pi r/p) sin(pi s/(p+1)) / (sin(pi/p) sin(pi/(p+1)))."""
    m.validate(x)
    p = m.p
    return (math.sin(math.pi * x.r / p) * math.sin(math.pi * x.s / (p + 1))
            / (math.sin(math.pi / p) * math.sin(math.pi / (p + 1))))


def quasi_free_bc(m: MinimalModel) -> KacLabel:
    """The label maximizing the g-function: (p/2, p/2) for even p, else ((p+1)/2, (p+1)/2)."""
    k = m.p // 2 if m.p % 2 == 0 else (m.p + 1) // 2
    return KacLabel(k, k)


def fuse(m: MinimalModel, x: KacLabel, y: KacLabel):
    """Fusion product of two primaries as a set of canonical labels.

    Truncated ranges: r runs from |r1-r2|+1 to min(r1+r2-1, 2p-1-r1-r2) in
    steps of 2, and s likewise with p replaced by p+1.  Multiplicities in
    the A-series are all 0 or 1, hence a set.
    """
    m.validate(x)
    m.validate(y)
    p = m.p
    out = set()
    for r in range(abs(x.r - y.r) + 1, min(x.r + y.r - 1, 2 * p - 1 - x.r - y.r) + 1, 2):
        for s in range(abs(x.s - y.s) + 1,
                       min(x.s + y.s - 1, 2 * (p + 1) - 1 - x.s - y.s) + 1, 2):
            out.add(m.canonical(KacLabel(r, s)))
    return frozenset(out)


@lru_cache(maxsize=None)
def _partition_counts(n: int):
    """Partition numbers p(0..n) by Euler's pentagonal recurrence."""
    part = [0] * (n + 1)
    part[0] = 1
    for k in range(1, n + 1):
        total = 0
        j = 1
        while True:
            g1 = j * (3 * j - 1) // 2
            g2 = j * (3 * j + 1) // 2
            if g1 > k:
                break
            sign = 1 if j % 2 == 1 else -1
            total += sign * part[k - g1]
            if g2 <= k:
                total += sign * part[k - g2]
            j += 1
        part[k] = total
    return tuple(part)


def character_qseries(m: MinimalModel, x: KacLabel, max_level: int) -> QSeries:
    """Level degeneracies of the irreducible Virasoro module of h_{r,s}.

    Alternating sum over the embedded null submodules: relative to the
    ground level, the numerator carries +q^(t n^2 + n a) and
    -q^(t n^2 + n a' + r s) with t = p(p+1), a = r(p+1) - s p,
    a' = r(p+1) + s p, n over the integers; dividing by the Euler product
    turns it into partition-number convolutions.  Exact integers throughout.
    """
    m.validate(x)
    if max_level < 0:
        raise DomainError("max_level must be >= 0")
    p, r, s = m.p, x.r, x.s
    t = p * (p + 1)
    a = r * (p + 1) - s * p
    ap = r * (p + 1) + s * p
    numer = [0] * (max_level + 1)
    nmax = 2 + math.isqrt((max_level + ap + r * s) // t + 1)
    for n in range(-nmax, nmax + 1):
        e_plus = t * n * n + n * a
        if 0 <= e_plus <= max_level:
            numer[e_plus] += 1
        e_minus = t * n * n + n * ap + r * s
        if 0 <= e_minus <= max_level:
            numer[e_minus] -= 1
    part = _partition_counts(max_level)
    coeffs = [sum(numer[j] * part[k - j] for j in range(k + 1))
              for k in range(max_level + 1)]
    return QSeries(conformal_weight(m, x), tuple(coeffs))


@dataclass(frozen=True)
class CardyTower:
    """Degeneracy tower of the boundary spectrum between conditions a and b.

    ``channels`` holds one (label, q-series) pair per fusion channel;
    ``merged`` lists (energy offset, total degeneracy) pairs, exactly equal
    rational offsets summed, sorted ascending, and trimmed to the largest
    offset up to which every channel has been expanded.
    """

    p: int
    a: KacLabel
    b: KacLabel
    channels: tuple
    merged: tuple

    @property
    def ground_offset(self) -> Fraction:
        return self.merged[0][0]

    def degeneracy_sequence(self):
        """Degeneracies of the occupied levels, lowest offset first."""
        return [d for _, d in self.merged]


def cardy_degeneracies(m: MinimalModel, a: KacLabel, b: KacLabel,
                       max_level: int) -> CardyTower:
    """Boundary partition-function tower: sum of characters over fuse(a, b)."""
    channels = []
    for lab in sorted(fuse(m, a, b)):
        channels.append((lab, character_qseries(m, lab, max_level)))
    levels = {}
    for _, q in channels:
        for n, d in enumerate(q.coeffs):
            if d:
                levels[q.h + n] = levels.get(q.h + n, 0) + d
    cutoff = min(q.h for _, q in channels) + max_level
    merged = tuple(sorted((off, d) for off, d in levels.items()
                          if off <= cutoff))
    return CardyTower(p=m.p, a=m.canonical(a), b=m.canonical(b),
                      channels=tuple(channels), merged=merged)


def delta_s_cft(m: MinimalModel, b: KacLabel, b_new: KacLabel) -> float:
    """Universal entropy shift ln(g_b / g_b') when the end condition changes."""
    return math.log(g_function(m, b) / g_function(m, b_new))


def nu_prediction(m: MinimalModel, field: KacLabel) -> Fraction:
    """Correction exponent read off a boundary field: its conformal weight.

    Which field controls the leading correction depends on the boundary
    operator content of the pair of conditions at hand, so the caller picks
    the field.
    """
    return conformal_weight(m, field)
