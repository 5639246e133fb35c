"""Universal quantities from entanglement spectra.

Degeneracy matching against boundary towers uses multiplet COUNTS only:
the logarithmic scale factor between lattice and continuum spectra drifts
with system size, so absolute spacings are not comparable, but the number
of states per multiplet is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError
from .spectrum import EntanglementSpectrum

__all__ = ["MultipletReport", "FitResult", "w_l", "group_multiplets",
           "match_towers", "fit_central_charge", "fit_epsilon0", "fit_nu"]

# exactly degenerate levels are never split, whatever the gap rule says
_DEGENERACY_GUARD = 1e-12


def w_l(L: int, l: int) -> float:
    """Logarithmic conformal length ln((2L/pi) sin(pi l / L))."""
    if not (1 <= l <= L - 1):
        raise DomainError(f"cut {l} out of range for L={L}")
    return math.log((2.0 * L / math.pi) * math.sin(math.pi * l / L))


@dataclass
class MultipletReport:
    """Grouped low-lying levels: (mean energy, count) per multiplet.

    ``residuals`` holds the within-group spread (max - min) of each group;
    ``matched_levels`` and ``target`` are filled in by tower matching.
    """

    groups: list
    residuals: list
    matched_levels: int | None = None
    target: tuple | None = None

    def counts(self):
        return [c for _, c in self.groups]


def group_multiplets(spec: EntanglementSpectrum, n_levels: int,
                     rel_gap: float) -> MultipletReport:
    """Split the ascending entanglement energies into near-degenerate groups.

    Scanning upward, a new group starts where the gap to the previous level
    exceeds ``rel_gap`` times the running mean level spacing; exact
    degeneracies are never split.  At most ``n_levels`` groups are
    returned.
    """
    if spec.energies.size == 0:
        raise DomainError("empty spectrum")
    if not (0.0 < rel_gap < 1.0):
        raise DomainError("rel_gap must lie in (0, 1)")
    eps = np.asarray(spec.energies, dtype=float)
    groups = []
    residuals = []
    start = 0
    for k in range(1, eps.size + 1):
        close = False
        if k < eps.size:
            gap = eps[k] - eps[k - 1]
            running = (eps[k] - eps[0]) / k
            close = (gap <= rel_gap * running
                     or gap <= _DEGENERACY_GUARD * max(1.0, abs(eps[k])))
        if not close:
            block = eps[start:k]
            groups.append((float(block.mean()), int(block.size)))
            residuals.append(float(block.max() - block.min()))
            start = k
            if len(groups) >= n_levels:
                break
    return MultipletReport(groups=groups, residuals=residuals)


def match_towers(report: MultipletReport, tower, n_levels: int):
    """Compare observed multiplet counts with a degeneracy tower.

    ``tower`` is a CardyTower (or anything with ``degeneracy_sequence``);
    levels with zero predicted degeneracy produce no multiplet and are
    absent from both sequences by construction.  Returns the length of the
    agreeing prefix and per-level verdicts.
    """
    predicted = tower.degeneracy_sequence()[:n_levels]
    observed = report.counts()[:n_levels]
    verdicts = []
    matched = 0
    still_matching = True
    for i in range(min(len(predicted), len(observed))):
        ok = predicted[i] == observed[i]
        verdicts.append({"level": i, "predicted": int(predicted[i]),
                         "observed": int(observed[i]), "ok": bool(ok)})
        if ok and still_matching:
            matched += 1
        else:
            still_matching = False
    return matched, verdicts


@dataclass
class FitResult:
    slope: float
    intercept: float
    slope_err: float
    intercept_err: float
    residual_norm: float
    window: list
    c_estimate: float | None = None
    nu: float | None = None
    excluded: list = field(default_factory=list)


def _linear_fit(x, y, window) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.unique(x).size < 2:
        raise FitError("need at least two distinct abscissae")
    design = np.stack([x, np.ones_like(x)], axis=1)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2:
        raise FitError("degenerate design matrix")
    resid = y - design @ coef
    rss = float(resid @ resid)
    dof = x.size - 2
    var = rss / dof if dof > 0 else float("nan")
    cov = var * np.linalg.inv(design.T @ design)
    return FitResult(slope=float(coef[0]), intercept=float(coef[1]),
                     slope_err=float(np.sqrt(abs(cov[0, 0]))),
                     intercept_err=float(np.sqrt(abs(cov[1, 1]))),
                     residual_norm=float(np.sqrt(rss)), window=list(window))


def _cut_of(L: int, cut_fraction: float) -> int:
    return max(1, min(L - 1, int(math.floor(L * cut_fraction))))


def fit_central_charge(entropies, cut_fraction: float = 0.5) -> FitResult:
    """Least squares of half-chain entropy against W_L; slope*6 estimates c.

    ``entropies`` is a list of (L, S) pairs from runs sharing one boundary
    condition.
    """
    if len(entropies) < 3:
        raise FitError("need at least three system sizes")
    ls = [int(L) for L, _ in entropies]
    ws = [w_l(L, _cut_of(L, cut_fraction)) for L in ls]
    ss = [float(s) for _, s in entropies]
    fit = _linear_fit(ws, ss, ls)
    fit.c_estimate = 6.0 * fit.slope
    return fit


def fit_epsilon0(eps0s, cut_fraction: float = 0.5) -> FitResult:
    """Least squares of the lowest entanglement energy against W_L.

    The slope estimates c/(24 pi) and the intercept the model-dependent
    constant whose differences between boundary conditions are universal.
    """
    if len(eps0s) < 3:
        raise FitError("need at least three system sizes")
    ls = [int(L) for L, _ in eps0s]
    ws = [w_l(L, _cut_of(L, cut_fraction)) for L in ls]
    es = [float(e) for _, e in eps0s]
    fit = _linear_fit(ws, es, ls)
    fit.c_estimate = 24.0 * math.pi * fit.slope
    return fit


def fit_nu(deltas, delta_cft: float) -> FitResult:
    """Correction exponent from |Delta S(L) - Delta S_CFT| ~ L^(-2 nu).

    Points where the measured difference hits the prediction exactly carry
    no information for the log fit; they are excluded and reported.
    """
    usable, excluded = [], []
    for L, d in deltas:
        if abs(d - delta_cft) > 0.0:
            usable.append((int(L), float(d)))
        else:
            excluded.append(int(L))
    if len(usable) < 3:
        raise FitError(f"only {len(usable)} usable points for the "
                       f"correction-exponent fit")
    xs = [math.log(L) for L, _ in usable]
    ys = [math.log(abs(d - delta_cft)) for _, d in usable]
    fit = _linear_fit(xs, ys, [L for L, _ in usable])
    fit.nu = -0.5 * fit.slope
    fit.excluded = excluded
    return fit
