"""Entanglement spectra: normalized Schmidt weights and their energies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["EntanglementSpectrum", "WEIGHT_FLOOR"]

# weights below this are numerical zeros; dropped before any log is taken
WEIGHT_FLOOR = 1e-14


@dataclass
class EntanglementSpectrum:
    """Schmidt weights (descending, summing to one) at a fixed cut.

    ``energies`` are -(1/2 pi) ln(weight), ascending.  ``labels`` optionally
    tags each Schmidt vector with the shared cut height of the underlying
    path state.  ``kept_weight`` is the total weight before normalization,
    i.e. 1 minus whatever a truncated state had already discarded.
    """

    weights: np.ndarray
    energies: np.ndarray
    cut: int
    labels: np.ndarray | None = None
    kept_weight: float = 1.0

    @classmethod
    def from_weights(cls, weights, cut, labels=None,
                     floor=WEIGHT_FLOOR) -> "EntanglementSpectrum":
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite and nonnegative")
        order = np.argsort(-w, kind="stable")
        w = w[order]
        if labels is not None:
            labels = np.asarray(labels).reshape(-1)[order]
        total = float(w.sum())
        keep = w > floor * max(total, 1.0)
        if not np.any(keep):
            keep = np.zeros_like(w, dtype=bool)
            keep[0] = True
        w = w[keep]
        if labels is not None:
            labels = labels[keep]
        w = w / w.sum()
        energies = -np.log(w) / (2.0 * math.pi)
        return cls(weights=w, energies=energies, cut=cut, labels=labels,
                   kept_weight=total)

    @property
    def eps0(self) -> float:
        return float(self.energies[0])

    def entropy(self) -> float:
        return float(-(self.weights * np.log(self.weights)).sum())

    def top(self, n: int) -> np.ndarray:
        """Leading n weights, zero padded."""
        out = np.zeros(n)
        k = min(n, self.weights.size)
        out[:k] = self.weights[:k]
        return out
