"""Entanglement-cut spectroscopy of critical height and spin-1 chains.

Computes entanglement spectra of open chains (exact diagonalization at
small sizes, two-site DMRG beyond), predicts the corresponding boundary
towers, g-functions and correction exponents exactly, and provides the
analysis that identifies the boundary condition induced at the cut.
"""

__version__ = "0.1.0"
