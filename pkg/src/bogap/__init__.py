"""Desk-scale laboratory for spectral gaps of separating molecular clusters.

Everything lives on a 1D tensor-product grid with softened Coulomb
interactions: Hamiltonian assembly, permutation symmetry, sparse
eigensolvers, cluster threshold bookkeeping, Feshbach-Schur fixed-point
solves, and IMS partitions of unity.
"""

from bogap import clusters, fsmap, ims, model, operators, spectra, symmetry

__all__ = ["model", "operators", "symmetry", "spectra", "clusters", "fsmap", "ims"]
__version__ = "0.1.0"
