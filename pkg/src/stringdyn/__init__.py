"""Exact simulation of string dynamics in 2+1D lattice gauge theories.

Builds square / hexagonal (brick-wall) lattice geometries, enumerates
gauge-invariant configuration sectors for spin-1/2 U(1) quantum link
models and Z2 gauge theories, constructs sparse Hamiltonians, projects
onto the fixed-energy manifold of minimal-string configurations, and
time-evolves with dense-spectral or Krylov propagators.
"""

__version__ = "0.1.0"

from .lattice import Lattice, LatticeSpec, build_lattice, chain_lattice
from .gauge import BasisConfig, ChargeLayout, SectorBasis, enumerate_sector
from .models import Couplings, SparseOperator, DenseOperator
from .strings import StringPath, BreakPattern, MinimalModelBasis
from .dynamics import TimeGrid, ObservableSeries, evolve_dense, evolve_krylov, measure

__all__ = [
    "Lattice",
    "LatticeSpec",
    "build_lattice",
    "chain_lattice",
    "BasisConfig",
    "ChargeLayout",
    "SectorBasis",
    "enumerate_sector",
    "Couplings",
    "SparseOperator",
    "DenseOperator",
    "StringPath",
    "BreakPattern",
    "MinimalModelBasis",
    "TimeGrid",
    "ObservableSeries",
    "evolve_dense",
    "evolve_krylov",
    "measure",
    "__version__",
]
