"""Hamiltonian assembly in a sector basis.

U(1) quantum link models (square, hexagonal and the 1d reference chain)
and the Z2 gauge theory in the sigma^x product basis.  All matrix
elements are real; hopping amplitudes carry the staggering sign of the
link, the plaquette term is -J per flippable plaquette, and diagonal
energies count flipped links (electric part, one g per link relative to
the vacuum frame) plus the staggered mass sum.  Constant offsets of the
textbook forms (the -g/2 per link of the vacuum, Z2 excluded) are
dropped; all observables use energy differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import kernels
from .gauge import (
    U1_QLM,
    Z2,
    BasisConfig,
    BasisMismatchError,
    ChargeLayout,
    SectorBasis,
    enumerate_sector,
)
from .lattice import CHAIN, HEXAGONAL, SQUARE, Lattice, chain_lattice


@dataclass(frozen=True)
class Couplings:
    """Model couplings in units of the hopping strength kappa."""

    kappa: float = 1.0
    mass: float = 0.0
    efield: float = 0.0
    plaq: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "mass", "efield", "plaq"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"coupling {name} must be finite, got {v}")

    def exact(self, name: str) -> Fraction:
        return Fraction(getattr(self, name))


@dataclass(eq=False)
class SparseOperator:
    """Hermitian operator as triplets over a sector basis."""

    basis: SectorBasis
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    diag: np.ndarray

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @cached_property
    def csr(self) -> sp.csr_matrix:
        n = self.dimension
        off = sp.coo_matrix((self.vals, (self.rows, self.cols)), shape=(n, n))
        return (off + sp.diags(self.diag)).tocsr()

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.csr @ v

    def __matmul__(self, v):
        return self.csr @ v

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def save(self, path):
        np.savez(
            path,
            format_version=1,
            rows=self.rows,
            cols=self.cols,
            vals=self.vals,
            diag=self.diag,
        )

    @classmethod
    def load(cls, path, basis: SectorBasis) -> "SparseOperator":
        data = np.load(path)
        if int(data["format_version"]) != 1:
            raise ValueError("unsupported operator dump version")
        if data["diag"].size != basis.dimension:
            raise BasisMismatchError("operator dump does not match basis dimension")
        return cls(basis, data["rows"], data["cols"], data["vals"], data["diag"])


@dataclass(eq=False)
class DenseOperator:
    """Dense Hermitian matrix over a (small) basis."""

    basis: object
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, v):
        return self.matrix @ v

    def __matmul__(self, v):
        return self.matrix @ v


def _check_basis(lattice: Lattice, basis: SectorBasis, model: str):
    ref = basis.lattice
    same = (
        ref.geometry == lattice.geometry
        and ref.extent_x == lattice.extent_x
        and ref.extent_y == lattice.extent_y
        and ref.boundary == lattice.boundary
        and ref.n_sites == lattice.n_sites
        and ref.n_links == lattice.n_links
    )
    if not same:
        raise BasisMismatchError("basis was enumerated for a different lattice")
    if basis.model != model:
        raise BasisMismatchError(f"basis model {basis.model!r}, expected {model!r}")


def _u1_diagonal(lattice: Lattice, configs: np.ndarray, c: Couplings) -> np.ndarray:
    n_sites = lattice.n_sites
    link_bits = configs >> np.uint64(n_sites)
    vac_mask = np.uint64(0)
    for l in range(lattice.n_links):
        if lattice.vacuum_bits[l]:
            vac_mask |= np.uint64(1) << np.uint64(l)
    flips = kernels.popcount(link_bits ^ vac_mask)
    even_mask = np.uint64(0)
    odd_mask = np.uint64(0)
    for j in range(n_sites):
        if lattice.parity[j] > 0:
            even_mask |= np.uint64(1) << np.uint64(j)
        else:
            odd_mask |= np.uint64(1) << np.uint64(j)
    mass = kernels.popcount(configs & even_mask) - kernels.popcount(configs & odd_mask)
    return c.efield * flips + c.mass * mass


def _plaq_masks(lattice: Lattice):
    praise, plower = [], []
    shift = lattice.n_sites
    for p in range(lattice.n_plaquettes):
        rm = np.uint64(0)
        lm = np.uint64(0)
        for link, sign in zip(lattice.plaq_links[p], lattice.plaq_signs[p]):
            if sign > 0:
                rm |= np.uint64(1) << np.uint64(shift + link)
            else:
                lm |= np.uint64(1) << np.uint64(shift + link)
        praise.append(rm)
        plower.append(lm)
    return np.array(praise, dtype=np.uint64), np.array(plower, dtype=np.uint64)


def _build_u1(lattice: Lattice, basis: SectorBasis, c: Couplings) -> SparseOperator:
    _check_basis(lattice, basis, U1_QLM)
    amps = (-c.kappa * lattice.hop_sign).astype(np.float64)
    praise, plower = _plaq_masks(lattice)
    rows, cols, vals, misses = kernels.assemble_u1(
        basis.configs,
        lattice.n_sites,
        lattice.link_tail,
        lattice.link_head,
        amps,
        praise,
        plower,
        -c.plaq,
    )
    if misses:
        raise BasisMismatchError(
            f"{misses} hop/plaquette images fell outside the basis; "
            "sector and lattice are inconsistent"
        )
    diag = _u1_diagonal(lattice, basis.configs, c)
    return SparseOperator(basis, rows, cols, vals, diag)


def build_u1_qlm(lattice: Lattice, basis: SectorBasis, c: Couplings) -> SparseOperator:
    """Square-lattice (or 1d chain) U(1) QLM in the given sector."""
    if lattice.geometry not in (SQUARE, CHAIN):
        raise ValueError("build_u1_qlm expects a square or chain lattice")
    return _build_u1(lattice, basis, c)


def build_u1_qlm_hex(lattice: Lattice, basis: SectorBasis, c: Couplings) -> SparseOperator:
    """Hexagonal (brick-wall) U(1) QLM with six-link plaquettes."""
    if lattice.geometry != HEXAGONAL:
        raise ValueError("build_u1_qlm_hex expects a hexagonal lattice")
    return _build_u1(lattice, basis, c)


def build_z2(lattice: Lattice, basis: SectorBasis, c: Couplings) -> SparseOperator:
    """Z2 gauge theory in the sigma^x product basis.

    Diagonal: -mass * sum_r A_r - efield * sum_l sigma^x_l.  Off-diagonal:
    -kappa per single link flip, -plaq per plaquette flip.
    """
    _check_basis(lattice, basis, Z2)
    shift = lattice.n_sites
    link_masks = np.array(
        [np.uint64(1) << np.uint64(shift + l) for l in range(lattice.n_links)],
        dtype=np.uint64,
    )
    plaq_masks = []
    for p in range(lattice.n_plaquettes):
        mask = np.uint64(0)
        for link in lattice.plaq_links[p]:
            mask |= np.uint64(1) << np.uint64(shift + link)
        plaq_masks.append(mask)
    plaq_masks = np.array(plaq_masks, dtype=np.uint64)
    rows, cols, vals, misses = kernels.assemble_z2(
        basis.configs, link_masks, plaq_masks, c.kappa, c.plaq
    )
    if misses:
        raise BasisMismatchError("link/plaquette flips left the basis")

    configs = basis.configs
    pc_links = kernels.popcount(configs >> np.uint64(shift))
    sigma_x_sum = lattice.n_links - 2 * pc_links
    sum_a = np.zeros(configs.size, dtype=np.int64)
    for s in range(lattice.n_sites):
        vmask = np.uint64(0)
        for link, _ in lattice.incident_links(s):
            vmask |= np.uint64(1) << np.uint64(shift + link)
        par = kernels.popcount(configs & vmask) & 1
        sum_a += 1 - 2 * par
    diag = -c.mass * sum_a - c.efield * sigma_x_sum
    return SparseOperator(basis, rows, cols, vals, diag.astype(np.float64))


def build_qlm_1d(length: int, layout: ChargeLayout | None, c: Couplings,
                 cap: int = 20_000_000) -> SparseOperator:
    """1+1D QLM reference chain with static charges at the ends.

    The chain has no plaquettes, so the operator never depends on c.plaq.
    """
    if length % 2:
        raise ValueError("chain length must be even so the ends have opposite parity")
    lattice = chain_lattice(length)
    if layout is None:
        layout = ChargeLayout.string_pair(lattice, 0, length - 1)
    basis = enumerate_sector(lattice, layout, U1_QLM, cap=cap)
    return build_u1_qlm(lattice, basis, c)


def diagonal_energy(operator: SparseOperator, config: BasisConfig) -> float:
    """Diagonal matrix element of a configuration of the operator's basis."""
    i = operator.basis.index(config)
    return float(operator.diag[i])


def config_energy(lattice: Lattice, c: Couplings, bits: int) -> float:
    """Diagonal U(1) energy of one packed configuration."""
    from .gauge import diag_counts

    flips, mass = diag_counts(lattice, bits)
    return c.efield * flips + c.mass * mass


def config_energy_exact(lattice: Lattice, c: Couplings, bits: int) -> Fraction:
    """Same as config_energy but in exact rational arithmetic."""
    from .gauge import diag_counts

    flips, mass = diag_counts(lattice, bits)
    return c.exact("efield") * flips + c.exact("mass") * mass


def is_exactly_hermitian(op: SparseOperator) -> bool:
    """Off-diagonal triplets close under transposition with equal values."""
    fwd = {}
    for r, col, v in zip(op.rows.tolist(), op.cols.tolist(), op.vals.tolist()):
        fwd[(r, col)] = fwd.get((r, col), 0.0) + v
    for (r, col), v in fwd.items():
        if fwd.get((col, r)) != v:
            return False
    return True
