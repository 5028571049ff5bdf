"""Classical configurations, Gauss-law bookkeeping, and sector enumeration.

A configuration packs one occupation bit per site and one bit per link
into a single integer (sites first, links after).  Link bits live in the
canonical +x/+y frame; electric fields are bit - 1/2.  The reference
vacuum of each geometry (empty even/A sites, occupied odd/B sites, link
bits from ``lattice.vacuum_bits``) is Gauss-neutral by construction, and
open boundaries are handled by freezing the missing links at their
vacuum value, which is the same as letting absent links drop out of all
divergence differences.

The U(1) gauge generator is evaluated in the matter-minus-divergence
convention of the square-lattice model.  On a string state it is -1 at
the positive static charge (odd/B site, where the flux leaves) and +1
at the negative one (even/A site, where the flux arrives); the charge
layout stores these target eigenvalues per site.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .lattice import Lattice

U1_QLM = "u1_qlm"
Z2 = "z2"

SECTOR_MAGIC = b"SDSECT01"
_MODEL_TAGS = {U1_QLM: 1, Z2: 2}


class SectorSizeError(RuntimeError):
    """Enumeration would exceed the configured cap."""


class BasisMismatchError(ValueError):
    """Configuration or operator does not belong to the given basis."""


@dataclass(frozen=True)
class BasisConfig:
    """Bit-packed classical configuration (matter bits, then link bits)."""

    bits: int
    n_sites: int
    n_links: int

    def site(self, j: int) -> int:
        return (self.bits >> j) & 1

    def link(self, l: int) -> int:
        return (self.bits >> (self.n_sites + l)) & 1

    def with_site(self, j: int, value: int) -> "BasisConfig":
        mask = 1 << j
        bits = (self.bits | mask) if value else (self.bits & ~mask)
        return BasisConfig(bits, self.n_sites, self.n_links)

    def with_link(self, l: int, value: int) -> "BasisConfig":
        mask = 1 << (self.n_sites + l)
        bits = (self.bits | mask) if value else (self.bits & ~mask)
        return BasisConfig(bits, self.n_sites, self.n_links)

    def matter_tuple(self):
        return tuple((self.bits >> j) & 1 for j in range(self.n_sites))

    def link_tuple(self):
        return tuple((self.bits >> (self.n_sites + l)) & 1 for l in range(self.n_links))

    @classmethod
    def from_fields(cls, matter, links) -> "BasisConfig":
        bits = 0
        for j, v in enumerate(matter):
            if v:
                bits |= 1 << j
        for l, v in enumerate(links):
            if v:
                bits |= 1 << (len(matter) + l)
        return cls(bits, len(matter), len(links))


def vacuum_config(lattice: Lattice, model: str = U1_QLM) -> BasisConfig:
    """Reference vacuum: staggered matter for U(1), all sigma^x = +1 for Z2."""
    bits = 0
    if model == U1_QLM:
        for j in range(lattice.n_sites):
            if lattice.parity[j] < 0:
                bits |= 1 << j
        for l in range(lattice.n_links):
            if lattice.vacuum_bits[l]:
                bits |= 1 << (lattice.n_sites + l)
    return BasisConfig(bits, lattice.n_sites, lattice.n_links)


@dataclass(frozen=True)
class ChargeLayout:
    """Static charge content: map site -> target Gauss eigenvalue (-1, 0, +1)."""

    static_charges: tuple = ()

    def __post_init__(self):
        seen = set()
        for site, q in self.static_charges:
            if q not in (-1, 1):
                raise ValueError(f"static charge eigenvalue must be +-1, got {q}")
            if site in seen:
                raise ValueError(f"duplicate static charge at site {site}")
            seen.add(site)

    @classmethod
    def neutral(cls) -> "ChargeLayout":
        return cls()

    @classmethod
    def string_pair(cls, lattice: Lattice, positive_site: int, negative_site: int):
        """Positive charge on an odd/B site, negative on an even/A site.

        The generator eigenvalues are minus the physical charge: -1 where
        the string flux leaves, +1 where it ends.
        """
        if lattice.parity[positive_site] != -1:
            raise ValueError("positive static charge must sit on an odd/B site")
        if lattice.parity[negative_site] != 1:
            raise ValueError("negative static charge must sit on an even/A site")
        return cls(((positive_site, -1), (negative_site, 1)))

    def target(self, site: int) -> int:
        for s, q in self.static_charges:
            if s == site:
                return q
        return 0

    def sites(self):
        return [s for s, _ in self.static_charges]


def _site_divergence(lattice: Lattice, config: BasisConfig, site: int) -> int:
    div = 0
    for link, orient in lattice.incident_links(site):
        div += orient * config.link(link)
    return div


def _vacuum_divergence(lattice: Lattice, site: int) -> int:
    div = 0
    for link, orient in lattice.incident_links(site):
        div += orient * int(lattice.vacuum_bits[link])
    return div


def gauss_eigenvalue_u1(lattice: Lattice, config: BasisConfig, site: int,
                        layout: ChargeLayout | None = None) -> int:
    """Eigenvalue of the U(1) gauge generator at a site.

    Matter charge minus electric divergence, measured relative to the
    geometry's reference vacuum (0 everywhere on the vacuum itself).
    """
    n_vac = 1 if lattice.parity[site] < 0 else 0
    dq = config.site(site) - n_vac
    ddiv = _site_divergence(lattice, config, site) - _vacuum_divergence(lattice, site)
    return dq - ddiv


def gauss_map(lattice: Lattice, config: BasisConfig) -> np.ndarray:
    return np.array(
        [gauss_eigenvalue_u1(lattice, config, s) for s in range(lattice.n_sites)],
        dtype=np.int64,
    )


def satisfies_layout(lattice: Lattice, config: BasisConfig, layout: ChargeLayout) -> bool:
    return all(
        gauss_eigenvalue_u1(lattice, config, s) == layout.target(s)
        for s in range(lattice.n_sites)
    )


def z2_vertex_eigenvalue(lattice: Lattice, config: BasisConfig, site: int) -> int:
    """Product of sigma^x (+1 for bit 0, -1 for bit 1) over incident links."""
    parity = 0
    for link, _ in lattice.incident_links(site):
        parity ^= config.link(link)
    return -1 if parity else 1


# ---------------------------------------------------------------------------
# sector enumeration
# ---------------------------------------------------------------------------

def _constraint_tables(lattice: Lattice, layout: ChargeLayout):
    """Per-site linear constraints  sum coeff*bit == rhs  on the packed word.

    Derived from gauss_eigenvalue_u1(...) == layout target:
    -matter(site) + sum_out bit - sum_in bit == rhs(site).
    """
    n_sites = lattice.n_sites
    terms = [[] for _ in range(n_sites)]
    for s in range(n_sites):
        terms[s].append((s, -1))
        for link, orient in lattice.incident_links(s):
            terms[s].append((n_sites + link, orient))
    rhs = np.empty(n_sites, dtype=np.int64)
    for s in range(n_sites):
        n_vac = 1 if lattice.parity[s] < 0 else 0
        rhs[s] = _vacuum_divergence(lattice, s) - n_vac - layout.target(s)
    ptr = np.zeros(n_sites + 1, dtype=np.int64)
    bits_flat, coeff_flat = [], []
    for s in range(n_sites):
        for b, c in terms[s]:
            bits_flat.append(b)
            coeff_flat.append(c)
        ptr[s + 1] = len(bits_flat)
    return ptr, np.array(bits_flat, dtype=np.int64), np.array(coeff_flat, dtype=np.int64), rhs


def brute_force_sector(lattice: Lattice, layout: ChargeLayout, force=None) -> np.ndarray:
    """Exhaustive Gauss filter over all 2^(sites+links) words; small lattices only."""
    n_bits = lattice.n_sites + lattice.n_links
    ptr, bits, coeffs, rhs = _constraint_tables(lattice, layout)
    return kernels.gauss_filter(n_bits, ptr, bits, coeffs, rhs, force=force)


def _propagate_enumerate(lattice: Lattice, layout: ChargeLayout, cap: int):
    """Site-by-site constraint propagation over matter and link bits.

    Variables are ordered row-major per site (matter, x-link, y-link);
    a site's constraint is checked the moment its last incident bit is
    assigned, and partial sums are bounded to prune early.
    """
    n_sites = lattice.n_sites
    order = []
    for s in range(n_sites):
        order.append(("m", s))
        for axis in (0, 1):
            l = lattice.link_id(s, axis)
            if l >= 0:
                order.append(("l", l))

    # per variable: list of (site, coeff)
    var_terms = []
    for kind, idx in order:
        if kind == "m":
            var_terms.append([(idx, -1)])
        else:
            var_terms.append([
                (int(lattice.link_tail[idx]), 1),
                (int(lattice.link_head[idx]), -1),
            ])

    _, _, _, rhs_arr = _constraint_tables(lattice, layout)
    rhs = rhs_arr.tolist()
    partial = [0] * n_sites
    rem_pos = [0] * n_sites
    rem_neg = [0] * n_sites
    for terms in var_terms:
        for s, c in terms:
            if c > 0:
                rem_pos[s] += 1
            else:
                rem_neg[s] += 1

    bit_pos = []
    for kind, idx in order:
        bit_pos.append(idx if kind == "m" else n_sites + idx)

    n_vars = len(order)
    out = []

    def assign(i, value):
        ok = True
        for s, c in var_terms[i]:
            if c > 0:
                rem_pos[s] -= 1
            else:
                rem_neg[s] -= 1
            partial[s] += c * value
            lo = partial[s] - rem_neg[s]
            hi = partial[s] + rem_pos[s]
            if not (lo <= rhs[s] <= hi):
                ok = False
        return ok

    def undo(i, value):
        for s, c in var_terms[i]:
            if c > 0:
                rem_pos[s] += 1
            else:
                rem_neg[s] += 1
            partial[s] -= c * value

    def walk(i, acc):
        if i == n_vars:
            out.append(acc)
            if len(out) > cap:
                raise SectorSizeError(
                    f"sector exceeds cap of {cap} configurations"
                )
            return
        for value in (0, 1):
            if assign(i, value):
                walk(i + 1, acc | (value << bit_pos[i]))
            undo(i, value)

    walk(0, 0)
    return np.array(sorted(out), dtype=np.uint64)


@dataclass(eq=False)
class SectorBasis:
    """Deterministically ordered gauge sector; immutable once built."""

    lattice: Lattice
    layout: ChargeLayout
    model: str
    configs: np.ndarray  # sorted uint64

    def __len__(self) -> int:
        return int(self.configs.size)

    @property
    def dimension(self) -> int:
        return int(self.configs.size)

    def index(self, config) -> int:
        bits = config.bits if hasattr(config, "bits") else int(config)
        i = int(np.searchsorted(self.configs, np.uint64(bits)))
        if i >= self.configs.size or int(self.configs[i]) != bits:
            raise BasisMismatchError(f"configuration {bits:#x} not in sector")
        return i

    def config(self, i: int) -> BasisConfig:
        return BasisConfig(int(self.configs[i]), self.lattice.n_sites, self.lattice.n_links)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(SECTOR_MAGIC)
            fh.write(struct.pack(
                "<IIQB",
                self.lattice.n_sites,
                self.lattice.n_links,
                self.configs.size,
                _MODEL_TAGS[self.model],
            ))
            fh.write(self.configs.astype("<u8").tobytes())

    @classmethod
    def load(cls, path, lattice: Lattice, layout: ChargeLayout, model: str):
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != SECTOR_MAGIC:
                raise ValueError(f"bad sector file magic {magic!r}")
            n_sites, n_links, n_configs, tag = struct.unpack("<IIQB", fh.read(17))
            if (n_sites, n_links) != (lattice.n_sites, lattice.n_links):
                raise BasisMismatchError("sector file does not match lattice")
            if tag != _MODEL_TAGS[model]:
                raise BasisMismatchError("sector file does not match model")
            data = np.frombuffer(fh.read(8 * n_configs), dtype="<u8")
        return cls(lattice, layout, model, data.astype(np.uint64))


def enumerate_sector(lattice: Lattice, layout: ChargeLayout, model: str,
                     cap: int = 20_000_000) -> SectorBasis:
    """Enumerate the gauge-invariant sector (U(1)) or the full link space (Z2)."""
    n_bits = lattice.n_sites + lattice.n_links
    if n_bits > 63:
        raise SectorSizeError(
            f"packed configuration needs {n_bits} bits; exact sectors support at most 63"
        )
    if model == Z2:
        n = 1 << lattice.n_links
        if n > cap:
            raise SectorSizeError(
                f"Z2 link space has {n} configurations, exceeding cap {cap}"
            )
        configs = np.arange(n, dtype=np.uint64) << np.uint64(lattice.n_sites)
        return SectorBasis(lattice, layout, Z2, configs)
    if model != U1_QLM:
        raise ValueError(f"unknown model {model!r}")
    configs = _propagate_enumerate(lattice, layout, cap)
    return SectorBasis(lattice, layout, U1_QLM, configs)


def diag_counts(lattice: Lattice, bits: int):
    """(flipped links, staggered mass sum) of a packed configuration.

    Integer inputs to diagonal energies: electric part g * flips, mass
    part m * mass_sum.
    """
    n_sites = lattice.n_sites
    flips = 0
    for l in range(lattice.n_links):
        if ((bits >> (n_sites + l)) & 1) != int(lattice.vacuum_bits[l]):
            flips += 1
    mass = 0
    for j in range(n_sites):
        if (bits >> j) & 1:
            mass += int(lattice.parity[j])
    return flips, mass


def matter_excess(lattice: Lattice, bits: int, sites=None) -> int:
    """Staggered fermion number summed over `sites` (default: all).

    Counts particles on even/A sites plus holes on odd/B sites; zero on
    the vacuum, two per broken-string pair.
    """
    total = 0
    for j in (range(lattice.n_sites) if sites is None else sites):
        occ = (bits >> j) & 1
        if lattice.parity[j] > 0:
            total += occ
        else:
            total += 1 - occ
    return total
