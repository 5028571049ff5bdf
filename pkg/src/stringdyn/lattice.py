"""Lattice geometries: square and hexagonal (brick-wall) cylinders and patches.

Conventions
-----------
Sites carry integer coordinates (x, y) and are indexed row-major
(``idx = y * extent_x + x``).  Links are directed along the positive
axes: an x-link points from (x, y) to (x+1, y), a y-link from (x, y)
to (x, y+1) (wrapping to y=0 on a cylinder).  Per site, the x-link is
listed before the y-link.

The hexagonal lattice is embedded as a brick wall: every horizontal
bond is present, vertical bonds only where (x + y) is even, so each
site has degree three in the bulk and plaquettes are six-link bricks
spanning x..x+2, y..y+1.  The A sublattice is (x + y) even.

Plaquette cycles start at the anchor (lower-left) site and run
counterclockwise; the arrows below show the traversal order.  Legs
traversed along the canonical +x/+y link direction carry sign +1 (the
plaquette operator raises them), legs traversed against it carry -1
(lowered):

      square, anchor (x,y)        hexagonal brick, anchor (x,y)

      + <--3--- +                 + <--5-- + <--4-- +
      |         ^                 |                 ^
      4         2                 6                 3
      v         |                 v                 |
      + ---1--> +                 + --1--> + --2--> +

      signs (+,+,-,-)             signs (+,+,+,-,-,-)

Cylinders are periodic along y and open along x; periodic y requires
an even extent_y so that the sublattice structure closes around the
seam.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

SQUARE = "square"
HEXAGONAL = "hexagonal"
CHAIN = "chain"  # internal 1d reference geometry, not part of LatticeSpec

CYLINDER = "cylinder_periodic_y"
OPEN = "open"


class LatticeError(ValueError):
    """Raised for specs the geometry cannot realize."""


@dataclass(frozen=True)
class LatticeSpec:
    geometry: str
    extent_x: int
    extent_y: int
    boundary: str = CYLINDER

    def validate(self):
        if self.geometry not in (SQUARE, HEXAGONAL):
            raise LatticeError(f"unknown geometry {self.geometry!r}")
        if self.boundary not in (CYLINDER, OPEN):
            raise LatticeError(f"unknown boundary {self.boundary!r}")
        if self.extent_x < 2 or self.extent_y < 2:
            raise LatticeError(
                f"extents must be >= 2, got {self.extent_x}x{self.extent_y}"
            )
        if self.boundary == CYLINDER and self.extent_y % 2:
            raise LatticeError(
                "cylinder_periodic_y needs even extent_y to keep the lattice "
                f"bipartite around the seam (got extent_y={self.extent_y})"
            )


@dataclass
class Lattice:
    """Immutable geometry tables; safe for concurrent reads."""

    geometry: str
    extent_x: int
    extent_y: int
    boundary: str
    coords: np.ndarray          # (n_sites, 2) int
    link_tail: np.ndarray       # (n_links,) site index
    link_head: np.ndarray       # (n_links,) site index
    link_axis: np.ndarray       # (n_links,) 0 = x, 1 = y
    plaq_links: list            # per plaquette: int array of link ids, cycle order
    plaq_signs: list            # per plaquette: +1 raise / -1 lower along the cycle
    plaq_anchor: list           # per plaquette: (x, y) of the anchor site
    parity: np.ndarray          # (n_sites,) +1 even / A, -1 odd / B
    hop_sign: np.ndarray        # (n_links,) staggering sign of the hopping term
    vacuum_bits: np.ndarray     # (n_links,) link bit of the reference vacuum
    _site_of: dict = field(repr=False, default_factory=dict)
    _link_of: dict = field(repr=False, default_factory=dict)   # (tail, axis) -> id
    _incident: list = field(repr=False, default_factory=list)  # site -> [(link, +-1)]

    @property
    def n_sites(self) -> int:
        return len(self.coords)

    @property
    def n_links(self) -> int:
        return len(self.link_tail)

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaq_links)

    @property
    def mass_sign(self) -> np.ndarray:
        return self.parity

    def site_id(self, x: int, y: int) -> int:
        return self._site_of[(x, y)]

    def has_site(self, x: int, y: int) -> bool:
        return (x, y) in self._site_of

    def link_id(self, site: int, axis: int) -> int:
        """Link leaving `site` along `axis`, or -1 if absent."""
        return self._link_of.get((site, axis), -1)

    def incident_links(self, site: int):
        """(link_id, orientation) pairs; +1 = outgoing, -1 = incoming."""
        return self._incident[site]

    def neighbors(self, site: int):
        for link, orient in self._incident[site]:
            yield (self.link_head[link] if orient > 0 else self.link_tail[link]), link

    def link_between(self, a: int, b: int):
        """(link_id, +1) if the canonical link runs a->b, (link_id, -1) if b->a."""
        for link, orient in self._incident[a]:
            other = self.link_head[link] if orient > 0 else self.link_tail[link]
            if other == b:
                return link, orient
        raise LatticeError(f"sites {a} and {b} are not adjacent")


def build_lattice(spec: LatticeSpec) -> Lattice:
    spec.validate()
    return _build(spec.geometry, spec.extent_x, spec.extent_y, spec.boundary)


def chain_lattice(n_sites: int, x_offset: int = 1) -> Lattice:
    """Open 1d chain used by the 1+1D reference model.

    Sites sit at (x_offset + i, 0); the default offset puts the left end on
    an odd-parity site so a string launched there has the same breakable-link
    structure as the 2d strings it is compared against.
    """
    if n_sites < 2:
        raise LatticeError("chain needs at least 2 sites")
    return _build(CHAIN, n_sites, 1, OPEN, x_offset=x_offset)


def _build(geometry, lx, ly, boundary, x_offset=0):
    cylinder = boundary == CYLINDER
    coords = []
    site_of = {}
    for y in range(ly):
        for x in range(lx):
            site_of[(x + x_offset, y)] = len(coords)
            coords.append((x + x_offset, y))
    coords = np.array(coords, dtype=np.int64)

    def vertical_exists(x, y):
        if geometry == CHAIN:
            return False
        if geometry == HEXAGONAL and (x + y) % 2:
            return False
        return y < ly - 1 or cylinder

    tails, heads, axes = [], [], []
    link_of = {}
    for s, (x, y) in enumerate(coords):
        if x - x_offset < lx - 1:
            link_of[(s, 0)] = len(tails)
            tails.append(s)
            heads.append(site_of[(x + 1, y)])
            axes.append(0)
        if vertical_exists(x - x_offset, y):
            link_of[(s, 1)] = len(tails)
            tails.append(s)
            heads.append(site_of[(x, (y + 1) % ly)])
            axes.append(1)

    link_tail = np.array(tails, dtype=np.int64)
    link_head = np.array(heads, dtype=np.int64)
    link_axis = np.array(axes, dtype=np.int64)

    parity = np.where((coords.sum(axis=1)) % 2 == 0, 1, -1).astype(np.int8)

    if geometry == SQUARE:
        jx = coords[link_tail, 0]
        hop = np.where(link_axis == 0, 1, np.where(jx % 2 == 0, 1, -1))
        hop_sign = hop.astype(np.int8)
    else:
        hop_sign = np.ones(len(link_tail), dtype=np.int8)

    # Reference vacuum in the canonical (+x/+y) frame.  Square and chain:
    # every electric field points left/down (bit 0).  Hexagonal: the vertical
    # bonds form a perfect matching carrying the background flux, which in
    # canonical bits means every vertical is 0 and a horizontal is 1 exactly
    # when its tail is on the A sublattice.
    if geometry == HEXAGONAL:
        vac = np.where((link_axis == 0) & (parity[link_tail] == 1), 1, 0)
        vacuum_bits = vac.astype(np.uint8)
    else:
        vacuum_bits = np.zeros(len(link_tail), dtype=np.uint8)

    plaq_links, plaq_signs, plaq_anchor = [], [], []
    if geometry == SQUARE:
        for y in range(ly if cylinder else ly - 1):
            for x in range(lx - 1):
                s = site_of[(x + x_offset, y)]
                sr = site_of[(x + 1 + x_offset, y)]
                su = site_of[(x + x_offset, (y + 1) % ly)]
                cycle = [link_of[(s, 0)], link_of[(sr, 1)],
                         link_of[(su, 0)], link_of[(s, 1)]]
                plaq_links.append(np.array(cycle, dtype=np.int64))
                plaq_signs.append(np.array([1, 1, -1, -1], dtype=np.int8))
                plaq_anchor.append((x + x_offset, y))
    elif geometry == HEXAGONAL:
        for y in range(ly if cylinder else ly - 1):
            for x in range(lx - 2):
                if (x + y) % 2:
                    continue
                s = site_of[(x + x_offset, y)]
                s1 = site_of[(x + 1 + x_offset, y)]
                s2 = site_of[(x + 2 + x_offset, y)]
                yu = (y + 1) % ly
                t = site_of[(x + x_offset, yu)]
                t1 = site_of[(x + 1 + x_offset, yu)]
                cycle = [link_of[(s, 0)], link_of[(s1, 0)], link_of[(s2, 1)],
                         link_of[(t1, 0)], link_of[(t, 0)], link_of[(s, 1)]]
                plaq_links.append(np.array(cycle, dtype=np.int64))
                plaq_signs.append(np.array([1, 1, 1, -1, -1, -1], dtype=np.int8))
                plaq_anchor.append((x + x_offset, y))

    incident = [[] for _ in range(len(coords))]
    for l in range(len(link_tail)):
        incident[link_tail[l]].append((l, 1))
        incident[link_head[l]].append((l, -1))

    return Lattice(
        geometry=geometry,
        extent_x=lx,
        extent_y=ly,
        boundary=boundary,
        coords=coords,
        link_tail=link_tail,
        link_head=link_head,
        link_axis=link_axis,
        plaq_links=plaq_links,
        plaq_signs=plaq_signs,
        plaq_anchor=plaq_anchor,
        parity=parity,
        hop_sign=hop_sign,
        vacuum_bits=vacuum_bits,
        _site_of=site_of,
        _link_of=link_of,
        _incident=incident,
    )


def staggering(lattice: Lattice, site: int) -> int:
    """Mass staggering sign of a site: +1 on even/A, -1 on odd/B."""
    return int(lattice.parity[site])


def hop_sign(lattice: Lattice, link: int) -> int:
    return int(lattice.hop_sign[link])


def manhattan_distance(lattice: Lattice, a: int, b: int) -> int:
    """Shortest path length between two sites on the link graph."""
    if a == b:
        return 0
    dist = {a: 0}
    queue = deque([a])
    while queue:
        s = queue.popleft()
        for t, _link in lattice.neighbors(s):
            if t not in dist:
                dist[t] = dist[s] + 1
                if t == b:
                    return dist[t]
                queue.append(t)
    raise LatticeError(f"sites {a} and {b} are not connected")


def plaquette_cycle(lattice: Lattice, p: int):
    """Ordered (link, sign) pairs of a plaquette cycle.

    Sign +1 marks links the plaquette operator raises, -1 links it lowers;
    the order follows the cycle traversal from the anchor site.
    """
    return list(zip(lattice.plaq_links[p].tolist(), lattice.plaq_signs[p].tolist()))
