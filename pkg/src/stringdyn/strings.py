"""Minimal strings, energy-conserving break patterns, and the projected model.

A string is a path of links flipped out of the vacuum connecting the two
static charges; its flux leaves the positive charge (odd/B site) and
ends on the negative one (even/A site).  Only paths whose length equals
the link-graph distance survive Gauss's law, so the closure of a seed
string under single plaquette flips enumerates the whole manifold of
minimal strings.

On the first-order resonance (2 mass == efield) each string supports
energy-conserving single-hop breaks: a sea boson advances across a
string link, restoring it to vacuum and leaving a hole on the odd/B tail
and a particle on the even/A head.  Which links can break is not hard
coded anywhere; the breadth-first search below simply applies every
hopping move and keeps configurations of exactly equal diagonal energy
(rational arithmetic, zero tolerance).  The projected Hamiltonian over
the resulting fixed-energy manifold carries the hop moves (amplitude
-kappa * hop sign) and the plaquette flips (-J) between member
configurations, with the common diagonal subtracted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .gauge import (
    BasisConfig,
    ChargeLayout,
    SectorBasis,
    gauss_eigenvalue_u1,
    vacuum_config,
)
from .lattice import CHAIN, HEXAGONAL, SQUARE, Lattice, manhattan_distance
from .models import Couplings, DenseOperator, SparseOperator

L_SHAPED = "l_shaped"
DIAGONAL = "diagonal"
STRAIGHT = "straight"
S_SHAPED_HEX = "s_shaped_hex"


class StringValidationError(ValueError):
    """A proposed path is not a valid minimal string."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class ManifoldSizeError(RuntimeError):
    """Manifold enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class StringPath:
    """Site sequence of one minimal string, positive charge first."""

    sites: tuple
    links: tuple
    bits: int

    @property
    def length(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class BreakPattern:
    """Broken segments of one parent string (n=1: single disjoint links)."""

    string_id: int
    broken_links: tuple        # link ids restored to vacuum
    pairs: tuple               # (hole_site, particle_site) per broken link


@dataclass(eq=False)
class MinimalModelBasis:
    """Fixed-energy manifold of unbroken and broken minimal strings."""

    lattice: Lattice
    layout: ChargeLayout
    couplings: Couplings
    strings: list
    labels: list               # (string_id, broken_links) per member
    configs: list              # packed bits per member
    energy: Fraction           # common exact diagonal energy (relative units)
    patch_sites: tuple
    off_resonant: bool = False
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {bits: i for i, bits in enumerate(self.configs)}

    @property
    def dimension(self) -> int:
        return len(self.configs)

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def string_ordinal(self, string_id: int) -> int:
        """Basis index of an unbroken string."""
        return self.index[self.strings[string_id].bits]

    def config(self, i: int) -> BasisConfig:
        return BasisConfig(self.configs[i], self.lattice.n_sites, self.lattice.n_links)

    def break_pattern(self, i: int) -> BreakPattern:
        sid, broken = self.labels[i]
        parent = self.strings[sid]
        pairs = []
        for link in broken:
            pos = parent.links.index(link)
            pairs.append((parent.sites[pos], parent.sites[pos + 1]))
        return BreakPattern(sid, broken, tuple(pairs))


# ---------------------------------------------------------------------------
# move tables: pure-python application of the Hamiltonian terms to packed
# bits, independent of the array kernels used for full-sector assembly
# ---------------------------------------------------------------------------

class MoveTables:
    def __init__(self, lattice: Lattice):
        self.lattice = lattice
        n_sites = lattice.n_sites
        self.links = []
        for l in range(lattice.n_links):
            a = int(lattice.link_tail[l])
            b = int(lattice.link_head[l])
            self.links.append((
                1 << (n_sites + l),
                1 << a,
                1 << b,
                int(lattice.parity[a]),
                int(lattice.parity[b]),
                int(lattice.hop_sign[l]),
                int(lattice.vacuum_bits[l]),
                l,
            ))
        self.plaqs = []
        for p in range(lattice.n_plaquettes):
            rm = 0
            lm = 0
            for link, sign in zip(lattice.plaq_links[p], lattice.plaq_signs[p]):
                if sign > 0:
                    rm |= 1 << (n_sites + int(link))
                else:
                    lm |= 1 << (n_sites + int(link))
            self.plaqs.append((rm, lm, p))

    def hop_moves(self, bits: int):
        """Yield (new_bits, amplitude_sign_link, d_flips, d_mass, link_id)."""
        for bl, ma, mb, pa, pb, sign, vac, l in self.links:
            up = bits & bl
            if not up:
                if (bits & mb) and not (bits & ma):
                    d_flips = -1 if vac else 1
                    yield bits ^ (bl | ma | mb), sign, d_flips, pa - pb, l
            else:
                if (bits & ma) and not (bits & mb):
                    d_flips = 1 if vac else -1
                    yield bits ^ (bl | ma | mb), sign, d_flips, pb - pa, l

    def plaquette_moves(self, bits: int):
        for rm, lm, p in self.plaqs:
            if (bits & rm) == 0 and (bits & lm) == lm:
                yield bits ^ (rm | lm), p
            elif (bits & rm) == rm and (bits & lm) == 0:
                yield bits ^ (rm | lm), p

    def flippable_plaquettes(self, bits: int):
        return [p for _, p in self.plaquette_moves(bits)]


def flippable_plaquettes(lattice: Lattice, config: BasisConfig):
    return MoveTables(lattice).flippable_plaquettes(config.bits)


# ---------------------------------------------------------------------------
# string construction
# ---------------------------------------------------------------------------

def _charge_sites(lattice: Lattice, layout: ChargeLayout):
    positive = negative = None
    for site, q in layout.static_charges:
        if q == -1:
            positive = site
        elif q == 1:
            negative = site
    if positive is None or negative is None:
        raise ValueError("layout must carry one positive and one negative static charge")
    return positive, negative


def _square_steps(shape, dx, dy):
    sx = 1 if dx >= 0 else -1
    sy = 1 if dy >= 0 else -1
    nx, ny = abs(dx), abs(dy)
    if shape == L_SHAPED:
        if nx == 0 or ny == 0:
            raise ValueError("l_shaped needs displacement in both directions")
        return [(sx, 0)] * nx + [(0, sy)] * ny
    if shape == STRAIGHT:
        if nx and ny:
            raise ValueError("straight needs an axis-aligned displacement")
        return [(sx, 0)] * nx + [(0, sy)] * ny
    if shape == DIAGONAL:
        steps = []
        x = y = 0
        while x < nx or y < ny:
            # stay as close to the straight line as possible, x first
            if x * ny <= y * nx and x < nx:
                steps.append((sx, 0))
                x += 1
            elif y < ny:
                steps.append((0, sy))
                y += 1
            else:
                steps.append((sx, 0))
                x += 1
        return steps
    raise ValueError(f"unsupported square string shape {shape!r}")


def _hex_dirs(shape, dx, n_h):
    plus = (n_h + dx) // 2
    minus = n_h - plus
    if minus < 0 or plus < 0 or (n_h + dx) % 2:
        raise ValueError("hex displacement incompatible with an alternating path")
    if shape == STRAIGHT:
        if minus:
            raise ValueError("straight hex string needs |dx| == number of h-steps")
        return [1] * plus
    if shape == S_SHAPED_HEX:
        if minus == 0:
            raise ValueError("s_shaped_hex needs at least one reversed step")
        lead = (n_h - minus) // 2
        return [1] * lead + [-1] * minus + [1] * (n_h - minus - lead)
    raise ValueError(f"unsupported hex string shape {shape!r}")


def _hex_path_sites(lattice, start, dirs):
    x, y = (int(v) for v in lattice.coords[start])
    sites = [start]
    for i, d in enumerate(dirs):
        x += d
        if not lattice.has_site(x, y):
            raise StringValidationError(f"path leaves the lattice at ({x}, {y})")
        sites.append(lattice.site_id(x, y))
        if i < len(dirs) - 1:
            # the vertical bond of the intermediate site is forced
            s = lattice.site_id(x, y)
            up = lattice.link_id(s, 1)
            if up >= 0:
                y = (y + 1) % lattice.extent_y
            else:
                y = (y - 1) % lattice.extent_y
            if not lattice.has_site(x, y):
                raise StringValidationError(f"path leaves the lattice at ({x}, {y})")
            sites.append(lattice.site_id(x, y))
    return sites


def path_config(lattice: Lattice, sites) -> BasisConfig:
    """Vacuum with every path link flipped; matter untouched."""
    config = vacuum_config(lattice)
    bits = config.bits
    n_sites = lattice.n_sites
    for a, b in zip(sites[:-1], sites[1:]):
        link, _ = lattice.link_between(a, b)
        bits ^= 1 << (n_sites + link)
    return BasisConfig(bits, lattice.n_sites, lattice.n_links)


def _validate_string(lattice, layout, sites) -> StringPath:
    positive, negative = _charge_sites(lattice, layout)
    if sites[0] != positive or sites[-1] != negative:
        raise StringValidationError(
            "path endpoints must run from the positive to the negative static charge"
        )
    links = []
    for a, b in zip(sites[:-1], sites[1:]):
        link, _ = lattice.link_between(a, b)
        links.append(link)
    if len(set(links)) != len(links):
        raise StringValidationError("path repeats a link")
    config = path_config(lattice, sites)
    violations = [
        s for s in range(lattice.n_sites)
        if gauss_eigenvalue_u1(lattice, config, s) != layout.target(s)
    ]
    if violations:
        coords = [tuple(int(v) for v in lattice.coords[s]) for s in violations]
        raise StringValidationError(
            f"path violates Gauss's law at sites {coords}", violations
        )
    dist = manhattan_distance(lattice, positive, negative)
    if len(links) != dist:
        raise StringValidationError(
            f"path length {len(links)} is not minimal (distance {dist})"
        )
    return StringPath(tuple(sites), tuple(links), config.bits)


def build_string_state(lattice: Lattice, layout: ChargeLayout, shape,
                       path=None) -> StringPath:
    """Construct and validate an initial string state.

    `shape` is one of l_shaped / diagonal / straight / s_shaped_hex, or
    "explicit" with `path` a site sequence from the positive charge.
    """
    if shape == "explicit":
        if path is None:
            raise ValueError("explicit shape needs a site path")
        return _validate_string(lattice, layout, list(path))
    positive, negative = _charge_sites(lattice, layout)
    px, py = (int(v) for v in lattice.coords[positive])
    nx, ny = (int(v) for v in lattice.coords[negative])
    if lattice.geometry in (SQUARE, CHAIN):
        dy = ny - py
        if lattice.boundary != "open" and abs(dy) > lattice.extent_y - abs(dy):
            dy = dy - lattice.extent_y if dy > 0 else dy + lattice.extent_y
        steps = _square_steps(shape, nx - px, dy)
        sites = [positive]
        x, y = px, py
        for ddx, ddy in steps:
            x += ddx
            y = (y + ddy) % lattice.extent_y
            if not lattice.has_site(x, y):
                raise StringValidationError(f"path leaves the lattice at ({x}, {y})")
            sites.append(lattice.site_id(x, y))
    elif lattice.geometry == HEXAGONAL:
        n_v = manhattan_distance(lattice, positive, negative) // 2
        dirs = _hex_dirs(shape, nx - px, n_v + 1)
        sites = _hex_path_sites(lattice, positive, dirs)
    else:
        raise ValueError(f"no string shapes for geometry {lattice.geometry!r}")
    return _validate_string(lattice, layout, sites)


def _path_from_bits(lattice, layout, bits) -> StringPath:
    """Recover the site path of a string configuration from its flipped links."""
    positive, negative = _charge_sites(lattice, layout)
    n_sites = lattice.n_sites
    flipped = [
        l for l in range(lattice.n_links)
        if ((bits >> (n_sites + l)) & 1) != int(lattice.vacuum_bits[l])
    ]
    touch = {}
    for l in flipped:
        for s in (int(lattice.link_tail[l]), int(lattice.link_head[l])):
            touch.setdefault(s, []).append(l)
    sites = [positive]
    links = []
    used = set()
    current = positive
    while current != negative:
        options = [l for l in touch.get(current, []) if l not in used]
        if len(options) != 1:
            raise StringValidationError("flipped links do not form a simple path")
        l = options[0]
        used.add(l)
        links.append(l)
        a, b = int(lattice.link_tail[l]), int(lattice.link_head[l])
        current = b if current == a else a
        sites.append(current)
    if len(used) != len(flipped):
        raise StringValidationError("flipped links do not form a simple path")
    return StringPath(tuple(sites), tuple(links), bits)


def enumerate_minimal_strings(lattice: Lattice, layout: ChargeLayout,
                              seed: StringPath) -> list:
    """Closure of the seed under single plaquette flips, sorted by packed bits."""
    tables = MoveTables(lattice)
    seen = {seed.bits}
    queue = [seed.bits]
    while queue:
        bits = queue.pop()
        for new_bits, _p in tables.plaquette_moves(bits):
            if new_bits not in seen:
                seen.add(new_bits)
                queue.append(new_bits)
    return [_path_from_bits(lattice, layout, b) for b in sorted(seen)]


def monotone_paths(lattice: Lattice, a: int, b: int):
    """Brute-force oracle: all monotone site paths a -> b on the square lattice."""
    ax, ay = (int(v) for v in lattice.coords[a])
    bx, by = (int(v) for v in lattice.coords[b])
    dx, dy = bx - ax, by - ay
    sx = 1 if dx >= 0 else -1
    sy = 1 if dy >= 0 else -1
    out = []

    def walk(x, y, path):
        if (x, y) == (bx, by):
            out.append(tuple(path))
            return
        if x != bx:
            walk(x + sx, y, path + [lattice.site_id(x + sx, y)])
        if y != by:
            walk(x, y + sy, path + [lattice.site_id(x, y + sy)])

    walk(ax, ay, [a])
    return out


def all_shortest_paths(lattice: Lattice, a: int, b: int, cap: int = 100_000):
    """All minimal-length site paths a -> b on the link graph, sorted."""
    from collections import deque

    dist = {b: 0}
    queue = deque([b])
    while queue:
        s = queue.popleft()
        for t, _ in lattice.neighbors(s):
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    if a not in dist:
        raise ValueError("sites are not connected")
    out = []

    def walk(site, path):
        if site == b:
            out.append(tuple(path))
            if len(out) > cap:
                raise ValueError(f"more than {cap} shortest paths")
            return
        for t, _ in lattice.neighbors(site):
            if dist.get(t, -1) == dist[site] - 1:
                walk(t, path + [t])

    walk(a, [a])
    return sorted(out)


# ---------------------------------------------------------------------------
# fixed-energy manifold
# ---------------------------------------------------------------------------

def _exact_energy(c: Couplings, flips: int, mass: int) -> Fraction:
    return c.exact("efield") * flips + c.exact("mass") * mass


def enumerate_resonant_manifold(lattice: Lattice, layout: ChargeLayout,
                                strings, c: Couplings,
                                cap: int = 20_000) -> MinimalModelBasis:
    """Equal-energy closure of the strings under single hopping moves.

    Runs a breadth-first search applying every hopping term and keeping
    only configurations whose exact diagonal energy matches the common
    string energy; off resonance nothing survives and the basis holds
    the unbroken strings with the off_resonant flag set.
    """
    from .gauge import diag_counts

    tables = MoveTables(lattice)
    ref_counts = diag_counts(lattice, strings[0].bits)
    e_ref = _exact_energy(c, *ref_counts)
    for s in strings[1:]:
        if _exact_energy(c, *diag_counts(lattice, s.bits)) != e_ref:
            raise ValueError("strings do not share one diagonal energy")

    labels = []
    configs = []
    index = {}
    any_broken = False
    for sid, s in enumerate(strings):
        visited = {s.bits: diag_counts(lattice, s.bits)}
        queue = [s.bits]
        while queue:
            bits = queue.pop()
            flips, mass = visited[bits]
            for new_bits, _sign, d_f, d_m, _l in tables.hop_moves(bits):
                if new_bits in visited:
                    continue
                counts = (flips + d_f, mass + d_m)
                if _exact_energy(c, *counts) != e_ref:
                    continue
                visited[new_bits] = counts
                queue.append(new_bits)
        for bits in sorted(visited):
            if bits in index:
                continue  # merged across parent strings
            broken = tuple(
                l for l in s.links
                if ((bits >> (lattice.n_sites + l)) & 1) == int(lattice.vacuum_bits[l])
            )
            if broken:
                any_broken = True
            index[bits] = len(configs)
            labels.append((sid, broken))
            configs.append(bits)
            if len(configs) > cap:
                raise ManifoldSizeError(f"manifold exceeds cap of {cap} members")

    xs = sorted({int(lattice.coords[s][0]) for sp in strings for s in sp.sites})
    ys = sorted({int(lattice.coords[s][1]) for sp in strings for s in sp.sites})
    patch = tuple(
        lattice.site_id(x, y)
        for y in range(ys[0], ys[-1] + 1)
        for x in range(xs[0], xs[-1] + 1)
        if lattice.has_site(x, y)
    )
    return MinimalModelBasis(
        lattice=lattice,
        layout=layout,
        couplings=c,
        strings=list(strings),
        labels=labels,
        configs=configs,
        energy=e_ref,
        patch_sites=patch,
        off_resonant=not any_broken,
        index=index,
    )


def build_minimal_model(basis: MinimalModelBasis, c: Couplings | None = None,
                        cap: int = 20_000) -> DenseOperator:
    """Dense projection of the Hamiltonian onto the fixed-energy manifold.

    Hop moves give -kappa * hop_sign between break partners, plaquette
    flips -plaq between strings (and their compatible break patterns);
    the common diagonal is subtracted, so the diagonal is zero.
    """
    if c is None:
        c = basis.couplings
    n = basis.dimension
    if n > cap:
        raise ManifoldSizeError(f"manifold dimension {n} exceeds cap {cap}")
    tables = MoveTables(basis.lattice)
    h = np.zeros((n, n), dtype=np.float64)
    for i, bits in enumerate(basis.configs):
        for new_bits, sign, _df, _dm, _l in tables.hop_moves(bits):
            j = basis.index.get(new_bits)
            if j is not None:
                h[i, j] += -c.kappa * sign
        for new_bits, _p in tables.plaquette_moves(bits):
            j = basis.index.get(new_bits)
            if j is not None:
                h[i, j] += -c.plaq
    if not np.array_equal(h, h.T):
        raise AssertionError("projected Hamiltonian must be exactly symmetric")
    return DenseOperator(basis=basis, matrix=h)


def project_operator(op: SparseOperator, basis: MinimalModelBasis) -> np.ndarray:
    """Literal P H P: rows/columns of a full sector operator on the manifold.

    The common diagonal is subtracted to match build_minimal_model.
    """
    sector: SectorBasis = op.basis
    idx = [sector.index(bits) for bits in basis.configs]
    dense = op.csr[np.ix_(idx, idx)].toarray()
    diag = np.diag(dense).copy()
    if not np.allclose(diag, diag[0], atol=1e-12):
        raise AssertionError("manifold members must share one diagonal energy")
    np.fill_diagonal(dense, dense.diagonal() - diag[0])
    return dense


def export_manifold(basis: MinimalModelBasis, path):
    """Text dump: one packed configuration per line with its string label."""
    with open(path, "w") as fh:
        fh.write(f"# minimal-string manifold, dimension {basis.dimension}\n")
        fh.write(f"# lattice {basis.lattice.geometry} "
                 f"{basis.lattice.extent_x}x{basis.lattice.extent_y} "
                 f"{basis.lattice.boundary}\n")
        fh.write("# columns: packed_bits_hex string_id broken_links\n")
        for (sid, broken), bits in zip(basis.labels, basis.configs):
            broken_txt = ",".join(str(l) for l in broken) if broken else "-"
            fh.write(f"{bits:#x} {sid} {broken_txt}\n")
