import numpy as np
import pytest

from stringdyn.lattice import (
    CHAIN,
    CYLINDER,
    HEXAGONAL,
    OPEN,
    SQUARE,
    Lattice,
    LatticeError,
    LatticeSpec,
    build_lattice,
    chain_lattice,
    hop_sign,
    manhattan_distance,
    plaquette_cycle,
    staggering,
)


def grid_counts(geometry, lx, ly, boundary):
    """Independent counting oracle: enumerate coordinates directly."""
    cylinder = boundary == CYLINDER
    sites = [(x, y) for y in range(ly) for x in range(lx)]
    x_links = [(x, y) for (x, y) in sites if x < lx - 1]
    y_links = []
    for (x, y) in sites:
        if geometry == HEXAGONAL and (x + y) % 2:
            continue
        if y < ly - 1 or cylinder:
            y_links.append((x, y))
    plaqs = []
    for (x, y) in sites:
        if y >= ly - 1 and not cylinder:
            continue
        if geometry == SQUARE and x < lx - 1:
            plaqs.append((x, y))
        if geometry == HEXAGONAL and (x + y) % 2 == 0 and x < lx - 2:
            plaqs.append((x, y))
    return len(sites), len(x_links) + len(y_links), len(plaqs)


def test_square_cylinder_counts():
    lat = build_lattice(LatticeSpec(SQUARE, 7, 6, CYLINDER))
    n_x = int(np.sum(lat.link_axis == 0))
    n_y = int(np.sum(lat.link_axis == 1))
    assert (lat.n_sites, lat.n_links, lat.n_plaquettes) == grid_counts(SQUARE, 7, 6, CYLINDER)
    assert (lat.n_sites, lat.n_links, lat.n_plaquettes) == (42, 78, 36)
    assert (n_x, n_y) == (36, 42)


def test_square_open_2x2():
    lat = build_lattice(LatticeSpec(SQUARE, 2, 2, OPEN))
    assert (lat.n_sites, lat.n_links, lat.n_plaquettes) == (4, 4, 1)


def test_hexagon_patch():
    lat = build_lattice(LatticeSpec(HEXAGONAL, 3, 2, OPEN))
    assert (lat.n_sites, lat.n_links, lat.n_plaquettes) == (6, 6, 1)


@pytest.mark.parametrize(
    "geometry,lx,ly,boundary",
    [
        (SQUARE, 4, 4, CYLINDER),
        (SQUARE, 5, 3, OPEN),
        (HEXAGONAL, 6, 4, CYLINDER),
        (HEXAGONAL, 5, 3, OPEN),
    ],
)
def test_counts_match_oracle(geometry, lx, ly, boundary):
    lat = build_lattice(LatticeSpec(geometry, lx, ly, boundary))
    assert (lat.n_sites, lat.n_links, lat.n_plaquettes) == grid_counts(geometry, lx, ly, boundary)


def test_rejected_specs():
    with pytest.raises(LatticeError):
        build_lattice(LatticeSpec(SQUARE, 1, 4, OPEN))
    with pytest.raises(LatticeError):
        build_lattice(LatticeSpec(SQUARE, 4, 1, OPEN))
    with pytest.raises(LatticeError):
        build_lattice(LatticeSpec(HEXAGONAL, 6, 3, CYLINDER))
    with pytest.raises(LatticeError):
        build_lattice(LatticeSpec(SQUARE, 4, 3, CYLINDER))
    with pytest.raises(LatticeError):
        build_lattice(LatticeSpec("triangular", 4, 4, OPEN))


def test_staggering_signs():
    lat = build_lattice(LatticeSpec(SQUARE, 7, 6, CYLINDER))
    assert staggering(lat, lat.site_id(0, 0)) == 1
    assert staggering(lat, lat.site_id(1, 0)) == -1
    assert staggering(lat, lat.site_id(1, 1)) == 1
    # y-link leaving (1, 0) carries (-1)^{j_x} = -1; x-links all +1
    y_link = lat.link_id(lat.site_id(1, 0), 1)
    assert hop_sign(lat, y_link) == -1
    x_link = lat.link_id(lat.site_id(1, 0), 0)
    assert hop_sign(lat, x_link) == 1
    y_link0 = lat.link_id(lat.site_id(0, 0), 1)
    assert hop_sign(lat, y_link0) == 1


def test_bipartite_mass_signs():
    for spec in [
        LatticeSpec(SQUARE, 7, 6, CYLINDER),
        LatticeSpec(HEXAGONAL, 6, 4, CYLINDER),
        LatticeSpec(HEXAGONAL, 5, 3, OPEN),
    ]:
        lat = build_lattice(spec)
        prod = lat.mass_sign[lat.link_tail] * lat.mass_sign[lat.link_head]
        assert np.all(prod == -1)


def test_manhattan_distance():
    lat = build_lattice(LatticeSpec(SQUARE, 7, 6, CYLINDER))
    a = lat.site_id(0, 0)
    assert manhattan_distance(lat, a, lat.site_id(4, 3)) == 7
    assert manhattan_distance(lat, a, a) == 0
    # cylinder wrap shortens vertical separation
    assert manhattan_distance(lat, a, lat.site_id(0, 5)) == 1

    hexlat = build_lattice(LatticeSpec(HEXAGONAL, 6, 6, CYLINDER))
    pair = hexlat.link_tail[0], hexlat.link_head[0]
    assert manhattan_distance(hexlat, pair[0], pair[1]) == 1
    # brick-wall detour: (1,0) -> (2,2) has no length-3 path
    assert manhattan_distance(hexlat, hexlat.site_id(1, 0), hexlat.site_id(2, 2)) == 5


def test_plaquette_cycles():
    lat = build_lattice(LatticeSpec(SQUARE, 3, 3, OPEN))
    cyc = plaquette_cycle(lat, 0)
    assert len(cyc) == 4
    assert [s for (_, s) in cyc] == [1, 1, -1, -1]
    assert len({l for (l, _) in cyc}) == 4

    hexlat = build_lattice(LatticeSpec(HEXAGONAL, 3, 2, OPEN))
    cyc = plaquette_cycle(hexlat, 0)
    assert len(cyc) == 6
    assert [s for (_, s) in cyc] == [1, 1, 1, -1, -1, -1]
    assert len({l for (l, _) in cyc}) == 6


def test_plaquette_link_incidence():
    for spec in [
        LatticeSpec(SQUARE, 7, 6, CYLINDER),
        LatticeSpec(SQUARE, 4, 3, OPEN),
        LatticeSpec(HEXAGONAL, 6, 4, CYLINDER),
    ]:
        lat = build_lattice(spec)
        incidence = np.zeros(lat.n_links, dtype=int)
        for p in range(lat.n_plaquettes):
            for l, _ in plaquette_cycle(lat, p):
                incidence[l] += 1
        assert incidence.max() <= 2
        interior = int(np.sum(incidence == 2))
        boundary = int(np.sum(incidence == 1))
        assert incidence.sum() == 2 * interior + boundary


def test_cylinder_connectivity():
    for spec in [
        LatticeSpec(SQUARE, 5, 4, CYLINDER),
        LatticeSpec(HEXAGONAL, 6, 4, CYLINDER),
    ]:
        lat = build_lattice(spec)
        # every site reachable from site 0
        for s in range(lat.n_sites):
            manhattan_distance(lat, 0, s)
        # every site has a y-neighbor
        for s in range(lat.n_sites):
            axes = {lat.link_axis[l] for l, _ in lat.incident_links(s)}
            assert 1 in axes


def test_chain_lattice():
    lat = chain_lattice(8)
    assert lat.geometry == CHAIN
    assert lat.n_sites == 8
    assert lat.n_links == 7
    assert lat.n_plaquettes == 0
    # left end sits on an odd-parity site
    assert lat.parity[0] == -1
    assert np.all(lat.hop_sign == 1)
    with pytest.raises(LatticeError):
        chain_lattice(1)


def test_deterministic_indexing():
    a = build_lattice(LatticeSpec(SQUARE, 5, 4, CYLINDER))
    b = build_lattice(LatticeSpec(SQUARE, 5, 4, CYLINDER))
    assert np.array_equal(a.coords, b.coords)
    assert np.array_equal(a.link_tail, b.link_tail)
    assert np.array_equal(a.link_head, b.link_head)
    # row-major sites, x-link listed before y-link per site
    assert a.site_id(0, 0) == 0 and a.site_id(1, 0) == 1
    first_two = [(int(a.link_tail[l]), int(a.link_axis[l])) for l in (0, 1)]
    assert first_two == [(0, 0), (0, 1)]
