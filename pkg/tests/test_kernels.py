"""The numba and numpy kernel paths must produce identical operators."""

import numpy as np
import pytest
import scipy.sparse as sp

from stringdyn import kernels
from stringdyn.gauge import (
    ChargeLayout,
    U1_QLM,
    Z2,
    brute_force_sector,
    enumerate_sector,
)
from stringdyn.lattice import HEXAGONAL, LatticeSpec, OPEN, SQUARE, build_lattice
from stringdyn.models import _plaq_masks


def charged_square():
    lat = build_lattice(LatticeSpec(SQUARE, 4, 2, OPEN))
    layout = ChargeLayout.string_pair(lat, lat.site_id(1, 0), lat.site_id(3, 1))
    return lat, layout


def test_env_flag_dispatch(monkeypatch):
    monkeypatch.delenv("STRINGDYN_NO_NUMBA", raising=False)
    assert kernels.use_numba() == kernels.NUMBA_AVAILABLE
    monkeypatch.setenv("STRINGDYN_NO_NUMBA", "1")
    assert not kernels.use_numba()


@pytest.mark.parametrize("spec,charges", [
    (LatticeSpec(SQUARE, 4, 2, OPEN), ((1, 0), (3, 1))),
    (LatticeSpec(HEXAGONAL, 3, 2, OPEN), ((1, 0), (2, 0))),
])
def test_gauss_filter_paths_agree(spec, charges):
    lat = build_lattice(spec)
    layout = ChargeLayout.string_pair(
        lat, lat.site_id(*charges[0]), lat.site_id(*charges[1])
    )
    a = brute_force_sector(lat, layout, force="numba")
    b = brute_force_sector(lat, layout, force="numpy")
    assert np.array_equal(a, b)


def test_assemble_u1_paths_agree():
    lat, layout = charged_square()
    basis = enumerate_sector(lat, layout, U1_QLM)
    amps = (-1.0 * lat.hop_sign).astype(np.float64)
    praise, plower = _plaq_masks(lat)
    results = {}
    for force in ("numba", "numpy"):
        rows, cols, vals, misses = kernels.assemble_u1(
            basis.configs, lat.n_sites, lat.link_tail, lat.link_head,
            amps, praise, plower, -1.5, force=force,
        )
        assert misses == 0
        n = basis.dimension
        results[force] = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    delta = results["numba"] - results["numpy"]
    assert delta.nnz == 0


def test_assemble_z2_paths_agree():
    lat = build_lattice(LatticeSpec(SQUARE, 3, 3, OPEN))
    basis = enumerate_sector(lat, ChargeLayout.neutral(), Z2)
    shift = lat.n_sites
    link_masks = np.array(
        [np.uint64(1) << np.uint64(shift + l) for l in range(lat.n_links)],
        dtype=np.uint64,
    )
    plaq_masks = []
    for p in range(lat.n_plaquettes):
        m = np.uint64(0)
        for link in lat.plaq_links[p]:
            m |= np.uint64(1) << np.uint64(shift + int(link))
        plaq_masks.append(m)
    plaq_masks = np.array(plaq_masks, dtype=np.uint64)
    results = {}
    for force in ("numba", "numpy"):
        rows, cols, vals, misses = kernels.assemble_z2(
            basis.configs, link_masks, plaq_masks, 1.0, 0.5, force=force
        )
        assert misses == 0
        n = basis.dimension
        results[force] = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    assert (results["numba"] - results["numpy"]).nnz == 0


def test_miss_detection():
    lat, layout = charged_square()
    basis = enumerate_sector(lat, layout, U1_QLM)
    # drop one config: hops into it must be reported as misses on both paths
    truncated = basis.configs[:-1]
    amps = (-1.0 * lat.hop_sign).astype(np.float64)
    praise, plower = _plaq_masks(lat)
    missed = []
    for force in ("numba", "numpy"):
        *_, misses = kernels.assemble_u1(
            truncated, lat.n_sites, lat.link_tail, lat.link_head,
            amps, praise, plower, 0.0, force=force,
        )
        missed.append(misses)
    assert missed[0] == missed[1] > 0


def test_popcount():
    arr = np.array([0, 1, 3, 255, (1 << 63) | 7], dtype=np.uint64)
    assert kernels.popcount(arr).tolist() == [0, 1, 2, 8, 4]


def test_gauss_filter_width_guard():
    ptr = np.array([0, 1], dtype=np.int64)
    with pytest.raises(ValueError):
        kernels.gauss_filter(
            40, ptr, np.array([0], dtype=np.int64),
            np.array([1], dtype=np.int64), np.array([0], dtype=np.int64),
        )
