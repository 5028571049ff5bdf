#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times the brute-force Gauss filter and the Hamiltonian assembly loops on
mid-size sectors.  The numba path is warmed up once so compilation is not
counted.  Select the fallback globally with STRINGDYN_NO_NUMBA=1; this
script times both paths explicitly.

Usage: python benchmarks/bench_kernels.py
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from stringdyn import kernels
from stringdyn.gauge import ChargeLayout, U1_QLM, Z2, enumerate_sector, _constraint_tables
from stringdyn.lattice import LatticeSpec, OPEN, SQUARE, build_lattice
from stringdyn.models import _plaq_masks


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_gauss_filter():
    lat = build_lattice(LatticeSpec(SQUARE, 4, 2, OPEN))
    layout = ChargeLayout.string_pair(lat, lat.site_id(1, 0), lat.site_id(3, 1))
    n_bits = lat.n_sites + lat.n_links
    ptr, bits, coeffs, rhs = _constraint_tables(lat, layout)

    kernels.gauss_filter(n_bits, ptr, bits, coeffs, rhs, force="numba")  # warmup
    t_nb = timeit(lambda: kernels.gauss_filter(n_bits, ptr, bits, coeffs, rhs, force="numba"))
    t_np = timeit(lambda: kernels.gauss_filter(n_bits, ptr, bits, coeffs, rhs, force="numpy"))
    return f"gauss filter 2^{n_bits}", t_nb, t_np


def bench_u1_assembly():
    lat = build_lattice(LatticeSpec(SQUARE, 4, 4, OPEN))
    layout = ChargeLayout.string_pair(lat, lat.site_id(1, 0), lat.site_id(3, 3))
    basis = enumerate_sector(lat, layout, U1_QLM)
    amps = (-1.0 * lat.hop_sign).astype(np.float64)
    praise, plower = _plaq_masks(lat)

    def run(force):
        return kernels.assemble_u1(
            basis.configs, lat.n_sites, lat.link_tail, lat.link_head,
            amps, praise, plower, -1.0, force=force,
        )

    run("numba")  # warmup
    t_nb = timeit(lambda: run("numba"))
    t_np = timeit(lambda: run("numpy"))
    return f"u1 assembly {basis.dimension} configs", t_nb, t_np


def bench_z2_assembly():
    lat = build_lattice(LatticeSpec(SQUARE, 3, 4, OPEN))
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

    def run(force):
        return kernels.assemble_z2(basis.configs, link_masks, plaq_masks, 1.0, 0.5, force=force)

    run("numba")  # warmup
    t_nb = timeit(lambda: run("numba"))
    t_np = timeit(lambda: run("numpy"))
    return f"z2 assembly {basis.dimension} configs", t_nb, t_np


def main():
    if not kernels.NUMBA_AVAILABLE:
        print("numba unavailable; nothing to compare")
        return
    rows = [bench_gauss_filter(), bench_u1_assembly(), bench_z2_assembly()]
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, t_nb, t_np in rows:
        print(f"{name:<{width}}  {t_nb * 1e3:>8.1f}ms  {t_np * 1e3:>8.1f}ms  {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
