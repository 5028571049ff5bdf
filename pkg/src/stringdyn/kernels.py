"""Hot inner loops: brute-force Gauss filtering and Hamiltonian assembly.

Every kernel has two interchangeable implementations: a numba @njit loop
and a vectorized pure-numpy path.  Dispatch is controlled by the
STRINGDYN_NO_NUMBA environment variable (any non-empty value selects
numpy) and falls back to numpy automatically when numba is missing.
Both paths produce bit-identical outputs; `benchmarks/bench_kernels.py`
compares their throughput.

Configurations are packed into single uint64 words: bit j is the matter
occupation of site j, bit n_sites + l the canonical-frame value of link
l.  All kernels assume the packed width fits in 63 bits.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


U1 = np.uint64(1)


def use_numba() -> bool:
    if os.environ.get("STRINGDYN_NO_NUMBA"):
        return False
    return NUMBA_AVAILABLE


def popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr).astype(np.int64)


# ---------------------------------------------------------------------------
# brute-force Gauss filter
#
# A site constraint is sum_k coeff_k * bit(term_bit_k) == rhs, stored in CSR
# layout over sites.  Used as the exhaustive oracle and cross-check for the
# constraint-propagation enumerator.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _gauss_filter_numba(n_bits, term_ptr, term_bits, term_coeffs, rhs):
    total = 1 << n_bits
    n_sites = rhs.size
    count = 0
    for raw in range(total):
        ok = True
        for s in range(n_sites):
            acc = 0
            for k in range(term_ptr[s], term_ptr[s + 1]):
                acc += term_coeffs[k] * ((raw >> term_bits[k]) & 1)
            if acc != rhs[s]:
                ok = False
                break
        if ok:
            count += 1
    out = np.empty(count, dtype=np.uint64)
    idx = 0
    for raw in range(total):
        ok = True
        for s in range(n_sites):
            acc = 0
            for k in range(term_ptr[s], term_ptr[s + 1]):
                acc += term_coeffs[k] * ((raw >> term_bits[k]) & 1)
            if acc != rhs[s]:
                ok = False
                break
        if ok:
            out[idx] = raw
            idx += 1
    return out


def _gauss_filter_numpy(n_bits, term_ptr, term_bits, term_coeffs, rhs):
    raw = np.arange(1 << n_bits, dtype=np.uint64)
    ok = np.ones(raw.size, dtype=bool)
    for s in range(rhs.size):
        acc = np.zeros(raw.size, dtype=np.int64)
        for k in range(term_ptr[s], term_ptr[s + 1]):
            acc += term_coeffs[k] * ((raw >> np.uint64(term_bits[k])) & U1).astype(np.int64)
        ok &= acc == rhs[s]
    return raw[ok]


def gauss_filter(n_bits, term_ptr, term_bits, term_coeffs, rhs, force=None):
    if n_bits > 26:
        raise ValueError(f"brute-force filter limited to 26 bits, got {n_bits}")
    pick = use_numba() if force is None else force == "numba"
    if pick:
        return _gauss_filter_numba(
            n_bits,
            term_ptr.astype(np.int64),
            term_bits.astype(np.int64),
            term_coeffs.astype(np.int64),
            rhs.astype(np.int64),
        )
    return _gauss_filter_numpy(n_bits, term_ptr, term_bits, term_coeffs, rhs)


# ---------------------------------------------------------------------------
# U(1) QLM assembly
#
# Hopping on link l (canonical tail a -> head b): either the link is down
# and a boson moves b -> a while raising it, or the link is up and a boson
# moves a -> b while lowering it.  Both carry amplitude -kappa * hop_sign.
# A plaquette flips when its raise-mask links are all down and lower-mask
# links all up, or vice versa, with amplitude -J.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _search_u64(arr, value):
    lo = 0
    hi = arr.size
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    if lo < arr.size and arr[lo] == value:
        return lo
    return -1


@njit(cache=True)
def _assemble_u1_numba(configs, link_bits, tail_bits, head_bits, amps,
                       praise, plower, plaq_amp):
    n = configs.size
    n_links = link_bits.size
    n_plaq = praise.size
    zero = np.uint64(0)
    hop_xor = np.empty(n_links, dtype=np.uint64)
    for l in range(n_links):
        hop_xor[l] = link_bits[l] | tail_bits[l] | head_bits[l]
    plaq_xor = np.empty(n_plaq, dtype=np.uint64)
    for p in range(n_plaq):
        plaq_xor[p] = praise[p] | plower[p]
    cap = n * (n_links + 2 * n_plaq)
    rows = np.empty(cap, dtype=np.int64)
    cols = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap, dtype=np.float64)
    k = 0
    misses = 0
    for i in range(n):
        c = configs[i]
        for l in range(n_links):
            if (c & link_bits[l]) == zero:
                hit = (c & head_bits[l]) != zero and (c & tail_bits[l]) == zero
            else:
                hit = (c & tail_bits[l]) != zero and (c & head_bits[l]) == zero
            if hit:
                j = _search_u64(configs, c ^ hop_xor[l])
                if j < 0:
                    misses += 1
                else:
                    rows[k] = i
                    cols[k] = j
                    vals[k] = amps[l]
                    k += 1
        for p in range(n_plaq):
            rm = praise[p]
            lm = plower[p]
            if ((c & rm) == zero and (c & lm) == lm) or (
                (c & rm) == rm and (c & lm) == zero
            ):
                j = _search_u64(configs, c ^ plaq_xor[p])
                if j < 0:
                    misses += 1
                else:
                    rows[k] = i
                    cols[k] = j
                    vals[k] = plaq_amp
                    k += 1
    return rows[:k], cols[:k], vals[:k], misses


def _assemble_u1_numpy(configs, link_bits, tail_bits, head_bits, amps,
                       praise, plower, plaq_amp):
    rows, cols, vals = [], [], []
    misses = 0
    for l in range(link_bits.size):
        bl = link_bits[l]
        ma = tail_bits[l]
        mb = head_bits[l]
        up = (configs & bl) != 0
        occ_a = (configs & ma) != 0
        occ_b = (configs & mb) != 0
        cond = (~up & occ_b & ~occ_a) | (up & occ_a & ~occ_b)
        idx = np.nonzero(cond)[0]
        if idx.size == 0:
            continue
        targets = configs[idx] ^ (bl | ma | mb)
        j = np.searchsorted(configs, targets)
        found = (j < configs.size) & (configs[np.minimum(j, configs.size - 1)] == targets)
        misses += int(np.sum(~found))
        idx, j = idx[found], j[found]
        rows.append(idx)
        cols.append(j)
        vals.append(np.full(idx.size, amps[l]))
    for p in range(praise.size):
        rm, lm = praise[p], plower[p]
        cond = (((configs & rm) == 0) & ((configs & lm) == lm)) | (
            ((configs & rm) == rm) & ((configs & lm) == 0)
        )
        idx = np.nonzero(cond)[0]
        if idx.size == 0:
            continue
        targets = configs[idx] ^ (rm | lm)
        j = np.searchsorted(configs, targets)
        found = (j < configs.size) & (configs[np.minimum(j, configs.size - 1)] == targets)
        misses += int(np.sum(~found))
        idx, j = idx[found], j[found]
        rows.append(idx)
        cols.append(j)
        vals.append(np.full(idx.size, plaq_amp))
    if rows:
        order_rows = np.concatenate(rows)
        order_cols = np.concatenate(cols)
        order_vals = np.concatenate(vals)
    else:
        order_rows = np.empty(0, dtype=np.int64)
        order_cols = np.empty(0, dtype=np.int64)
        order_vals = np.empty(0, dtype=np.float64)
    return order_rows, order_cols, order_vals, misses


def assemble_u1(configs, n_sites, tails, heads, amps, praise, plower, plaq_amp, force=None):
    pick = use_numba() if force is None else force == "numba"
    fn = _assemble_u1_numba if pick else _assemble_u1_numpy
    link_bits = (U1 << (np.uint64(n_sites) + np.arange(tails.size, dtype=np.uint64)))
    tail_bits = U1 << tails.astype(np.uint64)
    head_bits = U1 << heads.astype(np.uint64)
    return fn(
        configs,
        link_bits,
        tail_bits,
        head_bits,
        amps.astype(np.float64),
        praise.astype(np.uint64),
        plower.astype(np.uint64),
        float(plaq_amp),
    )


# ---------------------------------------------------------------------------
# Z2 assembly: single-link flips (kappa term) and unconditional plaquette
# flips (J term); everything else is diagonal in the sigma^x basis.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _assemble_z2_numba(configs, link_masks, plaq_masks, kappa, J, shift):
    n = configs.size
    cap = n * (link_masks.size + plaq_masks.size)
    rows = np.empty(cap, dtype=np.int64)
    cols = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap, dtype=np.float64)
    k = 0
    misses = 0
    for i in range(n):
        c = configs[i]
        for l in range(link_masks.size):
            t = c ^ link_masks[l]
            j = np.int64(t >> np.uint64(shift)) if shift >= 0 else _search_u64(configs, t)
            if j < 0:
                misses += 1
            else:
                rows[k] = i
                cols[k] = j
                vals[k] = -kappa
                k += 1
        for p in range(plaq_masks.size):
            t = c ^ plaq_masks[p]
            j = np.int64(t >> np.uint64(shift)) if shift >= 0 else _search_u64(configs, t)
            if j < 0:
                misses += 1
            else:
                rows[k] = i
                cols[k] = j
                vals[k] = -J
                k += 1
    return rows[:k], cols[:k], vals[:k], misses


def _assemble_z2_numpy(configs, link_masks, plaq_masks, kappa, J, shift):
    rows, cols, vals = [], [], []
    misses = 0
    for masks, amp in ((link_masks, -kappa), (plaq_masks, -J)):
        for mask in masks:
            targets = configs ^ mask
            if shift >= 0:
                j = (targets >> np.uint64(shift)).astype(np.int64)
                found = np.ones(j.size, dtype=bool)
            else:
                j = np.searchsorted(configs, targets)
                found = (j < configs.size) & (
                    configs[np.minimum(j, configs.size - 1)] == targets
                )
                misses += int(np.sum(~found))
            idx = np.nonzero(found)[0]
            rows.append(idx)
            cols.append(j[found])
            vals.append(np.full(idx.size, amp))
    if rows:
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), misses
    return (
        np.empty(0, dtype=np.int64),
        np.empty(0, dtype=np.int64),
        np.empty(0, dtype=np.float64),
        misses,
    )


def _full_space_shift(configs) -> int:
    """Bit shift mapping configs to 0..n-1 when they form the full link
    space (uniform power-of-two stride), else -1."""
    n = configs.size
    if n < 2 or int(configs[0]) != 0:
        return -1
    step = int(configs[1])
    if step <= 0 or step & (step - 1):
        return -1
    shift = step.bit_length() - 1
    expected = np.arange(n, dtype=np.uint64) << np.uint64(shift)
    return shift if np.array_equal(configs, expected) else -1


def assemble_z2(configs, link_masks, plaq_masks, kappa, J, force=None):
    pick = use_numba() if force is None else force == "numba"
    fn = _assemble_z2_numba if pick else _assemble_z2_numpy
    return fn(
        configs,
        link_masks.astype(np.uint64),
        plaq_masks.astype(np.uint64),
        float(kappa),
        float(J),
        _full_space_shift(configs),
    )
