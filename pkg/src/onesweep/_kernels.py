"""JIT-compiled per-tile loops.

These kernels release the GIL, so worker threads binning different tiles
overlap for real instead of convoying on the interpreter lock.  They are the
only place the hot loops live; the public wrappers in binning/histogram add
no logic of their own.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U1 = np.uint32(1)
_ALL_LANES = np.uint32(0xFFFFFFFF)


@njit(nogil=True, cache=True, inline="always")
def _popcount32(x):
    # 64-bit SWAR: numba promotes narrow ints to 64-bit arithmetic, so wrap
    # tricks on 32-bit constants are unsafe; in 64 bits nothing overflows.
    v = np.uint64(x)
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + (
        (v >> np.uint64(2)) & np.uint64(0x3333333333333333)
    )
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (v * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(nogil=True, cache=True)
def rank_tile_kernel(digits, digit_bits, ranks, digit_counts):
    """Stable tile-wide multi-split ranking.

    Walks the tile in 32-lane batches.  Per batch: one 32-bit ballot mask per
    digit bit (lane l set iff bit b of its digit is set); each lane ANDs the
    ballot (bit set) or its complement (bit clear) across all digit bits to
    obtain the mask of same-digit lanes.  Rank within the batch is the
    population count of lower lanes in that mask; the lowest lane of each
    digit population folds the population size into the running per-digit
    totals that seed the next batch.

    digits must be < 2**digit_bits; ranks and digit_counts are outputs
    (length n and radix).
    """
    n = digits.shape[0]
    radix = digit_counts.shape[0]
    for d in range(radix):
        digit_counts[d] = 0
    votes = np.empty(16, dtype=np.uint32)
    add_digit = np.empty(32, dtype=np.int64)
    add_count = np.empty(32, dtype=np.int64)

    for start in range(0, n, 32):
        width = min(32, n - start)
        for b in range(digit_bits):
            votes[b] = np.uint32(0)
        for lane in range(width):
            d = digits[start + lane]
            lane_bit = _U1 << np.uint32(lane)
            for b in range(digit_bits):
                if (d >> b) & 1:
                    votes[b] |= lane_bit
        n_adds = 0
        full = _ALL_LANES if width == 32 else (_U1 << np.uint32(width)) - _U1
        for lane in range(width):
            d = digits[start + lane]
            peers = full
            for b in range(digit_bits):
                if (d >> b) & 1:
                    peers &= votes[b]
                else:
                    peers &= ~votes[b]
            below = peers & ((_U1 << np.uint32(lane)) - _U1)
            in_batch = np.int64(_popcount32(below))
            ranks[start + lane] = digit_counts[d] + in_batch
            if in_batch == 0:
                add_digit[n_adds] = d
                add_count[n_adds] = np.int64(_popcount32(peers))
                n_adds += 1
        for i in range(n_adds):
            digit_counts[add_digit[i]] += add_count[i]


@njit(nogil=True, cache=True)
def scatter_tile_kernel(src, digits, ranks, digit_counts, dest_starts, out, slots):
    """Local reorder then per-digit run writes.

    Stage index = tile-local digit start + rank; each staged digit run then
    lands contiguously at dest_starts[digit].  slots receives the staging
    permutation so payload arrays can be moved the same way.
    """
    n = src.shape[0]
    radix = digit_counts.shape[0]
    local = np.empty(radix, dtype=np.int64)
    total = np.int64(0)
    for d in range(radix):
        local[d] = total
        total += digit_counts[d]
    staged = np.empty_like(src)
    for i in range(n):
        slot = local[digits[i]] + ranks[i]
        slots[i] = slot
        staged[slot] = src[i]
    pos = np.int64(0)
    for d in range(radix):
        dst = dest_starts[d]
        cnt = digit_counts[d]
        for k in range(cnt):
            out[dst + k] = staged[pos + k]
        pos += cnt


@njit(nogil=True, cache=True)
def scatter_slots_kernel(src, slots, digit_counts, dest_starts, out):
    """Move a payload array through an already-computed staging permutation."""
    n = src.shape[0]
    radix = digit_counts.shape[0]
    staged = np.empty_like(src)
    for i in range(n):
        staged[slots[i]] = src[i]
    pos = np.int64(0)
    for d in range(radix):
        dst = dest_starts[d]
        cnt = digit_counts[d]
        for k in range(cnt):
            out[dst + k] = staged[pos + k]
        pos += cnt


@njit(nogil=True, cache=True)
def histogram_kernel(keys, digit_bits, passes, private):
    """Read each key once and count its digit at every place.

    private is the worker's (passes, radix) uint32 table; counts accumulate
    on top of whatever is already there.  All digit math stays unsigned so
    64-bit keys with the top bit set decode correctly.
    """
    mask = np.uint64((1 << digit_bits) - 1)
    width = np.uint64(digit_bits)
    for i in range(keys.shape[0]):
        k = np.uint64(keys[i])
        for p in range(passes):
            digit = (k >> (np.uint64(p) * width)) & mask
            private[p, digit] += np.uint32(1)
