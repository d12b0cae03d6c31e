"""Upfront digit histograms for all places, and their exclusive sums.

Digit populations per place are invariant under the stable permutations the
sort applies, so every pass's histogram can be computed from the unsorted
input in one read of each element.  Workers privatize a (passes, radix)
table of 32-bit counters, consume their contiguous index range in portions
small enough that the 32-bit counters cannot overflow, and flush each
portion into the shared 64-bit table under a lock (the CPython stand-in for
an atomic add), then zero the private table.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .executor import Executor
from .keycodec import RadixConfig


@dataclass(frozen=True)
class GlobalHistogram:
    """(passes, radix) table of 64-bit digit counts, one row per digit place."""

    counts: np.ndarray

    @property
    def passes(self) -> int:
        return self.counts.shape[0]

    @property
    def radix(self) -> int:
        return self.counts.shape[1]


@dataclass(frozen=True)
class GlobalBinOffsets:
    """(passes, radix) table of exclusive prefix sums of GlobalHistogram rows."""

    offsets: np.ndarray

    def row(self, place: int) -> np.ndarray:
        return self.offsets[place]


def exclusive_sum(counts: np.ndarray) -> np.ndarray:
    """Exclusive prefix sum: out[0] = 0, out[i] = out[i-1] + in[i-1]."""
    counts = np.asarray(counts)
    out = np.zeros(counts.shape, dtype=np.uint64)
    np.cumsum(counts[:-1], dtype=np.uint64, out=out[1:])
    return out


def global_histograms(
    encoded: np.ndarray, cfg: RadixConfig, executor: Executor
) -> GlobalHistogram:
    """Exact digit counts for every place, reading each element once.

    Runs on the executor's worker pool with one contiguous index range per
    worker; the merged result is identical for any worker count.
    """
    shared = np.zeros((cfg.passes, cfg.radix), dtype=np.uint64)
    n = encoded.size
    if n == 0:
        return GlobalHistogram(shared)

    workers = executor.workers
    flush_lock = threading.Lock()

    def count_range(worker: int) -> None:
        lo = worker * n // workers
        hi = (worker + 1) * n // workers
        if lo >= hi:
            return
        private = np.zeros((cfg.passes, cfg.radix), dtype=np.uint32)
        for start in range(lo, hi, cfg.portion_size):
            stop = min(start + cfg.portion_size, hi)
            # One read per element; all digit places decode from that read.
            kernels.histogram_kernel(
                encoded[start:stop], cfg.digit_bits, cfg.passes, private
            )
            executor.ledger_record("histogram", "element_reads", stop - start)
            with flush_lock:
                np.add(shared, private, out=shared)
            private[:] = 0

    executor.run_blocks(workers, count_range)
    return GlobalHistogram(shared)


def global_bin_offsets(hist: GlobalHistogram) -> GlobalBinOffsets:
    """Per-place exclusive sums of the global histogram (passes x radix work)."""
    offsets = np.zeros_like(hist.counts)
    for place in range(hist.passes):
        offsets[place] = exclusive_sum(hist.counts[place])
    return GlobalBinOffsets(offsets)
