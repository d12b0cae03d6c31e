"""Chained-scan status counters with decoupled lookback.

Each counter is a single 32-bit word:

    bits 31-30: status  (0 = N not ready, 1 = L local count, 2 = G global
                inclusive prefix)
    bits 29-0:  value

Status and value travel in one word, so a plain aligned 32-bit load observes
a consistent (status, value) pair; no cross-word ordering is needed for
prefix correctness.  In CPython, element reads/writes on the uint32 backing
array are aligned single-word accesses and the GIL supplies the
acquire/release fencing between threads.

Per binning pass there is one counter per (digit, tile).  A tile publishes
its local per-digit counts (N -> L), resolves its exclusive prefix by walking
predecessor counters backward -- accumulating L values and stopping at the
first G -- and then publishes its inclusive prefix (L -> G).  Each counter is
written at most twice, only by its owning tile.

Termination relies on the executor contract: tiles are issued in increasing
order, and every tile publishes all its L counters before its first lookback
wait, so a predecessor showing N is always in flight and will publish.
"""

from __future__ import annotations

import threading
import time

import numpy as np

STATUS_NOT_READY = 0  # N
STATUS_LOCAL = 1  # L
STATUS_GLOBAL = 2  # G

STATUS_SHIFT = 30
VALUE_MASK = (1 << STATUS_SHIFT) - 1
MAX_COUNTER_VALUE = VALUE_MASK

_POLLS_BEFORE_BACKOFF = 32
_BACKOFF_SLEEP_S = 100e-6


class LookbackAborted(RuntimeError):
    """Raised by a waiting lookback when the pass has been aborted."""


def pack_counter(status: int, value: int) -> int:
    """Pack (status, value) into one 32-bit counter word."""
    if status not in (STATUS_NOT_READY, STATUS_LOCAL, STATUS_GLOBAL):
        raise ValueError(f"invalid status {status}")
    if not 0 <= value <= MAX_COUNTER_VALUE:
        raise ValueError(f"counter value {value} does not fit in 30 bits")
    return (status << STATUS_SHIFT) | value


def unpack_counter(word: int) -> tuple[int, int]:
    """Exact inverse of pack_counter."""
    return (word >> STATUS_SHIFT) & 0x3, word & VALUE_MASK


class CounterMatrix:
    """radix x tiles status counters for one binning pass.

    Stored as a (tiles, radix) uint32 array so one tile's counters are
    contiguous.  All counters start as zero words (status N, value 0).
    """

    def __init__(
        self,
        tiles: int,
        radix: int,
        abort_event: threading.Event | None = None,
    ):
        self.tiles = tiles
        self.radix = radix
        self.words = np.zeros((tiles, radix), dtype=np.uint32)
        self.abort_event = abort_event

    def load(self, digit: int, tile: int) -> int:
        """Single-word atomic read of one counter."""
        return int(self.words[tile, digit])

    def publish_local(self, digit: int, tile: int, local_count: int) -> None:
        """N -> L transition: share this tile's local count for one digit."""
        assert self.load(digit, tile) >> STATUS_SHIFT == STATUS_NOT_READY, (
            f"double publish_local for digit {digit}, tile {tile}"
        )
        self.words[tile, digit] = pack_counter(STATUS_LOCAL, local_count)

    def publish_inclusive(self, digit: int, tile: int, inclusive: int) -> None:
        """L -> G transition: share the global inclusive prefix for one digit."""
        assert self.load(digit, tile) >> STATUS_SHIFT == STATUS_LOCAL, (
            f"publish_inclusive without prior local publish for digit {digit}, "
            f"tile {tile}"
        )
        self.words[tile, digit] = pack_counter(STATUS_GLOBAL, inclusive)

    def lookback_exclusive(self, digit: int, tile: int) -> int:
        """Exclusive prefix of one digit's per-tile counts over tiles < tile.

        Walks predecessors one counter per read: waits while a predecessor
        shows N, accumulates L values, and stops after adding the first G
        value (which already folds in everything before it).  Tile 0 returns
        0 without reading.
        """
        total = 0
        polls = 0
        j = tile - 1
        while j >= 0:
            status, value = unpack_counter(self.load(digit, j))
            if status == STATUS_NOT_READY:
                polls += 1
                self._wait(polls)
                continue
            total += value
            if status == STATUS_GLOBAL:
                break
            j -= 1
        return total

    # Row variants: same protocol run for all radix digits of one tile at
    # once.  The per-digit read sequences are interleaved but unchanged, so
    # the result is identical to radix independent lookback_exclusive calls.

    def publish_local_row(self, tile: int, local_counts: np.ndarray) -> None:
        """publish_local for every digit of one tile (one store per counter)."""
        if local_counts.max(initial=0) > MAX_COUNTER_VALUE:
            raise ValueError("local count does not fit in 30 bits")
        words = local_counts.astype(np.uint32)
        words |= np.uint32(STATUS_LOCAL << STATUS_SHIFT)
        assert not self.words[tile].any(), f"double publish_local_row for tile {tile}"
        self.words[tile, :] = words

    def publish_inclusive_row(self, tile: int, inclusive: np.ndarray) -> None:
        """publish_inclusive for every digit of one tile."""
        if inclusive.max(initial=0) > MAX_COUNTER_VALUE:
            raise ValueError("inclusive prefix does not fit in 30 bits")
        words = inclusive.astype(np.uint32)
        words |= np.uint32(STATUS_GLOBAL << STATUS_SHIFT)
        self.words[tile, :] = words

    def lookback_exclusive_row(self, tile: int) -> tuple[np.ndarray, int]:
        """lookback_exclusive for all digits of one tile.

        Returns (exclusive prefix per digit as int64, counter words read).
        """
        total = np.zeros(self.radix, dtype=np.int64)
        if tile == 0:
            return total, 0
        active = np.arange(self.radix)
        reads = 0
        polls = 0
        j = tile - 1
        while j >= 0 and active.size:
            row = self.words[j]
            while True:
                words = row[active]
                reads += active.size
                status = words >> np.uint32(STATUS_SHIFT)
                if (status != STATUS_NOT_READY).all():
                    break
                polls += 1
                self._wait(polls)
            total[active] += (words & np.uint32(VALUE_MASK)).astype(np.int64)
            active = active[status == STATUS_LOCAL]
            j -= 1
        return total, reads

    def final_inclusive(self, digit: int | None = None) -> np.ndarray | int:
        """Inclusive prefixes after a completed pass (last-tile column or one digit)."""
        if digit is None:
            return (self.words[self.tiles - 1] & np.uint32(VALUE_MASK)).astype(np.int64)
        return self.load(digit, self.tiles - 1) & VALUE_MASK

    def _wait(self, polls: int) -> None:
        # Yield between polls (a busy-wait would hold the GIL and starve the
        # predecessor this counter is waiting on); long waits back off to a
        # short sleep so compute threads keep the cores.
        self._check_abort()
        if polls < _POLLS_BEFORE_BACKOFF:
            time.sleep(0)
        else:
            time.sleep(_BACKOFF_SLEEP_S)

    def _check_abort(self) -> None:
        if self.abort_event is not None and self.abort_event.is_set():
            raise LookbackAborted("binning pass aborted while waiting on a predecessor")
