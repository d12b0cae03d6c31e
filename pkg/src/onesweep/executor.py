"""Worker pool emulating thread blocks, plus memory-operation accounting.

run_blocks dispatches a tile procedure over g tiles: workers draw strictly
increasing tile indices from a shared ticket and fully complete one tile
before drawing the next.  Together with publish-before-lookback bodies this
bounds lookback waiting to in-flight tiles, which is what makes the chained
scan deadlock-free.  run_blocks returns only after every tile completed, so
it doubles as a full visibility barrier between passes.

The ledger counts *element* reads/writes per phase (an element is one key,
or one key+value record), with counter/bookkeeping traffic and buffer copies
tracked in separate columns.  Element traffic is schedule-invariant;
counter_ops is not, because lookback depth depends on how far predecessors
have progressed.
"""

from __future__ import annotations

import os
import random
import threading
import time
from dataclasses import dataclass, field, replace

from .lookback import LookbackAborted

_LEDGER_KINDS = (
    "element_reads",
    "element_writes",
    "counter_ops",
    "copy_ops",
    "fast_path_tiles",
)


@dataclass
class LedgerCounts:
    """Counters for one kernel phase.

    copy_ops counts 2 per element moved by an explicit buffer copy (one read
    plus one write); fast_path_tiles counts tiles that took the homogeneous
    short-circuit and is not a memory operation.
    """

    element_reads: int = 0
    element_writes: int = 0
    counter_ops: int = 0
    copy_ops: int = 0
    fast_path_tiles: int = 0


@dataclass(frozen=True)
class MemOpLedger:
    """Immutable snapshot of per-phase memory-operation counts."""

    phases: dict[str, LedgerCounts] = field(default_factory=dict)

    def phase(self, name: str) -> LedgerCounts:
        return self.phases.get(name, LedgerCounts())

    def _total(self, kind: str) -> int:
        return sum(getattr(counts, kind) for counts in self.phases.values())

    @property
    def element_reads(self) -> int:
        return self._total("element_reads")

    @property
    def element_writes(self) -> int:
        return self._total("element_writes")

    @property
    def counter_ops(self) -> int:
        return self._total("counter_ops")

    @property
    def copy_ops(self) -> int:
        return self._total("copy_ops")

    @property
    def fast_path_tiles(self) -> int:
        return self._total("fast_path_tiles")

    @property
    def element_ops(self) -> int:
        """Element reads + writes, excluding copies and counter traffic."""
        return self.element_reads + self.element_writes


class TileTicket:
    """Shared monotone counter issuing each tile index in [0, g) exactly once."""

    def __init__(self, tiles: int):
        self._tiles = tiles
        self._next = 0
        self._lock = threading.Lock()

    def next_tile(self) -> int | None:
        """Next tile index, or None once all tiles have been issued."""
        with self._lock:
            if self._next >= self._tiles:
                return None
            tile = self._next
            self._next += 1
            return tile


class Jitter:
    """Test-only random pauses for exploring executor/lookback schedules."""

    def __init__(self, seed: int = 0, max_pause_us: float = 50.0):
        self.seed = seed
        self.max_pause_us = max_pause_us
        self._local = threading.local()

    def pause(self) -> None:
        rng = getattr(self._local, "rng", None)
        if rng is None:
            rng = random.Random((self.seed << 20) ^ threading.get_ident())
            self._local.rng = rng
        time.sleep(rng.uniform(0.0, self.max_pause_us) * 1e-6)


class Executor:
    """Owns worker threads, the tile ticket, and the memory-op ledger."""

    def __init__(self, workers: int | None = None, jitter: Jitter | None = None):
        if workers is None:
            workers = os.cpu_count() or 1
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self.jitter = jitter
        self._ledger: dict[str, LedgerCounts] = {}
        self._ledger_lock = threading.Lock()

    # -- ledger --

    def ledger_record(self, phase: str, kind: str, count: int) -> None:
        """Thread-safe accumulation into one phase counter."""
        if kind not in _LEDGER_KINDS:
            raise ValueError(f"unknown ledger kind {kind!r}")
        with self._ledger_lock:
            counts = self._ledger.setdefault(phase, LedgerCounts())
            setattr(counts, kind, getattr(counts, kind) + count)

    def ledger_snapshot(self) -> MemOpLedger:
        """Consistent copy of all phase counters; call between dispatches."""
        with self._ledger_lock:
            return MemOpLedger(
                phases={name: replace(counts) for name, counts in self._ledger.items()}
            )

    def ledger_reset(self) -> None:
        with self._ledger_lock:
            self._ledger.clear()

    # -- dispatch --

    def run_blocks(self, tiles: int, body) -> None:
        """Run body(tile) once for every tile in [0, tiles); barrier on exit.

        Tile indices are issued in strictly increasing order and a worker
        finishes its tile before drawing the next.  The first body failure is
        re-raised after all workers have drained; real errors win over
        LookbackAborted secondaries triggered by the abort.
        """
        if tiles == 0:
            return
        ticket = TileTicket(tiles)
        if self.workers == 1:
            while (tile := ticket.next_tile()) is not None:
                self._run_one(tile, body)
            return

        stop = threading.Event()
        failure_lock = threading.Lock()
        failures: list[BaseException] = []

        def worker() -> None:
            while not stop.is_set():
                tile = ticket.next_tile()
                if tile is None:
                    return
                try:
                    self._run_one(tile, body)
                except BaseException as exc:
                    with failure_lock:
                        failures.append(exc)
                    stop.set()
                    return

        threads = [
            threading.Thread(target=worker, name=f"block-worker-{i}")
            for i in range(self.workers)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if failures:
            for exc in failures:
                if not isinstance(exc, LookbackAborted):
                    raise exc
            raise failures[0]

    def _run_one(self, tile: int, body) -> None:
        if self.jitter is not None:
            self.jitter.pause()
        body(tile)
        if self.jitter is not None:
            self.jitter.pause()


def ledger_as_row(ledger: MemOpLedger) -> dict[str, int]:
    """Flatten ledger totals into the CSV column set used by the bench."""
    row = {kind: getattr(ledger, kind) for kind in _LEDGER_KINDS}
    row["element_ops"] = ledger.element_ops
    return row


__all__ = [
    "Executor",
    "Jitter",
    "LedgerCounts",
    "MemOpLedger",
    "TileTicket",
    "ledger_as_row",
]
