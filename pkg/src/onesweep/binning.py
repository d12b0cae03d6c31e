"""Single-pass digit binning and the full three-phase sort.

A partition pass reads each tile once and writes it once.  Per tile:

1. extract digits for the current place;
2. rank elements with lane-group multi-split votes (stable within the tile);
3. publish local per-digit counts to the pass's status counters;
4. resolve per-digit exclusive prefixes by decoupled lookback;
5. publish inclusive prefixes;
6. stage elements into per-digit runs in tile-local storage (the local
   reorder that buys sequential per-bin writes);
7. write each run to output at global bin offset + tile exclusive prefix +
   rank.  A tile whose elements all share one digit skips the reorder and is
   copied to its bin as a single contiguous range.

Ranking votes model 32-lane groups: one 32-bit ballot mask per digit bit,
combined with AND / AND-NOT so every lane learns the mask of same-digit
lanes; its rank is the population count of lower-indexed lanes in that mask.

Very large inputs are processed in strips: status-counter values stay below
2**30 because a strip holds at most strip_size <= 2**28 elements, and 64-bit
per-digit carries chain the global offsets from strip to strip (the last
tile of a strip writes them for the next).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .executor import Executor, Jitter, LedgerCounts
from .histogram import global_bin_offsets, global_histograms
from .keycodec import RadixConfig, decode_array, encode_array, extract_digits, radix_plan, spec_for_dtype
from .lookback import CounterMatrix

LANE_GROUP = 32


@dataclass(frozen=True)
class TileRanking:
    """Per-tile digit counts plus a stable tile-relative rank per element."""

    digit_counts: np.ndarray  # int64, length radix
    ranks: np.ndarray  # int64, length tile


def _rank(digits: np.ndarray, digit_bits: int, radix: int) -> TileRanking:
    ranks = np.empty(digits.size, dtype=np.int64)
    digit_counts = np.empty(radix, dtype=np.int64)
    kernels.rank_tile_kernel(digits, digit_bits, ranks, digit_counts)
    return TileRanking(digit_counts, ranks)


def wlms_rank(digits: np.ndarray, digit_bits: int):
    """Rank one lane group (<= 32 digit values) by ballot votes.

    Returns (counts, ranks): counts has length 2**digit_bits with each
    digit's population size, ranks are stable positions within the digit's
    population.
    """
    digits = np.asarray(digits, dtype=np.int64)
    if digits.size > LANE_GROUP:
        raise ValueError(f"lane group holds at most {LANE_GROUP} values")
    ranking = _rank(digits, digit_bits, 1 << digit_bits)
    return ranking.digit_counts, ranking.ranks


def rank_tile(digits: np.ndarray, cfg: RadixConfig) -> TileRanking:
    """Stable tile-wide ranking: lane-group multi-split per 32-element batch,
    with each batch's digit populations folded into running per-digit
    prefixes so ranks are tile-wide."""
    digits = np.asarray(digits, dtype=np.int64)
    return _rank(digits, cfg.digit_bits, cfg.radix)


def short_circuit_check(ranking: TileRanking) -> int | None:
    """The single digit covering the whole tile, or None (empty tiles: None)."""
    n = ranking.ranks.size
    if n == 0:
        return None
    top = int(ranking.digit_counts.argmax())
    return top if int(ranking.digit_counts[top]) == n else None


@dataclass(frozen=True)
class StripCarry:
    """Per-digit 64-bit running global offsets chained between strips."""

    offsets: np.ndarray  # uint64, length radix


@dataclass
class SortBuffers:
    """Ping-pong key (and optional value) buffers; exactly one pair is live."""

    keys_a: np.ndarray
    keys_b: np.ndarray
    values_a: np.ndarray | None = None
    values_b: np.ndarray | None = None
    live_in_a: bool = True

    @classmethod
    def allocate(cls, encoded: np.ndarray, values: np.ndarray | None) -> "SortBuffers":
        return cls(
            keys_a=encoded,
            keys_b=np.empty_like(encoded),
            values_a=None if values is None else values.copy(),
            values_b=None if values is None else np.empty_like(values),
        )

    def src_keys(self) -> np.ndarray:
        return self.keys_a if self.live_in_a else self.keys_b

    def dst_keys(self) -> np.ndarray:
        return self.keys_b if self.live_in_a else self.keys_a

    def src_values(self) -> np.ndarray | None:
        if self.values_a is None:
            return None
        return self.values_a if self.live_in_a else self.values_b

    def dst_values(self) -> np.ndarray | None:
        if self.values_a is None:
            return None
        return self.values_b if self.live_in_a else self.values_a

    def swap(self) -> None:
        self.live_in_a = not self.live_in_a


def scatter_tile(
    keys_tile: np.ndarray,
    digits: np.ndarray,
    ranking: TileRanking,
    dest_starts: np.ndarray,
    out_keys: np.ndarray,
    values_tile: np.ndarray | None = None,
    out_values: np.ndarray | None = None,
) -> None:
    """Local reorder then per-digit run writes.

    Elements are staged into per-digit contiguous runs in tile-local storage
    (stage index = tile-local digit start + rank), then each run lands at
    dest_starts[digit], so output writes stay sequential within every digit
    run.  Payloads reuse the keys' staging permutation.
    """
    slots = np.empty(keys_tile.size, dtype=np.int64)
    dest_starts = np.ascontiguousarray(dest_starts, dtype=np.int64)
    kernels.scatter_tile_kernel(
        keys_tile, digits, ranking.ranks, ranking.digit_counts, dest_starts,
        out_keys, slots,
    )
    if values_tile is not None:
        kernels.scatter_slots_kernel(
            values_tile, slots, ranking.digit_counts, dest_starts, out_values
        )


def process_tile(
    tile_index: int,
    keys_tile: np.ndarray,
    out_keys: np.ndarray,
    place: int,
    base_offsets: np.ndarray,
    counters: CounterMatrix,
    cfg: RadixConfig,
    values_tile: np.ndarray | None = None,
    out_values: np.ndarray | None = None,
    carry_out: np.ndarray | None = None,
    jitter: Jitter | None = None,
) -> LedgerCounts:
    """Run the full per-tile pipeline; returns this tile's ledger deltas.

    base_offsets is the strip's immutable per-digit global offset snapshot.
    The last tile of a strip passes carry_out and writes the chained offsets
    for the next strip once its inclusive prefixes are known.
    """
    n = keys_tile.size
    digits = extract_digits(keys_tile, place, cfg)
    ranking = rank_tile(digits, cfg)
    fast_digit = short_circuit_check(ranking)

    counters.publish_local_row(tile_index, ranking.digit_counts)
    if jitter is not None:
        jitter.pause()
    exclusive, lookback_reads = counters.lookback_exclusive_row(tile_index)
    inclusive = exclusive + ranking.digit_counts
    counters.publish_inclusive_row(tile_index, inclusive)
    if jitter is not None:
        jitter.pause()

    counter_ops = 2 * cfg.radix + lookback_reads
    if carry_out is not None:
        carry_out[:] = base_offsets + inclusive.astype(np.uint64)
        counter_ops += cfg.radix

    dest_starts = base_offsets.astype(np.int64) + exclusive
    if fast_digit is not None:
        start = int(dest_starts[fast_digit])
        out_keys[start : start + n] = keys_tile
        if values_tile is not None:
            out_values[start : start + n] = values_tile
    else:
        scatter_tile(
            keys_tile, digits, ranking, dest_starts, out_keys, values_tile, out_values
        )
    return LedgerCounts(
        element_reads=n,
        element_writes=n,
        counter_ops=counter_ops,
        fast_path_tiles=1 if fast_digit is not None else 0,
    )


def partition_pass(
    src_keys: np.ndarray,
    dst_keys: np.ndarray,
    place: int,
    offsets,
    cfg: RadixConfig,
    executor: Executor,
    src_values: np.ndarray | None = None,
    dst_values: np.ndarray | None = None,
) -> StripCarry:
    """Stable radix-way partition of src into dst by the digit at `place`.

    offsets is either the place's global bin offset row or a StripCarry from
    a previous invocation; the returned StripCarry folds in every digit count
    seen by this pass.  Exactly n element reads and n writes are ledgered.
    """
    if isinstance(offsets, StripCarry):
        carry = StripCarry(offsets.offsets.copy())
    else:
        carry = StripCarry(np.array(offsets, dtype=np.uint64, copy=True))
    n = src_keys.size
    ledger = executor.ledger_record

    for strip_start in range(0, n, cfg.strip_size):
        strip_stop = min(strip_start + cfg.strip_size, n)
        tiles = -(-(strip_stop - strip_start) // cfg.tile_size)
        abort = threading.Event()
        counters = CounterMatrix(tiles, cfg.radix, abort_event=abort)
        strip_base = carry.offsets.copy()

        def body(tile: int) -> None:
            lo = strip_start + tile * cfg.tile_size
            hi = min(lo + cfg.tile_size, strip_stop)
            try:
                stats = process_tile(
                    tile,
                    src_keys[lo:hi],
                    dst_keys,
                    place,
                    strip_base,
                    counters,
                    cfg,
                    values_tile=None if src_values is None else src_values[lo:hi],
                    out_values=dst_values,
                    carry_out=carry.offsets if tile == tiles - 1 else None,
                    jitter=executor.jitter,
                )
            except BaseException:
                abort.set()
                raise
            ledger("partition", "element_reads", stats.element_reads)
            ledger("partition", "element_writes", stats.element_writes)
            ledger("partition", "counter_ops", stats.counter_ops)
            if stats.fast_path_tiles:
                ledger("partition", "fast_path_tiles", stats.fast_path_tiles)

        executor.run_blocks(tiles, body)
    return carry


def onesweep_sort(
    keys: np.ndarray,
    values: np.ndarray | None = None,
    cfg: RadixConfig | None = None,
    executor: Executor | None = None,
):
    """Stable ascending sort: one histogram pass, then one read+write pass
    per digit place with chained-scan cooperation between tiles.

    Returns the sorted keys, or (sorted keys, reordered values) when values
    are given.  Accepts any supported key dtype; signed/float keys are
    carried through an order-preserving unsigned encoding.
    """
    keys = np.asarray(keys)
    spec = spec_for_dtype(keys.dtype)
    if cfg is None:
        cfg = radix_plan(spec.bits, 8)
    elif cfg.key_bits != spec.bits:
        raise ValueError(
            f"config is for {cfg.key_bits}-bit keys but got {spec.bits}-bit {spec.name}"
        )
    if executor is None:
        executor = Executor()
    if values is not None:
        values = np.asarray(values)
        if values.shape != keys.shape:
            raise ValueError("values must have the same length as keys")

    n = keys.size
    if n <= 1:
        sorted_keys = keys.copy()
        return sorted_keys if values is None else (sorted_keys, values.copy())

    bufs = SortBuffers.allocate(encode_array(keys), values)
    hist = global_histograms(bufs.src_keys(), cfg, executor)
    offsets = global_bin_offsets(hist)
    for place in range(cfg.passes):
        partition_pass(
            bufs.src_keys(),
            bufs.dst_keys(),
            place,
            offsets.row(place),
            cfg,
            executor,
            bufs.src_values(),
            bufs.dst_values(),
        )
        bufs.swap()

    if not bufs.live_in_a:
        # Deliver in the primary buffer; the extra pass-parity copy is its
        # own ledger line so the traffic identity stays checkable.
        bufs.keys_a[:] = bufs.keys_b
        if bufs.values_a is not None:
            bufs.values_a[:] = bufs.values_b
        executor.ledger_record("copy", "copy_ops", 2 * n)
        bufs.live_in_a = True

    sorted_keys = decode_array(bufs.keys_a, spec.name)
    return sorted_keys if values is None else (sorted_keys, bufs.values_a)
