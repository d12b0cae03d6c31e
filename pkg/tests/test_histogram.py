"""Histogram and exclusive-sum tests against sequential counting oracles."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onesweep.executor import Executor
from onesweep.histogram import exclusive_sum, global_bin_offsets, global_histograms
from onesweep.keycodec import extract_digit, radix_plan


def _exclusive_sum_oracle(counts):
    out, total = [], 0
    for c in counts:
        out.append(total)
        total += c
    return out


def _counting_oracle(keys, cfg):
    """Sequential per-element digit counting."""
    table = np.zeros((cfg.passes, cfg.radix), dtype=np.uint64)
    for key in keys:
        for place in range(cfg.passes):
            table[place, extract_digit(int(key), place, cfg)] += 1
    return table


def test_exclusive_sum_worked_example():
    counts = np.array([8, 6, 7, 5, 3, 0, 9, 2])
    assert exclusive_sum(counts).tolist() == [0, 8, 14, 21, 26, 29, 29, 38]


def test_exclusive_sum_flag_scan():
    assert exclusive_sum(np.array([0, 1, 1, 0])).tolist() == [0, 0, 1, 2]


def test_exclusive_sum_zeros():
    assert exclusive_sum(np.zeros(8, dtype=np.int64)).tolist() == [0] * 8


@given(st.lists(st.integers(min_value=0, max_value=10_000), min_size=1, max_size=64))
@settings(max_examples=100, deadline=None)
def test_exclusive_sum_matches_sequential_oracle(counts):
    got = exclusive_sum(np.array(counts, dtype=np.int64)).tolist()
    assert got == _exclusive_sum_oracle(counts)


def test_histogram_worked_example():
    cfg = radix_plan(32, 3)
    keys = np.array([17, 8, 24, 5], dtype=np.uint32)
    hist = global_histograms(keys, cfg, Executor(workers=1))
    place0 = hist.counts[0]
    assert place0[0] == 2 and place0[1] == 1 and place0[5] == 1
    assert place0.sum() == 4


def test_histogram_empty_input():
    cfg = radix_plan(32, 8)
    hist = global_histograms(np.empty(0, dtype=np.uint32), cfg, Executor(workers=2))
    assert not hist.counts.any()
    assert hist.counts.shape == (4, 256)


@pytest.mark.parametrize("key_bits,digit_bits", [(32, 8), (32, 5), (64, 11)])
def test_histogram_matches_counting_oracle(key_bits, digit_bits):
    cfg = radix_plan(key_bits, digit_bits)
    rng = np.random.default_rng(17)
    dtype = np.uint32 if key_bits == 32 else np.uint64
    keys = rng.integers(0, 2**key_bits, size=5000, dtype=dtype)
    hist = global_histograms(keys, cfg, Executor(workers=2))
    assert np.array_equal(hist.counts, _counting_oracle(keys, cfg))


def test_histogram_row_sums_equal_n():
    cfg = radix_plan(32, 6)
    rng = np.random.default_rng(23)
    keys = rng.integers(0, 2**32, size=100_000, dtype=np.uint32)
    hist = global_histograms(keys, cfg, Executor(workers=2))
    assert (hist.counts.sum(axis=1) == keys.size).all()


def test_histogram_worker_count_invariance():
    cfg = radix_plan(32, 8)
    rng = np.random.default_rng(29)
    keys = rng.integers(0, 2**32, size=100_000, dtype=np.uint32)
    tables = [
        global_histograms(keys, cfg, Executor(workers=w)).counts for w in (1, 2, 8)
    ]
    assert np.array_equal(tables[0], tables[1])
    assert np.array_equal(tables[0], tables[2])


def test_histogram_portion_path_matches_unrestricted():
    rng = np.random.default_rng(31)
    keys = rng.integers(0, 2**32, size=1 << 14, dtype=np.uint32)
    small = radix_plan(32, 8, portion_size=1 << 10)
    big = radix_plan(32, 8)
    got = global_histograms(keys, small, Executor(workers=2)).counts
    want = global_histograms(keys, big, Executor(workers=1)).counts
    assert np.array_equal(got, want)


def test_histogram_ledger_reads_once_per_element():
    cfg = radix_plan(32, 8, portion_size=1 << 10)
    keys = np.arange(10_000, dtype=np.uint32)
    for workers in (1, 3):
        ex = Executor(workers=workers)
        global_histograms(keys, cfg, ex)
        snap = ex.ledger_snapshot()
        assert snap.phase("histogram").element_reads == keys.size
        assert snap.element_writes == 0


def test_histogram_iteration_invariant_under_permutation():
    cfg = radix_plan(32, 8)
    rng = np.random.default_rng(37)
    keys = rng.integers(0, 2**32, size=20_000, dtype=np.uint32)
    shuffled = keys.copy()
    rng.shuffle(shuffled)
    a = global_histograms(keys, cfg, Executor(workers=2)).counts
    b = global_histograms(shuffled, cfg, Executor(workers=2)).counts
    assert np.array_equal(a, b)


def test_global_bin_offsets_single_place_example():
    cfg = radix_plan(32, 3)
    counts = np.zeros((cfg.passes, cfg.radix), dtype=np.uint64)
    counts[0] = [8, 6, 7, 5, 3, 0, 9, 2]
    from onesweep.histogram import GlobalHistogram

    offs = global_bin_offsets(GlobalHistogram(counts))
    assert offs.row(0).tolist() == [0, 8, 14, 21, 26, 29, 29, 38]


def test_global_bin_offsets_homogeneous():
    from onesweep.histogram import GlobalHistogram

    counts = np.zeros((1, 8), dtype=np.uint64)
    counts[0, 0] = 1000
    offs = global_bin_offsets(GlobalHistogram(counts))
    assert offs.row(0).tolist() == [0] + [1000] * 7


def test_global_bin_offsets_terminal_identity():
    cfg = radix_plan(32, 8)
    rng = np.random.default_rng(41)
    keys = rng.integers(0, 2**32, size=5000, dtype=np.uint32)
    hist = global_histograms(keys, cfg, Executor(workers=1))
    offs = global_bin_offsets(hist)
    for place in range(cfg.passes):
        assert int(offs.row(place)[-1] + hist.counts[place][-1]) == keys.size
        assert offs.row(place).tolist() == _exclusive_sum_oracle(
            hist.counts[place].tolist()
        )
