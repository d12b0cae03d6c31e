"""Multi-threaded single-pass LSD radix sort with chained-scan digit binning,
plus a reduce-then-scan baseline and memory-traffic instrumentation."""

from .baseline import oracle_stable_sort, rts_sort
from .binning import onesweep_sort, partition_pass
from .executor import Executor, Jitter, MemOpLedger, TileTicket
from .histogram import exclusive_sum, global_bin_offsets, global_histograms
from .keycodec import (
    KEY_TYPES,
    RadixConfig,
    decode_array,
    decode_key,
    encode_array,
    encode_key,
    extract_digit,
    extract_digits,
    radix_plan,
)
from .keygen import KeyGenSpec, empirical_bit_entropy, expected_entropy, generate_keys
from .lookback import CounterMatrix, pack_counter, unpack_counter

__all__ = [
    "CounterMatrix",
    "Executor",
    "Jitter",
    "KeyGenSpec",
    "KEY_TYPES",
    "MemOpLedger",
    "RadixConfig",
    "TileTicket",
    "decode_array",
    "decode_key",
    "empirical_bit_entropy",
    "encode_array",
    "encode_key",
    "exclusive_sum",
    "expected_entropy",
    "extract_digit",
    "extract_digits",
    "generate_keys",
    "global_bin_offsets",
    "global_histograms",
    "onesweep_sort",
    "oracle_stable_sort",
    "pack_counter",
    "partition_pass",
    "radix_plan",
    "rts_sort",
    "unpack_counter",
]
