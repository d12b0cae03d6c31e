"""Key encoding tests: exhaustive 16-bit analogs, comparison-sort oracles,
digit extraction, and radix planning."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onesweep import keycodec
from onesweep.keycodec import (
    decode_array,
    decode_key,
    encode_array,
    encode_key,
    extract_digit,
    extract_digits,
    float_bits_to_ordered,
    ordered_to_float_bits,
    ordered_to_signed_bits,
    radix_plan,
    signed_bits_to_ordered,
)

ALL_U16 = np.arange(1 << 16, dtype=np.uint16)


def test_unsigned_encode_is_identity():
    assert encode_key(0, "u32") == 0
    assert encode_key(0xDEADBEEF, "u32") == 0xDEADBEEF
    assert decode_key(0, "u32") == 0
    keys = np.array([5, 0, 2**32 - 1], dtype=np.uint32)
    assert np.array_equal(encode_array(keys), keys)


def test_signed_16bit_analog_exhaustive_monotone_bijection():
    # Same code path as i32/i64, run at width 16 over every bit pattern.
    encoded = signed_bits_to_ordered(ALL_U16, 0x8000)
    values = ALL_U16.view(np.int16)
    order = np.argsort(values, kind="stable")
    assert np.all(np.diff(encoded[order].astype(np.int64)) > 0)
    assert np.array_equal(ordered_to_signed_bits(encoded, 0x8000), ALL_U16)


def test_signed_encode_constants_from_flip_rule():
    # Pinned by the exhaustively verified sign-flip rule above.
    assert encode_key(-1, "i32") == 0x7FFFFFFF
    assert encode_key(-(2**31), "i32") == 0
    assert encode_key(2**31 - 1, "i32") == 0xFFFFFFFF
    assert decode_key(0x7FFFFFFF, "i32") == -1
    assert encode_key(-1, "i64") == 0x7FFFFFFFFFFFFFFF


def test_float_16bit_analog_exhaustive():
    encoded = float_bits_to_ordered(ALL_U16, 0x8000)
    values = ALL_U16.view(np.float16)
    finite = ~np.isnan(values)
    # Walking non-NaN patterns in encoded order must never decrease the float
    # value (-0.0 and +0.0 compare equal, so the zero split is allowed).
    by_encoding = values[finite][np.argsort(encoded[finite], kind="stable")]
    assert np.all(np.diff(by_encoding.astype(np.float64)) >= 0)
    # Bijective over every pattern, NaNs included.
    assert np.array_equal(ordered_to_float_bits(encoded, 0x8000), ALL_U16)
    assert len(np.unique(encoded)) == 1 << 16


def test_float_16bit_analog_zero_ordering():
    neg_zero = np.array([0x8000], dtype=np.uint16)
    pos_zero = np.array([0x0000], dtype=np.uint16)
    assert float_bits_to_ordered(neg_zero, 0x8000)[0] < float_bits_to_ordered(
        pos_zero, 0x8000
    )[0]


def test_float_encode_constants():
    assert encode_key(np.float32(-0.0), "f32") == 0x7FFFFFFF
    assert encode_key(np.float32(0.0), "f32") == 0x80000000
    assert decode_key(0x80000000, "f32") == 0.0
    assert np.signbit(decode_key(0x7FFFFFFF, "f32"))


def test_float_nan_ordering_policy():
    # Positive-payload NaNs order after +inf, negative ones before -inf.
    pos_nan = encode_key(np.uint32(0x7FC00000).view(np.float32), "f32")
    neg_nan = encode_key(np.uint32(0xFFC00000).view(np.float32), "f32")
    pos_inf = encode_key(np.float32(np.inf), "f32")
    neg_inf = encode_key(np.float32(-np.inf), "f32")
    assert pos_nan > pos_inf
    assert neg_nan < neg_inf


def test_float_sort_matches_comparison_oracle():
    rng = np.random.default_rng(7)
    keys = rng.standard_normal(1_000_000).astype(np.float32)
    keys *= rng.choice([1e-30, 1.0, 1e30], size=keys.size).astype(np.float32)
    by_encoding = keys[np.argsort(encode_array(keys), kind="stable")]
    by_comparison = np.sort(keys, kind="stable")
    assert np.array_equal(by_encoding, by_comparison)


def test_float64_roundtrip_random_patterns():
    rng = np.random.default_rng(11)
    bits = rng.integers(0, 2**64, size=100_000, dtype=np.uint64)
    keys = bits.view(np.float64)
    back = decode_array(encode_array(keys), "f64")
    assert np.array_equal(back.view(np.uint64), bits)


@given(
    st.sampled_from(sorted(keycodec.KEY_TYPES)),
    st.integers(min_value=0, max_value=2**32 - 1),
    st.integers(min_value=0, max_value=2**32 - 1),
)
@settings(max_examples=200, deadline=None)
def test_encode_monotone_on_random_pairs(key_type, raw_a, raw_b):
    spec = keycodec.key_spec(key_type)
    bits = np.array([raw_a, raw_b], dtype=np.uint64).astype(spec.uint_dtype)
    pair = bits.view(spec.dtype)
    if spec.kind == "f" and np.isnan(pair).any():
        return
    enc = encode_array(pair)
    if pair[0] < pair[1]:
        assert enc[0] < enc[1]
    elif pair[0] > pair[1]:
        assert enc[0] > enc[1]
    else:
        assert enc[0] == enc[1]
    assert np.array_equal(decode_array(enc, key_type).view(spec.uint_dtype), bits)


def _digit_oracle(bits: int, place: int, d: int, k: int) -> int:
    """Per-bit reference: digit read straight out of the binary expansion."""
    text = format(bits, f"0{k}b")[::-1]  # LSB first
    field = text[place * d : place * d + d]
    return int(field[::-1] or "0", 2)


def test_extract_digit_examples():
    cfg = radix_plan(32, 8)
    assert extract_digit(0xDEADBEEF, 1, cfg) == 0xBE
    cfg3 = radix_plan(32, 3)
    assert extract_digit(17, 0, cfg3) == 1
    assert extract_digit(8, 0, cfg3) == 0
    assert extract_digit(24, 0, cfg3) == 0
    assert extract_digit(5, 0, cfg3) == 5


def test_extract_digit_partial_top_place():
    cfg = radix_plan(32, 7)
    rng = np.random.default_rng(3)
    for bits in rng.integers(0, 2**32, size=200, dtype=np.uint64):
        bits = int(bits)
        for place in range(cfg.passes):
            assert extract_digit(bits, place, cfg) == _digit_oracle(bits, place, 7, 32)
        assert extract_digit(bits, 4, cfg) < 16  # only 4 meaningful bits remain


def test_extract_digits_vectorized_matches_scalar():
    cfg = radix_plan(64, 6)
    rng = np.random.default_rng(5)
    keys = rng.integers(0, 2**64, size=500, dtype=np.uint64)
    for place in (0, 3, cfg.passes - 1):
        got = extract_digits(keys, place, cfg)
        want = [extract_digit(int(k), place, cfg) for k in keys]
        assert got.tolist() == want


def test_radix_plan_examples():
    cfg = radix_plan(32, 8, 4096)
    assert (cfg.passes, cfg.radix) == (4, 256)
    cfg = radix_plan(32, 7)
    assert (cfg.passes, cfg.radix) == (5, 128)
    assert radix_plan(64, 8).passes == 8


def test_radix_plan_rejects_bad_parameters():
    with pytest.raises(ValueError):
        radix_plan(32, 0)
    with pytest.raises(ValueError):
        radix_plan(32, 17)
    with pytest.raises(ValueError):
        radix_plan(32, 8, tile_size=1 << 30)
    with pytest.raises(ValueError):
        radix_plan(32, 8, tile_size=0)
    with pytest.raises(ValueError):
        radix_plan(32, 8, strip_size=0)
    with pytest.raises(ValueError):
        radix_plan(48, 8)
    with pytest.raises(ValueError):
        radix_plan(32, 8, strip_size=(1 << 28) + 1)


def test_digit_shift_bounds():
    cfg = radix_plan(32, 8)
    with pytest.raises(ValueError):
        cfg.digit_shift(4)
    with pytest.raises(ValueError):
        cfg.digit_shift(-1)


def test_unsupported_types_rejected():
    with pytest.raises(KeyError):
        keycodec.key_spec("u16")
    with pytest.raises(KeyError):
        keycodec.spec_for_dtype(np.dtype(np.float16))
    with pytest.raises(ValueError):
        encode_array(np.zeros(3, dtype=np.uint32), "u64")
