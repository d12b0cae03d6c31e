"""Order-preserving key encodings, digit extraction, and radix planning.

Every supported key type maps onto an unsigned bit pattern of the same width
such that the unsigned order of the encoded bits equals the native order of
the source values:

- unsigned: identity.
- signed: XOR the sign bit, so INT_MIN encodes to 0 and -1 encodes to
  0x7FF..F (one below the encoding of 0).
- float: if the sign bit is set, flip all bits; otherwise set the sign bit.
  This orders -0.0 strictly before +0.0, puts negative-sign NaNs before
  -inf and positive-sign NaNs after +inf, and is a bijection on bit
  patterns (NaN payloads survive a round trip).

All encodings are monotone bijections, so radix-sorting the encoded bits and
decoding afterwards yields a stable sort in the native order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TILE_SIZE = 4096
DEFAULT_STRIP_SIZE = 1 << 28
DEFAULT_PORTION_SIZE = 1 << 30

# Per-tile digit counts must fit the 30-bit value field of a status counter.
MAX_TILE_SIZE = (1 << 30) - 1


@dataclass(frozen=True)
class KeySpec:
    """One supported key type: its numpy dtype and bit-level layout."""

    name: str
    dtype: np.dtype
    bits: int
    kind: str  # 'u' unsigned, 'i' signed, 'f' float

    @property
    def uint_dtype(self) -> np.dtype:
        return np.dtype(f"uint{self.bits}")

    @property
    def sign_mask(self) -> int:
        return 1 << (self.bits - 1)

    @property
    def full_mask(self) -> int:
        return (1 << self.bits) - 1


KEY_TYPES: dict[str, KeySpec] = {
    spec.name: spec
    for spec in (
        KeySpec("u32", np.dtype(np.uint32), 32, "u"),
        KeySpec("u64", np.dtype(np.uint64), 64, "u"),
        KeySpec("i32", np.dtype(np.int32), 32, "i"),
        KeySpec("i64", np.dtype(np.int64), 64, "i"),
        KeySpec("f32", np.dtype(np.float32), 32, "f"),
        KeySpec("f64", np.dtype(np.float64), 64, "f"),
    )
}

_DTYPE_TO_KEY_TYPE = {spec.dtype: spec.name for spec in KEY_TYPES.values()}


def key_spec(key_type: str) -> KeySpec:
    """Look up a KeySpec by name; raises KeyError for unsupported names."""
    try:
        return KEY_TYPES[key_type]
    except KeyError:
        raise KeyError(
            f"unsupported key type {key_type!r}; expected one of {sorted(KEY_TYPES)}"
        ) from None


def spec_for_dtype(dtype: np.dtype) -> KeySpec:
    """Map a numpy dtype to its KeySpec; raises KeyError if unsupported."""
    name = _DTYPE_TO_KEY_TYPE.get(np.dtype(dtype))
    if name is None:
        raise KeyError(f"unsupported key dtype {np.dtype(dtype)!r}")
    return KEY_TYPES[name]


@dataclass(frozen=True)
class RadixConfig:
    """Digit geometry and tiling parameters for one sort.

    radix = 2**digit_bits and passes = ceil(key_bits / digit_bits) are
    derived; use radix_plan() to build a validated config.  tile_size is
    bounded so a per-tile digit count always fits the 30-bit counter value
    field; strip_size / portion_size bound the sub-ranges over which 30/32-bit
    bookkeeping counters are live before being folded into 64-bit carries.
    """

    key_bits: int
    digit_bits: int
    radix: int
    passes: int
    tile_size: int = DEFAULT_TILE_SIZE
    strip_size: int = DEFAULT_STRIP_SIZE
    portion_size: int = DEFAULT_PORTION_SIZE

    def __post_init__(self) -> None:
        if self.key_bits not in (32, 64):
            raise ValueError(f"key_bits must be 32 or 64, got {self.key_bits}")
        if not 1 <= self.digit_bits <= 16:
            raise ValueError(f"digit_bits must be in [1, 16], got {self.digit_bits}")
        if self.radix != 1 << self.digit_bits:
            raise ValueError("radix must equal 2**digit_bits")
        if self.passes != -(-self.key_bits // self.digit_bits):
            raise ValueError("passes must equal ceil(key_bits / digit_bits)")
        if not 0 < self.tile_size <= MAX_TILE_SIZE:
            raise ValueError(f"tile_size must be in (0, 2**30), got {self.tile_size}")
        if not 0 < self.strip_size <= DEFAULT_STRIP_SIZE:
            raise ValueError(f"strip_size must be in (0, 2**28], got {self.strip_size}")
        if not 0 < self.portion_size <= DEFAULT_PORTION_SIZE:
            raise ValueError(
                f"portion_size must be in (0, 2**30], got {self.portion_size}"
            )

    def digit_shift(self, place: int) -> int:
        if not 0 <= place < self.passes:
            raise ValueError(f"place must be in [0, {self.passes}), got {place}")
        return place * self.digit_bits


def radix_plan(
    key_bits: int,
    digit_bits: int,
    tile_size: int = DEFAULT_TILE_SIZE,
    strip_size: int = DEFAULT_STRIP_SIZE,
    portion_size: int = DEFAULT_PORTION_SIZE,
) -> RadixConfig:
    """Build a RadixConfig with radix and pass count derived from (k, d)."""
    if not 1 <= digit_bits <= 16:
        raise ValueError(f"digit_bits must be in [1, 16], got {digit_bits}")
    return RadixConfig(
        key_bits=key_bits,
        digit_bits=digit_bits,
        radix=1 << digit_bits,
        passes=-(-key_bits // digit_bits),
        tile_size=tile_size,
        strip_size=strip_size,
        portion_size=portion_size,
    )


# Width-generic bit rules.  These operate on unsigned integer arrays (or
# scalars) of any width, so the 16-bit analogs used by exhaustive tests run
# the exact same code path as the 32/64-bit production encodings.


def signed_bits_to_ordered(bits: np.ndarray, sign_mask: int) -> np.ndarray:
    """Two's-complement bit pattern -> order-preserving unsigned (XOR sign)."""
    return bits ^ bits.dtype.type(sign_mask)


def ordered_to_signed_bits(bits: np.ndarray, sign_mask: int) -> np.ndarray:
    return bits ^ bits.dtype.type(sign_mask)


def float_bits_to_ordered(bits: np.ndarray, sign_mask: int) -> np.ndarray:
    """IEEE bit pattern -> order-preserving unsigned.

    Negative sign: flip all bits (reverses the descending magnitude order of
    negative floats).  Non-negative: set the sign bit (shifts positives above
    every encoded negative).
    """
    mask = bits.dtype.type(sign_mask)
    negative = (bits & mask) != 0
    return np.where(negative, ~bits, bits | mask)


def ordered_to_float_bits(bits: np.ndarray, sign_mask: int) -> np.ndarray:
    mask = bits.dtype.type(sign_mask)
    was_negative = (bits & mask) == 0
    return np.where(was_negative, ~bits, bits ^ mask)


def encode_array(keys: np.ndarray, key_type: str | None = None) -> np.ndarray:
    """Encode an array of typed keys into order-preserving unsigned bits.

    The result is a fresh array of the matching unsigned dtype.  Total on all
    inputs, including NaNs and infinities.
    """
    spec = key_spec(key_type) if key_type else spec_for_dtype(keys.dtype)
    if keys.dtype != spec.dtype:
        raise ValueError(f"key array dtype {keys.dtype} does not match {spec.name}")
    bits = np.ascontiguousarray(keys).view(spec.uint_dtype)
    if spec.kind == "u":
        return bits.copy()
    if spec.kind == "i":
        return signed_bits_to_ordered(bits, spec.sign_mask)
    return float_bits_to_ordered(bits, spec.sign_mask)


def decode_array(encoded: np.ndarray, key_type: str) -> np.ndarray:
    """Exact inverse of encode_array; returns an array of the native dtype."""
    spec = key_spec(key_type)
    if encoded.dtype != spec.uint_dtype:
        raise ValueError(f"encoded dtype {encoded.dtype} does not match {spec.name}")
    if spec.kind == "u":
        return encoded.copy()
    if spec.kind == "i":
        bits = ordered_to_signed_bits(encoded, spec.sign_mask)
    else:
        bits = ordered_to_float_bits(encoded, spec.sign_mask)
    return np.ascontiguousarray(bits).view(spec.dtype)


def encode_key(key, key_type: str) -> int:
    """Encode one key value; returns the unsigned bit pattern as a python int."""
    spec = key_spec(key_type)
    return int(encode_array(np.array([key], dtype=spec.dtype))[0])


def decode_key(bits: int, key_type: str):
    """Decode one encoded bit pattern back to the native key value."""
    spec = key_spec(key_type)
    arr = np.array([bits], dtype=spec.uint_dtype)
    return decode_array(arr, key_type)[0]


def extract_digit(bits: int, place: int, cfg: RadixConfig) -> int:
    """Digit of one encoded key at a digit place (0 = least significant).

    The top place is zero-extended when digit_bits does not divide key_bits.
    """
    return (int(bits) >> cfg.digit_shift(place)) & (cfg.radix - 1)


def extract_digits(encoded: np.ndarray, place: int, cfg: RadixConfig) -> np.ndarray:
    """Vectorized extract_digit over an encoded key array; returns int64."""
    shift = cfg.digit_shift(place)
    return ((encoded >> shift) & (cfg.radix - 1)).astype(np.int64)
