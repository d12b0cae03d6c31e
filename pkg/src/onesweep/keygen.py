"""Entropy-banded random key generation and per-bit entropy measurement.

Keys are built by AND-ing q independent uniform words, so each bit of a key
is 1 with probability 2**-q and the per-bit Shannon entropy is H(2**-q):

    q:   1       2         3         4        8         16
    H:   1.0     0.811278  0.543564  0.33729  0.036875  0.000266

The word stream is counter-based (splitmix64 applied to a word index), so
key i depends only on (seed, i, q) and generation can be partitioned across
threads by index range without changing the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class KeyGenSpec:
    """Parameters for one generated dataset."""

    q: int
    seed: int
    n: int
    key_bits: int = 32

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if self.key_bits not in (32, 64):
            raise ValueError(f"key_bits must be 32 or 64, got {self.key_bits}")


def _mix64(state: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array (wrapping arithmetic)."""
    z = state.copy()
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


def _uniform_words(seed: int, counters: np.ndarray) -> np.ndarray:
    """Uniform 64-bit word for each counter value, as a pure function."""
    state = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + (counters + np.uint64(1)) * _GAMMA)
    return _mix64(state)


def generate_keys(spec: KeyGenSpec) -> np.ndarray:
    """AND of q uniform words per key; uint32 or uint64 array of length n.

    Deterministic in (seed, q, n, key_bits): key i is the AND of the stream
    words at counters i*q .. i*q+q-1.
    """
    out_dtype = np.uint32 if spec.key_bits == 32 else np.uint64
    if spec.n == 0:
        return np.empty(0, dtype=out_dtype)
    base = np.arange(spec.n, dtype=np.uint64) * np.uint64(spec.q)
    keys = _uniform_words(spec.seed, base)
    for j in range(1, spec.q):
        keys &= _uniform_words(spec.seed, base + np.uint64(j))
    return keys.astype(out_dtype)


def binary_entropy(p: float) -> float:
    """Shannon entropy of a Bernoulli(p) bit, in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    # log1p keeps the (1-p) term accurate when p is tiny.
    return -(p * math.log2(p) + (1.0 - p) * math.log1p(-p) / _LN2)


def expected_entropy(q: int) -> float:
    """Per-bit entropy of the AND-of-q-uniform-words distribution: H(2**-q)."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return binary_entropy(2.0 ** -q)


def empirical_bit_entropy(keys: np.ndarray) -> float:
    """Mean over bit positions of H(observed fraction of ones at that bit)."""
    n = keys.size
    if n == 0:
        raise ValueError("empirical_bit_entropy requires at least one key")
    width = keys.dtype.itemsize * 8
    one = keys.dtype.type(1)
    total = 0.0
    for b in range(width):
        ones = int(((keys >> keys.dtype.type(b)) & one).sum())
        total += binary_entropy(ones / n)
    return total / width
