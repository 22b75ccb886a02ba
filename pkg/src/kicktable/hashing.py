"""Seeded hashing: point hashes, the depth-cap hash, and a small-domain
invertible permutation.

Everything here is deterministic in (input, seed) and safe to call from
any thread once a seed exists.  The permutation is a 7-round balanced
Feistel network; odd widths are handled by cycle-walking over the next
even width.  None of this is cryptographic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._bits import MASK64, ilog2_ceil
from .errors import ParameterError

FEISTEL_ROUNDS = 7

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """splitmix64 finalizer; full-avalanche 64-bit mixer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_M1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_M2)
    z ^= z >> np.uint64(31)
    return z


@dataclass(frozen=True)
class HashSeed:
    """128-bit seed; equal seeds give bit-identical structures."""

    lo: int
    hi: int

    def __post_init__(self):
        if not (0 <= self.lo <= MASK64 and 0 <= self.hi <= MASK64):
            raise ParameterError("seed halves must be 64-bit")

    @classmethod
    def from_int(cls, value: int) -> "HashSeed":
        value &= (1 << 128) - 1
        return cls(value & MASK64, value >> 64)

    @classmethod
    def from_hex(cls, text: str) -> "HashSeed":
        return cls.from_int(int(text, 16))

    def to_hex(self) -> str:
        return f"{(self.hi << 64) | self.lo:032x}"

    def derive(self, tag: int) -> "HashSeed":
        """Independent-looking child seed for sub-structure `tag`."""
        lo = _mix64(self.lo ^ _mix64(tag * _GOLDEN))
        hi = _mix64(self.hi ^ _mix64((tag + 1) * _GOLDEN) ^ lo)
        return HashSeed(lo, hi)


def hash_u64(x: int, seed: HashSeed) -> int:
    """Keyed hash of a 64-bit word to a 64-bit word."""
    return _mix64(_mix64((x & MASK64) ^ seed.lo) ^ seed.hi)


def hash_u64_np(xs: np.ndarray, seed: HashSeed) -> np.ndarray:
    h = _mix64_np(xs ^ np.uint64(seed.lo))
    h ^= np.uint64(seed.hi)
    return _mix64_np(h)


def _fold_bytes(key: bytes, seed: HashSeed) -> int:
    h = seed.lo ^ (len(key) * _GOLDEN)
    for i in range(0, len(key), 8):
        chunk = int.from_bytes(key[i : i + 8], "little")
        h = _mix64(h ^ chunk ^ (i * _M1))
    return _mix64(h ^ seed.hi)


def _key_word(key) -> int:
    if isinstance(key, (bytes, bytearray)):
        return None  # handled by the byte folder
    if isinstance(key, (int, np.integer)):
        return int(key)
    raise ParameterError(f"unhashable key type {type(key)!r}")


def hash_point(key, seed: HashSeed, domain: int) -> int:
    """Hash `key` (bytes or int) uniformly into [0, domain)."""
    if domain < 1:
        raise ParameterError("domain must be >= 1")
    if isinstance(key, (bytes, bytearray)):
        h = _fold_bytes(bytes(key), seed)
    else:
        k = _key_word(key)
        if k < 0:
            raise ParameterError("integer keys must be non-negative")
        if k <= MASK64:
            h = hash_u64(k, seed)
        else:
            nbytes = (k.bit_length() + 7) // 8
            h = _fold_bytes(k.to_bytes(nbytes, "little"), seed)
    return (h * domain) >> 64


def hash_point_np(keys: np.ndarray, seed: HashSeed, domain: int) -> np.ndarray:
    """Vectorized hash_point for uint64 key arrays."""
    if domain < 1:
        raise ParameterError("domain must be >= 1")
    h = hash_u64_np(keys.astype(np.uint64, copy=False), seed)
    # (h * domain) >> 64 without 128-bit numpy ints
    hi = h >> np.uint64(32)
    lo = h & np.uint64(0xFFFFFFFF)
    d = np.uint64(domain)
    top = hi * d
    bot = (lo * d) >> np.uint64(32)
    return (top + bot) >> np.uint64(32)


@dataclass(frozen=True)
class DepthCapDistribution:
    """Law of the per-ball maximum depth s(x).

    thresholds[i-1] is the 64-bit fixed-point value of
    p_i = 1/(log^(i) n)^2, so Pr[s(x) < i] = p_i.  Thresholds are
    non-decreasing because the iterated log shrinks with i.
    """

    k: int
    thresholds: tuple[int, ...]

    def __post_init__(self):
        if self.k != len(self.thresholds):
            raise ParameterError("k / thresholds mismatch")
        prev = 0
        for t in self.thresholds:
            if not (0 < t <= 1 << 64):
                raise ParameterError("threshold out of (0, 1]")
            if t < prev:
                raise ParameterError("thresholds must be non-decreasing")
            prev = t

    @classmethod
    def for_size(cls, n: int, k: int) -> "DepthCapDistribution":
        if n < 2 or k < 0:
            raise ParameterError("need n >= 2, k >= 0")
        ts = []
        for i in range(1, k + 1):
            log_i = ilog2_ceil(n, i)
            p = min((1 << 64) // (log_i * log_i), 1 << 64)
            ts.append(p)
        return cls(k, tuple(ts))

    def thresholds_np(self) -> np.ndarray:
        # 2**64 cannot be represented; cap at the largest uint64, which
        # only matters when log^(i) n == 1 (p_i == 1).
        return np.array([min(t, MASK64) for t in self.thresholds], dtype=np.uint64)


_DEPTH_TAG = 0x6B69636B_64657074


def depth_cap(key, seed: HashSeed, dist: DepthCapDistribution) -> int:
    """Draw s(key) in [0, k] with Pr[s < i] = dist.thresholds[i-1]."""
    if dist.k == 0:
        return 0
    draw = hash_point(key, seed.derive(_DEPTH_TAG), 1 << 64)
    s = 0
    for t in dist.thresholds:
        if draw >= t:
            s += 1
    return s


def depth_cap_np(keys: np.ndarray, seed: HashSeed, dist: DepthCapDistribution) -> np.ndarray:
    if dist.k == 0:
        return np.zeros(len(keys), dtype=np.int8)
    draws = hash_u64_np(keys.astype(np.uint64, copy=False), seed.derive(_DEPTH_TAG))
    ts = dist.thresholds_np()
    caps = np.zeros(len(keys), dtype=np.int8)
    for t in ts:
        caps += (draws >= t).astype(np.int8)
    return caps


def _round_keys(seed: HashSeed, u: int) -> list[int]:
    child = seed.derive(0x66656973 ^ (u << 32))
    return [hash_u64(i, child) for i in range(FEISTEL_ROUNDS)]


def _feistel_even(x: int, rks: list[int], u: int) -> int:
    half = u // 2
    mask = (1 << half) - 1
    left, right = x >> half, x & mask
    for rk in rks:
        left, right = right, left ^ (_mix64(right ^ rk) & mask)
    return (left << half) | right


def _feistel_even_inv(x: int, rks: list[int], u: int) -> int:
    half = u // 2
    mask = (1 << half) - 1
    left, right = x >> half, x & mask
    for rk in reversed(rks):
        left, right = right ^ (_mix64(left ^ rk) & mask), left
    return (left << half) | right


def _check_feistel_args(x: int, u: int) -> None:
    if not (2 <= u <= 64):
        raise ParameterError(f"feistel width {u} outside [2, 64]")
    if not (0 <= x < (1 << u)):
        raise ParameterError(f"value {x} outside [0, 2^{u})")


def feistel_permute(x: int, seed: HashSeed, u: int) -> int:
    """Seeded bijection on [0, 2**u); inverted by feistel_invert."""
    _check_feistel_args(x, u)
    if u % 2 == 0:
        rks = _round_keys(seed, u)
        return _feistel_even(x, rks, u)
    # cycle-walk over the (u+1)-bit permutation until we land back in range
    rks = _round_keys(seed, u + 1)
    bound = 1 << u
    y = _feistel_even(x, rks, u + 1)
    while y >= bound:
        y = _feistel_even(y, rks, u + 1)
    return y


def feistel_invert(x: int, seed: HashSeed, u: int) -> int:
    _check_feistel_args(x, u)
    if u % 2 == 0:
        rks = _round_keys(seed, u)
        return _feistel_even_inv(x, rks, u)
    rks = _round_keys(seed, u + 1)
    bound = 1 << u
    y = _feistel_even_inv(x, rks, u + 1)
    while y >= bound:
        y = _feistel_even_inv(y, rks, u + 1)
    return y


def feistel_permute_np(xs: np.ndarray, seed: HashSeed, u: int) -> np.ndarray:
    """Vectorized feistel_permute over a uint64 array."""
    if not (2 <= u <= 64):
        raise ParameterError(f"feistel width {u} outside [2, 64]")
    if u % 2 == 0:
        return _feistel_even_np(xs, _round_keys(seed, u), u)
    rks = _round_keys(seed, u + 1)
    bound = np.uint64(1 << u)
    y = _feistel_even_np(xs, rks, u + 1)
    bad = y >= bound
    while bad.any():
        y[bad] = _feistel_even_np(y[bad], rks, u + 1)
        bad = y >= bound
    return y


def _feistel_even_np(xs: np.ndarray, rks: list[int], u: int) -> np.ndarray:
    half = np.uint64(u // 2)
    mask = np.uint64(((1 << (u // 2)) - 1))
    x = xs.astype(np.uint64, copy=False)
    left = x >> half
    right = x & mask
    for rk in rks:
        f = _mix64_np(right ^ np.uint64(rk)) & mask
        left, right = right, left ^ f
    return (left << half) | right
