"""Bit-string helpers and integer-log utilities.

Bit strings are `(value, length)` pairs of Python ints.  Bit 0 of `value`
is the *first* bit of the string, so streams read low-to-high and
concatenation is `a | (b << len_a)`.
"""

from __future__ import annotations

import math

from .errors import ParameterError

MASK64 = (1 << 64) - 1

EMPTY_BITS = (0, 0)


def concat_bits(*chunks: tuple[int, int]) -> tuple[int, int]:
    val = 0
    pos = 0
    for v, n in chunks:
        val |= v << pos
        pos += n
    return val, pos


def read_field(value: int, pos: int, width: int) -> int:
    return (value >> pos) & ((1 << width) - 1)


def ceil_log2(x: int) -> int:
    """Smallest p with 2**p >= x (x >= 1)."""
    if x < 1:
        raise ParameterError(f"ceil_log2 of {x}")
    return (x - 1).bit_length()


def is_pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


def nearest_pow2(x: float) -> int:
    """Power of two closest to x (ties round down); x >= 1."""
    if x < 1:
        raise ParameterError(f"nearest_pow2 of {x}")
    lo = 1 << (int(x).bit_length() - 1)
    hi = lo << 1
    return lo if x - lo <= hi - x else hi


def ilog2_ceil(n: int, i: int) -> int:
    """i-times iterated ceiling log2 of n, floored at 1.

    The i = 0 case returns n itself; each iteration never drops below 1,
    so deep iterates stay at a usable constant instead of going sub-unit.
    """
    v = n
    for _ in range(i):
        v = max(ceil_log2(max(v, 2)), 1)
    return v


def ilog2_real(n: float, i: int) -> float:
    """Real-valued iterated log2, floored at 1.0."""
    v = float(n)
    for _ in range(i):
        v = max(math.log2(max(v, 2.0)), 1.0)
    return v


def log_star(n: int) -> int:
    """Number of ceil-log2 iterations until the value reaches 1."""
    count = 0
    v = n
    while v > 1:
        v = ceil_log2(v)
        count += 1
    return count


def zigzag(v: int) -> int:
    return 2 * v if v >= 0 else -2 * v - 1


def unzigzag(z: int) -> int:
    return z // 2 if z % 2 == 0 else -(z + 1) // 2


def gamma_encode(x: int) -> tuple[int, int]:
    """Elias-gamma code of x >= 1 as an LSB-first bit string.

    Layout: N zero bits, a one bit, then the low N bits of x, where
    N = floor(log2 x).  Total length 2N + 1.
    """
    if x < 1:
        raise ParameterError(f"gamma_encode of {x}")
    n = x.bit_length() - 1
    low = x - (1 << n)
    val = (1 << n) | (low << (n + 1))
    return val, 2 * n + 1


def gamma_decode(bits: int, length: int, pos: int) -> tuple[int, int]:
    """Decode one gamma code at `pos`; returns (value, next position)."""
    n = 0
    while pos + n < length and not (bits >> (pos + n)) & 1:
        n += 1
    if pos + n >= length:
        raise ParameterError("truncated gamma code")
    pos += n + 1
    low = read_field(bits, pos, n)
    return (1 << n) | low, pos + n


def select_one(bits: int, rank: int) -> int:
    """Position of the rank-th set bit (0-based) of `bits`, or -1."""
    pos = 0
    v = bits
    while v:
        tz = (v & -v).bit_length() - 1
        pos += tz
        if rank == 0:
            return pos
        rank -= 1
        v >>= tz + 1
        pos += 1
    return -1
