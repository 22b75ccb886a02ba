"""Balls-to-slots placement over nested power-of-two bin partitions.

An array of m slots is partitioned k+1 ways: depth 0 is the whole array,
depth i splits it into aligned bins of size s_i, with s_i at most half of
s_{i-1}.  Each ball hashes to a preferred slot (fixing one bin per depth)
and to a maximum depth; insertion places the ball at the deepest workable
depth and displaces at most one shallower resident per depth on its way,
so an insert moves at most k+1 balls while deletes move exactly one.
Deeper placements need fewer routing bits, which is the whole point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as kern
from ._bits import ceil_log2, ilog2_real, is_pow2, nearest_pow2
from .errors import (
    CapacityError,
    DuplicateKeyError,
    EmptyStructureError,
    KeyNotFoundError,
    ParameterError,
)
from .hashing import DepthCapDistribution, HashSeed, depth_cap, depth_cap_np, hash_point, hash_point_np

SPECIAL = -1  # placement depth for overflow side-list entries

_TAG_PREF = 0x70726566


def default_bin_sizes(m: int, k: int, size_exponent: int = 6) -> tuple[int, ...]:
    """s_0 = m and s_i = clamp(nearest pow2 of (log^(i) m)^e, 2, s_{i-1}/2).

    The iterated log here is real-valued (floored at 1); only the
    depth-cap thresholds use the integer ceiling convention.
    """
    if not is_pow2(m) or m < 2:
        raise ParameterError("m must be a power of two >= 2")
    if size_exponent < 1:
        raise ParameterError("size_exponent must be positive")
    sizes = [m]
    for i in range(1, k + 1):
        ceiling = sizes[-1] // 2
        if ceiling < 2:
            raise ParameterError(f"k={k} too deep for m={m}")
        target = ilog2_real(m, i) ** size_exponent
        sizes.append(min(max(nearest_pow2(target), 2), ceiling))
    return tuple(sizes)


def max_feasible_k(m: int, k: int, size_exponent: int = 6) -> int:
    """Largest k' <= k for which default sizing is constructible at m."""
    while k > 0:
        try:
            default_bin_sizes(m, k, size_exponent)
            return k
        except ParameterError:
            k -= 1
    return 0


@dataclass(frozen=True)
class KickTreeConfig:
    m: int
    k: int
    bin_sizes: tuple[int, ...]
    size_exponent: int
    depth_dist: DepthCapDistribution

    def __post_init__(self):
        if not is_pow2(self.m):
            raise ParameterError("m must be a power of two")
        if len(self.bin_sizes) != self.k + 1 or self.bin_sizes[0] != self.m:
            raise ParameterError("bin_sizes must run s_0=m .. s_k")
        prev = None
        for s in self.bin_sizes:
            if not is_pow2(s) or s < 2:
                raise ParameterError("bin sizes must be powers of two >= 2")
            if prev is not None and (s > prev // 2 or prev % s):
                raise ParameterError("each size must divide and halve its parent")
            prev = s
        if self.depth_dist.k != self.k:
            raise ParameterError("depth distribution arity mismatch")

    @classmethod
    def default(cls, m: int, k: int, size_exponent: int = 6) -> "KickTreeConfig":
        sizes = default_bin_sizes(m, k, size_exponent)
        return cls(m, k, sizes, size_exponent, DepthCapDistribution.for_size(m, k))


@dataclass(frozen=True)
class Placement:
    depth: int  # in [0, k], or SPECIAL
    slot: int
    offset: int


@dataclass(frozen=True)
class MoveRecord:
    ball: int
    from_slot: int | None  # None when this record is the insertion itself
    to_slot: int
    depth: int


def probe_bits(p: Placement, m: int, bin_sizes: tuple[int, ...] | None = None) -> int:
    """Routing bits charged to a placement: 1 + ceil(log2 of its bin size).

    SPECIAL placements are charged as if routed across the whole array.
    """
    if p.depth == SPECIAL:
        return 1 + ceil_log2(m)
    if bin_sizes is None:
        raise ParameterError("bin_sizes required for non-special placements")
    return 1 + ceil_log2(bin_sizes[p.depth])


class KernelState:
    """Numpy arrays backing one placement kernel instance."""

    __slots__ = (
        "m", "k", "log_sizes", "depth_of", "bm0", "bm1", "bm2",
        "free_cnt", "low_cnt", "meta",
    )

    def __init__(self, m: int, sizes: tuple[int, ...]):
        k = len(sizes) - 1
        self.m = m
        self.k = k
        self.log_sizes = np.array([ceil_log2(s) for s in sizes], dtype=np.int64)
        self.depth_of = np.full(m, -1, dtype=np.int8)
        rows = k + 2
        w0 = max(1, -(-m // 64))
        w1 = max(1, -(-w0 // 64))
        w2 = max(1, -(-w1 // 64))
        self.bm0 = np.zeros((rows, w0), dtype=np.uint64)
        self.bm1 = np.zeros((rows, w1), dtype=np.uint64)
        self.bm2 = np.zeros((rows, w2), dtype=np.uint64)
        _fill_bitmap_row(self.bm0[0], self.bm1[0], self.bm2[0], m, w0, w1)
        nbins_max = max(1, m >> int(self.log_sizes[k]))
        self.free_cnt = np.zeros((k + 1, nbins_max), dtype=np.int64)
        self.low_cnt = np.zeros((k + 1, nbins_max), dtype=np.int64)
        for i in range(1, k + 1):
            nb = m >> int(self.log_sizes[i])
            self.free_cnt[i, :nb] = sizes[i]
        self.meta = np.zeros(2, dtype=np.int64)

    @property
    def occupancy(self) -> int:
        return int(self.meta[0])

    def args(self):
        return (
            self.depth_of, self.bm0, self.bm1, self.bm2,
            self.free_cnt, self.low_cnt, self.log_sizes, self.meta, self.k,
        )


def _fill_bitmap_row(r0: np.ndarray, r1: np.ndarray, r2: np.ndarray, nbits: int, w0: int, w1: int):
    full, rem = divmod(nbits, 64)
    r0[:full] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if rem:
        r0[full] = np.uint64((1 << rem) - 1)
    used0 = full + (1 if rem else 0)
    full1, rem1 = divmod(used0, 64)
    r1[:full1] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if rem1:
        r1[full1] = np.uint64((1 << rem1) - 1)
    used1 = full1 + (1 if rem1 else 0)
    full2, rem2 = divmod(used1, 64)
    r2[:full2] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if rem2:
        r2[full2] = np.uint64((1 << rem2) - 1)


class KickTree:
    """Standalone kick tree over integer ball ids.

    A single instance is not thread-safe; hand it between threads whole.
    """

    def __init__(self, config: KickTreeConfig, seed: HashSeed):
        self.config = config
        self.seed = seed
        self._pref_seed = seed.derive(_TAG_PREF)
        self.state = KernelState(config.m, config.bin_sizes)
        self.slot_ball = np.zeros(config.m, dtype=np.uint64)
        self._slots: dict[int, int] = {}
        self._rec_from = np.empty(config.k + 2, dtype=np.int64)
        self._rec_to = np.empty(config.k + 2, dtype=np.int64)
        self._rec_depth = np.empty(config.k + 2, dtype=np.int64)

    # -- hashing ------------------------------------------------------

    def preferred_slot(self, ball: int) -> int:
        return hash_point(ball, self._pref_seed, self.config.m)

    def depth_cap_of(self, ball: int) -> int:
        return depth_cap(ball, self.seed, self.config.depth_dist)

    # -- operations ---------------------------------------------------

    @property
    def occupancy(self) -> int:
        return self.state.occupancy

    def insert(self, ball: int) -> list[MoveRecord]:
        if ball in self._slots:
            raise DuplicateKeyError(ball)
        if self.occupancy >= self.config.m:
            raise CapacityError("kick tree full")
        n = kern.kt_insert(
            *self.state.args(),
            self.preferred_slot(ball), self.depth_cap_of(ball),
            self._rec_from, self._rec_to, self._rec_depth,
        )
        if n < 0:
            raise AssertionError("placement invariant violated")
        moved = [int(ball)]
        for r in range(1, n):
            moved.append(int(self.slot_ball[self._rec_from[r]]))
        records = []
        for r in range(n):
            to = int(self._rec_to[r])
            self.slot_ball[to] = moved[r]
            self._slots[moved[r]] = to
            records.append(MoveRecord(
                ball=moved[r],
                from_slot=None if r == 0 else int(self._rec_from[r]),
                to_slot=to,
                depth=int(self._rec_depth[r]),
            ))
        return records

    def insert_many(self, balls: np.ndarray, track: bool = True) -> np.ndarray:
        """Bulk insertion; returns per-insert move counts.

        With track=False the ball->slot map is not maintained, which is
        enough for measurement runs that never delete or locate.
        """
        balls = balls.astype(np.uint64, copy=False)
        if self.occupancy + len(balls) > self.config.m:
            raise CapacityError("batch exceeds capacity")
        prefs = hash_point_np(balls, self._pref_seed, self.config.m).astype(np.int64)
        caps = depth_cap_np(balls, self.seed, self.config.depth_dist).astype(np.int64)
        counts = np.empty(len(balls), dtype=np.int64)
        res = kern.kt_bulk_insert(
            *self.state.args(), prefs, caps, self.slot_ball, balls, counts,
        )
        if res < 0:
            raise AssertionError("placement invariant violated")
        if track:
            occupied = np.nonzero(self.state.depth_of >= 0)[0]
            self._slots = {int(self.slot_ball[s]): int(s) for s in occupied}
        return counts

    def delete(self, ball: int) -> None:
        slot = self._slots.pop(ball, None)
        if slot is None:
            raise KeyNotFoundError(ball)
        kern.kt_delete(*self.state.args(), slot)

    def locate(self, ball: int) -> Placement:
        slot = self._slots.get(ball)
        if slot is None:
            raise KeyNotFoundError(ball)
        depth = int(self.state.depth_of[slot])
        size = self.config.bin_sizes[depth]
        return Placement(depth=depth, slot=slot, offset=slot & (size - 1))

    def probe_bits(self, p: Placement) -> int:
        return probe_bits(p, self.config.m, self.config.bin_sizes)

    def average_probe_bits(self) -> Fraction:
        occ = self.occupancy
        if occ == 0:
            raise EmptyStructureError("no balls present")
        total = int(kern.kt_probe_bit_sum(self.state.depth_of, self.state.log_sizes))
        return Fraction(total, occ)

    def is_saturated(self, depth: int, bin_index: int) -> bool:
        if not (1 <= depth <= self.config.k):
            raise ParameterError("saturation is defined for depths in [1, k]")
        nb = self.config.m >> int(self.state.log_sizes[depth])
        if not (0 <= bin_index < nb):
            raise ParameterError("bin index out of range")
        return (
            self.state.free_cnt[depth, bin_index] == 0
            and self.state.low_cnt[depth, bin_index] == 0
        )

    def occupied_slots(self) -> np.ndarray:
        return np.nonzero(self.state.depth_of >= 0)[0]
