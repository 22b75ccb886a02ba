"""Placement kernels for the nested-bin balls-to-slots scheme.

All state lives in flat numpy arrays so the same source runs either
jitted (numba) or interpreted (pure Python), selected in `_backend`.
The kernels know nothing about ball identities: they move slot contents
and report move records `(from_slot, to_slot, depth)`; callers translate
records into their own bookkeeping.

Bitmap rows: row 0 tracks free slots (this is the free-slot tree), row
`depth + 1` tracks slots holding a ball of that depth.  Each row carries
a three-level word hierarchy for O(1) find-first-in-range.
"""

from __future__ import annotations

import numpy as np

from ._backend import jit

U0 = np.uint64(0)
U1 = np.uint64(1)
ALL64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _ctz64(x):
    """Index of the lowest set bit of a nonzero uint64."""
    c = 0
    if (x & np.uint64(0xFFFFFFFF)) == U0:
        x = x >> np.uint64(32)
        c += 32
    if (x & np.uint64(0xFFFF)) == U0:
        x = x >> np.uint64(16)
        c += 16
    if (x & np.uint64(0xFF)) == U0:
        x = x >> np.uint64(8)
        c += 8
    if (x & np.uint64(0xF)) == U0:
        x = x >> np.uint64(4)
        c += 4
    if (x & np.uint64(0x3)) == U0:
        x = x >> np.uint64(2)
        c += 2
    if (x & np.uint64(0x1)) == U0:
        c += 1
    return c


def _bm_set(bm0, bm1, bm2, row, slot):
    w = slot >> 6
    bm0[row, w] |= U1 << np.uint64(slot & 63)
    w1 = w >> 6
    bm1[row, w1] |= U1 << np.uint64(w & 63)
    bm2[row, w1 >> 6] |= U1 << np.uint64(w1 & 63)


def _bm_clear(bm0, bm1, bm2, row, slot):
    w = slot >> 6
    bm0[row, w] &= ~(U1 << np.uint64(slot & 63))
    if bm0[row, w] == U0:
        w1 = w >> 6
        bm1[row, w1] &= ~(U1 << np.uint64(w & 63))
        if bm1[row, w1] == U0:
            bm2[row, w1 >> 6] &= ~(U1 << np.uint64(w1 & 63))


def _bm_next(bm0, bm1, bm2, row, lo, limit):
    """Smallest slot in [lo, limit) whose row bit is set, else -1."""
    if lo >= limit:
        return -1
    w = lo >> 6
    word = bm0[row, w] >> np.uint64(lo & 63)
    if word != U0:
        s = lo + _ctz64(word)
        if s < limit:
            return s
        return -1
    w1 = w >> 6
    nxt = -1
    off = (w & 63) + 1
    if off < 64:
        l1 = bm1[row, w1] >> np.uint64(off)
        if l1 != U0:
            nxt = w + 1 + _ctz64(l1)
    if nxt < 0:
        w2 = w1 >> 6
        n1 = -1
        off2 = (w1 & 63) + 1
        if off2 < 64:
            l2 = bm2[row, w2] >> np.uint64(off2)
            if l2 != U0:
                n1 = w1 + 1 + _ctz64(l2)
        if n1 < 0:
            for i in range(w2 + 1, bm2.shape[1]):
                if bm2[row, i] != U0:
                    n1 = (i << 6) + _ctz64(bm2[row, i])
                    break
        if n1 < 0:
            return -1
        nxt = (n1 << 6) + _ctz64(bm1[row, n1])
    s = (nxt << 6) + _ctz64(bm0[row, nxt])
    if s < limit:
        return s
    return -1


def _place(depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, k, slot, depth):
    depth_of[slot] = depth
    _bm_clear(bm0, bm1, bm2, 0, slot)
    _bm_set(bm0, bm1, bm2, depth + 1, slot)
    for i in range(1, k + 1):
        b = slot >> log_sizes[i]
        free_cnt[i, b] -= 1
        if depth < i:
            low_cnt[i, b] += 1


def _unplace(depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, k, slot):
    depth = depth_of[slot]
    depth_of[slot] = -1
    _bm_clear(bm0, bm1, bm2, depth + 1, slot)
    _bm_set(bm0, bm1, bm2, 0, slot)
    for i in range(1, k + 1):
        b = slot >> log_sizes[i]
        free_cnt[i, b] += 1
        if depth < i:
            low_cnt[i, b] -= 1
    return depth


def kt_choose_depth(free_cnt, low_cnt, log_sizes, k, pref, cap):
    """min(cap, deepest prefix depth with no saturated bin on the path)."""
    j = k
    for i in range(1, k + 1):
        b = pref >> log_sizes[i]
        if free_cnt[i, b] == 0 and low_cnt[i, b] == 0:
            j = i - 1
            break
    if cap < j:
        return cap
    return j


def kt_insert(
    depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, meta, k,
    pref, cap, rec_from, rec_to, rec_depth,
):
    """Place one new ball; returns the record count, or -1 on corruption.

    Record 0 is the inserted ball (from_slot == -1); later records are
    displaced residents, depths strictly decreasing.
    """
    d = kt_choose_depth(free_cnt, low_cnt, log_sizes, k, pref, cap)
    anchor = pref
    cur_from = -1
    n = 0
    while True:
        ls = log_sizes[d]
        lo = (anchor >> ls) << ls
        hi = lo + (1 << ls)
        s = _bm_next(bm0, bm1, bm2, 0, lo, hi)
        if s >= 0:
            rec_from[n] = cur_from
            rec_to[n] = s
            rec_depth[n] = d
            _place(depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, k, s, d)
            meta[0] += 1
            return n + 1
        v = -1
        vdepth = -1
        for c in range(d):
            v = _bm_next(bm0, bm1, bm2, c + 1, lo, hi)
            if v >= 0:
                vdepth = c
                break
        if v < 0:
            return -1
        rec_from[n] = cur_from
        rec_to[n] = v
        rec_depth[n] = d
        _unplace(depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, k, v)
        _place(depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, k, v, d)
        n += 1
        cur_from = v
        anchor = v
        d = vdepth


def kt_delete(depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, meta, k, slot):
    _unplace(depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, k, slot)
    meta[0] -= 1


def kt_bulk_insert(
    depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, meta, k,
    prefs, caps, slot_ball, balls, move_counts,
):
    """Insert a batch, tracking ball ids in slot_ball; returns max chain length."""
    rec_from = np.empty(k + 2, dtype=np.int64)
    rec_to = np.empty(k + 2, dtype=np.int64)
    rec_depth = np.empty(k + 2, dtype=np.int64)
    chain = np.empty(k + 2, dtype=np.uint64)
    max_moves = 0
    for idx in range(len(prefs)):
        n = kt_insert(
            depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, meta, k,
            prefs[idx], caps[idx], rec_from, rec_to, rec_depth,
        )
        if n < 0:
            return -1
        chain[0] = balls[idx]
        for r in range(1, n):
            chain[r] = slot_ball[rec_from[r]]
        for r in range(n):
            slot_ball[rec_to[r]] = chain[r]
        move_counts[idx] = n
        if n > max_moves:
            max_moves = n
    return max_moves


def kt_bulk_build(
    depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, meta, k,
    prefs, caps, out_slots,
):
    """Free-slot-only construction, deepest depth first; O(items) work.

    Returns the number placed (== len(prefs) whenever capacity allows).
    """
    n = len(prefs)
    placed = 0
    for i in range(n):
        out_slots[i] = -1
    for d in range(k, -1, -1):
        for i in range(n):
            if out_slots[i] >= 0 or caps[i] < d:
                continue
            ls = log_sizes[d]
            lo = (prefs[i] >> ls) << ls
            s = _bm_next(bm0, bm1, bm2, 0, lo, lo + (1 << ls))
            if s >= 0:
                _place(depth_of, bm0, bm1, bm2, free_cnt, low_cnt, log_sizes, k, s, d)
                out_slots[i] = s
                placed += 1
    meta[0] += placed
    return placed


def kt_probe_bit_sum(depth_of, log_sizes):
    """Sum over occupied slots of 1 + log2(bin size at the slot's depth)."""
    total = 0
    for slot in range(len(depth_of)):
        d = depth_of[slot]
        if d >= 0:
            total += 1 + log_sizes[d]
    return total


_ctz64 = jit(_ctz64)
_bm_set = jit(_bm_set)
_bm_clear = jit(_bm_clear)
_bm_next = jit(_bm_next)
_place = jit(_place)
_unplace = jit(_unplace)
kt_choose_depth = jit(kt_choose_depth)
kt_insert = jit(kt_insert)
kt_delete = jit(kt_delete)
kt_bulk_insert = jit(kt_bulk_insert)
kt_bulk_build = jit(kt_bulk_build)
kt_probe_bit_sum = jit(kt_probe_bit_sum)
