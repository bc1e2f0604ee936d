# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Contracts and results match ``bitorder._purepy``."""

import numpy as np

from libc.stdint cimport int64_t, uint64_t
from cython.parallel cimport prange

cdef extern from *:
    """
    #include <stdint.h>
    static inline int bo_popcount(uint64_t x) { return __builtin_popcountll(x); }
    static inline int bo_ctz(uint64_t x) { return __builtin_ctzll(x); }
    static inline uint64_t bo_draw(uint64_t key, uint64_t i) {
        uint64_t z = key + i * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    """
    int bo_popcount(uint64_t x) nogil
    int bo_ctz(uint64_t x) nogil
    uint64_t bo_draw(uint64_t key, uint64_t i) nogil

cdef enum:
    MAX_RESAMPLE = 100
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _last_mask(Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t rem = d % 64
    if rem == 0:
        return 0xFFFFFFFFFFFFFFFFULL
    return (1ULL << rem) - 1


cdef inline void _add_bits(int64_t* row, Py_ssize_t base, uint64_t mask, int64_t v) noexcept nogil:
    while mask:
        row[base + bo_ctz(mask)] += v
        mask &= mask - 1


cdef inline bint _forbidden(int64_t h, int64_t t, int64_t n, const int64_t* indptr,
                            const int64_t* indices, const uint64_t* bitmap,
                            bint use_bitmap) noexcept nogil:
    cdef int64_t key, lo, hi, mid
    if use_bitmap:
        key = h * n + t
        return (bitmap[key >> 6] >> (key & 63)) & 1
    lo = indptr[h]
    hi = indptr[h + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        if indices[mid] < t:
            lo = mid + 1
        else:
            hi = mid
    return lo < indptr[h + 1] and indices[lo] == t


cdef inline int64_t _negative_pair(const uint64_t[:, ::1] words, Py_ssize_t W, uint64_t last,
                                   int64_t a, int64_t b, int64_t weight,
                                   int64_t[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t k
    cdef int64_t g = 0
    cdef uint64_t x, y, live
    cdef int64_t* pa
    cdef int64_t* pb
    for k in range(W):
        g += bo_popcount(~words[a, k] & words[b, k])
        if g > 1:
            return 0
    pa = &out[a, 0]
    pb = &out[b, 0]
    for k in range(W):
        x = words[a, k]
        y = words[b, k]
        if g == 0:
            live = last if k == W - 1 else 0xFFFFFFFFFFFFFFFFULL
            _add_bits(pa, k * 64, x & y, weight)
            _add_bits(pb, k * 64, ~x & ~y & live, weight)
        else:
            _add_bits(pa, k * 64, ~x & y, -weight)
            _add_bits(pb, k * 64, ~x & y, -weight)
    return 1 if g == 0 else 0


def violation_counts(const uint64_t[:, ::1] words, const int64_t[::1] heads,
                     const int64_t[::1] tails, int threads=1):
    cdef Py_ssize_t m = heads.shape[0], W = words.shape[1], i, k
    result = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] out = result
    cdef int64_t c
    for i in prange(m, nogil=True, num_threads=threads, schedule="static"):
        c = 0
        for k in range(W):
            c = c + bo_popcount(~words[heads[i], k] & words[tails[i], k])
        out[i] = c
    return result


def accumulate_positive(const uint64_t[:, ::1] words, Py_ssize_t d,
                        const int64_t[::1] heads, const int64_t[::1] tails,
                        int64_t weight, int64_t[:, ::1] out):
    cdef Py_ssize_t m = heads.shape[0], W = words.shape[1], i, k
    cdef uint64_t last = _last_mask(d), x, y, live
    cdef int64_t loss = 0, a, b
    cdef int64_t* pa
    cdef int64_t* pb
    with nogil:
        for i in range(m):
            a = heads[i]
            b = tails[i]
            pa = &out[a, 0]
            pb = &out[b, 0]
            for k in range(W):
                x = words[a, k]
                y = words[b, k]
                live = last if k == W - 1 else 0xFFFFFFFFFFFFFFFFULL
                loss += bo_popcount(~x & y)
                _add_bits(pa, k * 64, ~x & y, weight)
                _add_bits(pa, k * 64, x & y, -weight)
                _add_bits(pb, k * 64, ~x & y, weight)
                _add_bits(pb, k * 64, ~x & ~y & live, -weight)
    return loss


def accumulate_negative(const uint64_t[:, ::1] words, Py_ssize_t d,
                        const int64_t[::1] heads, const int64_t[::1] tails,
                        int64_t weight, int64_t[:, ::1] out):
    cdef Py_ssize_t m = heads.shape[0], W = words.shape[1], i
    cdef uint64_t last = _last_mask(d)
    cdef int64_t violated = 0
    with nogil:
        for i in range(m):
            violated += _negative_pair(words, W, last, heads[i], tails[i], weight, out)
    return violated


def sample_negatives(const int64_t[::1] heads, const int64_t[::1] tails, int64_t n,
                     int64_t n_minus, forbidden, uint64_t key, int threads=1):
    cdef const int64_t[::1] indptr = forbidden.indptr
    cdef const int64_t[::1] indices = forbidden.indices
    cdef const uint64_t[::1] bitmap = forbidden.bitmap
    cdef bint use_bitmap = forbidden.use_bitmap
    cdef const int64_t[::1] hcount = forbidden.head_counts
    cdef const int64_t[::1] tcount = forbidden.tail_counts
    cdef Py_ssize_t m = heads.shape[0], total = m * n_minus, s
    cdef int64_t half = n_minus // 2, i, k, attempt, r, ch, ct
    res_h = np.full(total, -1, dtype=np.int64)
    res_t = np.full(total, -1, dtype=np.int64)
    cdef int64_t[::1] oh = res_h
    cdef int64_t[::1] ot = res_t
    for s in prange(total, nogil=True, num_threads=threads, schedule="static"):
        i = s // n_minus
        k = s % n_minus
        if (k < half and tcount[tails[i]] >= n - 1) or (k >= half and hcount[heads[i]] >= n - 1):
            continue
        for attempt in range(MAX_RESAMPLE):
            r = <int64_t>(((bo_draw(key, <uint64_t>(s * MAX_RESAMPLE + attempt)) >> 32)
                           * <uint64_t>n) >> 32)
            if k < half:
                ch = r
                ct = tails[i]
            else:
                ch = heads[i]
                ct = r
            if ch != ct and not _forbidden(ch, ct, n, &indptr[0], &indices[0],
                                           &bitmap[0], use_bitmap):
                oh[s] = ch
                ot[s] = ct
                break
    keep = res_h >= 0
    return res_h[keep], res_t[keep]


def negative_epoch(const uint64_t[:, ::1] words, Py_ssize_t d,
                   const int64_t[::1] heads, const int64_t[::1] tails, int64_t n,
                   int64_t n_minus, forbidden, uint64_t key, int64_t weight,
                   int64_t[:, ::1] out):
    cdef const int64_t[::1] indptr = forbidden.indptr
    cdef const int64_t[::1] indices = forbidden.indices
    cdef const uint64_t[::1] bitmap = forbidden.bitmap
    cdef bint use_bitmap = forbidden.use_bitmap
    cdef const int64_t[::1] hcount = forbidden.head_counts
    cdef const int64_t[::1] tcount = forbidden.tail_counts
    cdef Py_ssize_t m = heads.shape[0], W = words.shape[1], i, k, s
    cdef int64_t half = n_minus // 2, attempt, r, ch, ct
    cdef int64_t violated = 0, sampled = 0
    cdef uint64_t last = _last_mask(d)
    with nogil:
        for i in range(m):
            for k in range(n_minus):
                s = i * n_minus + k
                if k < half:
                    if tcount[tails[i]] >= n - 1:
                        continue
                elif hcount[heads[i]] >= n - 1:
                    continue
                for attempt in range(MAX_RESAMPLE):
                    r = <int64_t>(((bo_draw(key, <uint64_t>(s * MAX_RESAMPLE + attempt)) >> 32)
                                   * <uint64_t>n) >> 32)
                    if k < half:
                        ch = r
                        ct = tails[i]
                    else:
                        ch = heads[i]
                        ct = r
                    if ch != ct and not _forbidden(ch, ct, n, &indptr[0], &indices[0],
                                                   &bitmap[0], use_bitmap):
                        sampled += 1
                        violated += _negative_pair(words, W, last, ch, ct, weight, out)
                        break
    return violated, sampled


def apply_flips(uint64_t[:, ::1] words, Py_ssize_t d, const double[:, ::1] prob,
                uint64_t key, int threads=1):
    cdef Py_ssize_t n = words.shape[0], w, j
    cdef int64_t flipped = 0
    cdef double p, u
    for w in prange(n, nogil=True, num_threads=threads, schedule="static"):
        for j in range(d):
            p = prob[w, j]
            if p > 0.0:
                u = <double>(bo_draw(key, <uint64_t>(w * d + j)) >> 11) * INV53
                if u < p:
                    words[w, j >> 6] ^= (1ULL << (j & 63))
                    flipped += 1
    return flipped


def full_adjacency(const uint64_t[:, ::1] words, closure, int threads=1):
    cdef const int64_t[::1] indptr = closure.indptr
    cdef const int64_t[::1] indices = closure.indices
    cdef Py_ssize_t n = words.shape[0], W = words.shape[1], a, b, k
    cdef int64_t tp = 0, fp = 0, fn = 0, ptr, end
    cdef bint pred, label
    cdef uint64_t v
    for a in prange(n, nogil=True, num_threads=threads, schedule="dynamic"):
        ptr = indptr[a]
        end = indptr[a + 1]
        for b in range(n):
            if b == a:
                continue
            v = 0
            for k in range(W):
                v = v | (~words[a, k] & words[b, k])
            pred = v == 0
            label = ptr < end and indices[ptr] == b
            if label:
                ptr = ptr + 1
            if pred and label:
                tp += 1
            elif pred:
                fp += 1
            elif label:
                fn += 1
    return tp, fp, fn, n * (n - 1) - tp - fp - fn
