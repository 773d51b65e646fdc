# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Toeplitz hashing backend.

Packs the hash matrix rows and the input blocks into 64-bit words; each
output bit is the parity of the popcount of row AND block, folded to a
single word XOR chain.  Little-endian hosts only (word packing matches the
LSB-first stream bit order via a raw byte view).
"""

from libc.stdint cimport uint8_t, uint64_t

import numpy as np

name = "compiled"

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define qrng_parity64(x) __builtin_parityll(x)
    #else
    static int qrng_parity64(unsigned long long x) {
        x ^= x >> 32; x ^= x >> 16; x ^= x >> 8;
        x ^= x >> 4;  x ^= x >> 2;  x ^= x >> 1;
        return (int)(x & 1);
    }
    #endif
    """
    int qrng_parity64(uint64_t x) nogil


def _pack_bits_to_words(bits, Py_ssize_t words):
    """Pack a 2-D 0/1 uint8 array into little-endian uint64 words per row."""
    packed = np.packbits(bits, axis=1, bitorder="little")
    padded = np.zeros((packed.shape[0], words * 8), dtype=np.uint8)
    padded[:, : packed.shape[1]] = packed
    return np.ascontiguousarray(padded.view("<u8"))


cdef void _window_rows(const uint64_t[::1] src, uint64_t[:, ::1] rows,
                       Py_ssize_t n, Py_ssize_t m, Py_ssize_t words) noexcept nogil:
    # rows[i] = bits [m-1-i, m-1-i+n) of src, packed.
    cdef Py_ssize_t i, w, base, shift, offset
    cdef uint64_t value, tail_mask
    tail_mask = (<uint64_t>1 << (n & 63)) - 1 if n & 63 else ~(<uint64_t>0)
    for i in range(m):
        offset = m - 1 - i
        base = offset >> 6
        shift = offset & 63
        for w in range(words):
            value = src[base + w] >> shift
            if shift:
                value |= src[base + w + 1] << (64 - shift)
            rows[i, w] = value
        rows[i, words - 1] &= tail_mask


cdef void _hash_blocks(const uint64_t[:, ::1] rows, const uint64_t[:, ::1] x,
                       uint8_t[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t nblocks = x.shape[0], words = x.shape[1], m = rows.shape[0]
    cdef Py_ssize_t b, i, w
    cdef uint64_t fold
    for b in range(nblocks):
        for i in range(m):
            fold = 0
            for w in range(words):
                fold ^= rows[i, w] & x[b, w]
            out[b, i] = <uint8_t>qrng_parity64(fold)


class Kernel:
    """Per-seed extractor state: word-packed hash matrix rows."""

    def __init__(self, seed_bits, n, m):
        seed_bits = np.asarray(seed_bits, dtype=np.uint8)
        if seed_bits.size != n + m - 1:
            raise ValueError("seed length must be n + m - 1")
        self.n = int(n)
        self.m = int(m)
        self._words = (self.n + 63) // 64
        reversed_bits = np.ascontiguousarray(seed_bits[::-1])
        src_words = (seed_bits.size + 63) // 64 + 1  # +1 guard for the shifts
        src = _pack_bits_to_words(reversed_bits[None, :], src_words)[0]
        rows = np.empty((self.m, self._words), dtype=np.uint64)
        _window_rows(src, rows, self.n, self.m, self._words)
        self._rows = rows

    def extract(self, blocks):
        """Hash a (B, n) array of 0/1 bits into a (B, m) array of 0/1 bits."""
        blocks = np.asarray(blocks, dtype=np.uint8)
        if blocks.ndim != 2 or blocks.shape[1] != self.n:
            raise ValueError(f"blocks must have shape (B, {self.n})")
        packed = _pack_bits_to_words(blocks, self._words)
        out = np.empty((blocks.shape[0], self.m), dtype=np.uint8)
        _hash_blocks(self._rows, packed, out)
        return out
