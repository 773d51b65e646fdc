"""Pure-numpy Toeplitz hashing backend.

Fallback used when the compiled kernel is unavailable.  The hash matrix is
materialized once per seed as float32 and blocks are processed through a
BLAS matmul; float32 sums are exact up to 2**24, far above any block size
in use, and the final reduction mod 2 recovers the GF(2) product.
"""

from __future__ import annotations

import numpy as np

name = "numpy"

_CHUNK_BLOCKS = 256


class Kernel:
    """Per-seed extractor state: hash matrix staged for batched matmul."""

    def __init__(self, seed_bits: np.ndarray, n: int, m: int):
        seed_bits = np.asarray(seed_bits, dtype=np.uint8)
        if seed_bits.size != n + m - 1:
            raise ValueError("seed length must be n + m - 1")
        self.n = n
        self.m = m
        # Row i of the hash matrix is bits [m-1-i, m-1-i+n) of the reversed
        # seed, so the full matrix is the reversed stack of sliding windows.
        windows = np.lib.stride_tricks.sliding_window_view(seed_bits[::-1], n)
        self._matrix_t = np.ascontiguousarray(windows[::-1].T, dtype=np.float32)

    def extract(self, blocks: np.ndarray) -> np.ndarray:
        """Hash a (B, n) array of 0/1 bits into a (B, m) array of 0/1 bits."""
        blocks = np.asarray(blocks, dtype=np.uint8)
        if blocks.ndim != 2 or blocks.shape[1] != self.n:
            raise ValueError(f"blocks must have shape (B, {self.n})")
        out = np.empty((blocks.shape[0], self.m), dtype=np.uint8)
        for start in range(0, blocks.shape[0], _CHUNK_BLOCKS):
            chunk = blocks[start : start + _CHUNK_BLOCKS].astype(np.float32)
            prod = chunk @ self._matrix_t
            out[start : start + _CHUNK_BLOCKS] = prod.astype(np.int64) & 1
        return out
