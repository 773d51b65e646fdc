"""Toeplitz randomness extraction with compiled and numpy kernels."""

from .toeplitz import (
    LeftoverHashResult,
    ToeplitzSeed,
    active_backend,
    codes_to_bits,
    extract_bits,
    extract_block,
    extract_fast,
    leftover_hash_check,
    make_kernel,
    stream_extract,
    toeplitz_matrix,
)

__all__ = [
    "LeftoverHashResult",
    "ToeplitzSeed",
    "active_backend",
    "codes_to_bits",
    "extract_bits",
    "extract_block",
    "extract_fast",
    "leftover_hash_check",
    "make_kernel",
    "stream_extract",
    "toeplitz_matrix",
]
