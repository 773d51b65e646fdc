"""Packed bit sequences with a fixed, documented bit order.

Bit k of a stream lives in byte ``k // 8`` at bit position ``k % 8``
(LSB-first within each byte).  Trailing pad bits in the final byte are
always zero.  Files are the packed bytes with no header, directly usable
as raw binary input for external test suites.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class BitStream:
    """An immutable packed bit sequence."""

    data: bytes
    bit_count: int

    def __post_init__(self):
        expected = (self.bit_count + 7) // 8
        if len(self.data) != expected:
            raise ValueError(
                f"{self.bit_count} bits need {expected} bytes, got {len(self.data)}"
            )
        pad = 8 * len(self.data) - self.bit_count
        if pad and self.data and (self.data[-1] >> (8 - pad)):
            raise ValueError("trailing pad bits must be zero")

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "BitStream":
        """Pack an array of 0/1 values, first element -> LSB of byte 0."""
        bits = np.asarray(bits, dtype=np.uint8).ravel()
        return cls(data=np.packbits(bits, bitorder="little").tobytes(),
                   bit_count=int(bits.size))

    def to_bits(self) -> np.ndarray:
        """Unpack to a uint8 array of 0/1 values."""
        raw = np.frombuffer(self.data, dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little", count=self.bit_count)

    def __len__(self) -> int:
        return self.bit_count

    @property
    def byte_count(self) -> int:
        return len(self.data)


EMPTY = BitStream(data=b"", bit_count=0)


def write_raw(stream: BitStream, path: str | Path) -> int:
    """Write the packed bytes (no header); returns the byte count written."""
    Path(path).write_bytes(stream.data)
    return stream.byte_count


def read_raw(path: str | Path, bit_count: int | None = None) -> BitStream:
    """Read a packed bit file.

    The headerless format stores whole bytes only, so callers that packed a
    non-byte-aligned stream must pass the original ``bit_count`` to recover
    it exactly; by default all ``8 * size`` bits are taken.
    """
    data = Path(path).read_bytes()
    if bit_count is None:
        bit_count = 8 * len(data)
    return BitStream(data=data, bit_count=bit_count)
