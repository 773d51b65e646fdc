"""Raw ADC code blocks and their on-disk format.

A `RawCodeBlock` carries the digitized output of one simulation run plus
the provenance needed to reproduce it (seed, config digest, LED state).

File format: a 32-byte header followed by the codes as little-endian
16-bit words with the low `adc_bits` bits significant and the high bits
zero.  Header layout (little-endian):

    bytes  0-7   magic b"QRNGRAW1"
    byte   8     adc_bits (uint8)
    byte   9     led_on flag (uint8, 0 or 1)
    bytes 10-11  reserved, zero (uint16)
    bytes 12-15  adc_sample_rate in Sa/s, rounded (uint32)
    bytes 16-23  rng_seed (uint64)
    bytes 24-31  config digest (8 bytes)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"QRNGRAW1"
_HEADER = struct.Struct("<8sBBHIQ8s")
assert _HEADER.size == 32


@dataclass(eq=False)
class RawCodeBlock:
    """A sequence of ADC codes with acquisition provenance."""

    codes: np.ndarray
    led_on: bool
    rng_seed: int
    config_digest: bytes = b"\x00" * 8
    adc_bits: int = 12
    sample_rate: float = 100e3

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.uint16)
        if self.codes.ndim != 1:
            raise ValueError("codes must be one-dimensional")
        if len(self.config_digest) != 8:
            raise ValueError("config_digest must be 8 bytes")
        limit = 1 << self.adc_bits
        if self.codes.size and int(self.codes.max()) >= limit:
            raise ValueError(f"codes do not fit in {self.adc_bits} bits")

    def __len__(self) -> int:
        return self.codes.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, RawCodeBlock):
            return NotImplemented
        return (
            self.led_on == other.led_on
            and self.rng_seed == other.rng_seed
            and self.config_digest == other.config_digest
            and self.adc_bits == other.adc_bits
            and self.sample_rate == other.sample_rate
            and np.array_equal(self.codes, other.codes)
        )


def write_block(block: RawCodeBlock, path: str | Path) -> int:
    """Write a block to disk; returns the number of bytes written."""
    header = _HEADER.pack(
        MAGIC,
        block.adc_bits,
        1 if block.led_on else 0,
        0,
        round(block.sample_rate),
        block.rng_seed & 0xFFFFFFFFFFFFFFFF,
        block.config_digest,
    )
    payload = block.codes.astype("<u2").tobytes()
    Path(path).write_bytes(header + payload)
    return len(header) + len(payload)


def read_block(path: str | Path) -> RawCodeBlock:
    """Read a block written by `write_block`, validating header and codes."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, adc_bits, led_on, _, rate, seed, digest = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size:]
    if len(body) % 2:
        raise ValueError(f"{path}: odd payload length")
    codes = np.frombuffer(body, dtype="<u2").astype(np.uint16)
    if codes.size and int(codes.max()) >= 1 << adc_bits:
        raise ValueError(f"{path}: codes exceed {adc_bits} bits")
    return RawCodeBlock(
        codes=codes,
        led_on=bool(led_on),
        rng_seed=seed,
        config_digest=digest,
        adc_bits=adc_bits,
        sample_rate=float(rate),
    )
