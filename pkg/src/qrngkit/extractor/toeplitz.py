"""Seeded Toeplitz hashing over GF(2).

The hash matrix T of an (n -> m) block is defined by a seed of n+m-1 bits:
``T[i][j] = seed.bits[i - j + n - 1]``.  `extract_block` is the plain
reference implementation of ``out[i] = XOR_j T[i][j] & input[j]``;
`extract_fast` and `stream_extract` run the same contract through the
fastest available kernel (compiled extension if built, numpy otherwise,
selected at import; override with ``QRNGKIT_BACKEND=compiled|numpy``).

Output bits of consecutive blocks are concatenated LSB-first; a trailing
partial input block is discarded rather than padded, since padding would
bias the final block.
"""

from __future__ import annotations

import hashlib
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..bitstream import BitStream
from ..config import ExtractorConfig
from ..rawblock import RawCodeBlock
from . import _kernel_np

_kernel_cy = None
if sys.byteorder == "little":  # the compiled word packing assumes LE
    try:
        from . import _kernel_cy  # type: ignore[no-redef]
    except ImportError:
        _kernel_cy = None

_FORCED = os.environ.get("QRNGKIT_BACKEND")
if _FORCED == "numpy":
    _backend = _kernel_np
elif _FORCED == "compiled":
    if _kernel_cy is None:
        raise ImportError("QRNGKIT_BACKEND=compiled but the extension is not built")
    _backend = _kernel_cy
else:
    _backend = _kernel_cy if _kernel_cy is not None else _kernel_np

SEED_KEY_BYTES = 32
_EXTRACT_BATCH = 512


def active_backend() -> str:
    """Name of the kernel handling extract_fast/stream_extract: compiled or numpy."""
    return _backend.name


@dataclass(frozen=True)
class ToeplitzSeed:
    """The n+m-1 seed bits defining one (n -> m) hash matrix."""

    bits: np.ndarray = field(repr=False)
    n: int
    m: int

    def __post_init__(self):
        bits = np.ascontiguousarray(np.asarray(self.bits, dtype=np.uint8))
        object.__setattr__(self, "bits", bits)
        if self.m < 1 or self.m > self.n:
            raise ValueError(f"need 1 <= m <= n, got n={self.n}, m={self.m}")
        if bits.size != self.n + self.m - 1:
            raise ValueError(
                f"seed needs n+m-1 = {self.n + self.m - 1} bits, got {bits.size}"
            )
        if bits.size and bits.max() > 1:
            raise ValueError("seed bits must be 0 or 1")

    @classmethod
    def from_key(cls, key: bytes, n: int, m: int) -> "ToeplitzSeed":
        """Expand a 32-byte key into seed bits.

        Expansion is SHAKE-256(key) read as an LSB-first bit sequence, a
        fixed rule so any implementation can reproduce the matrix from the
        same key.
        """
        if len(key) != SEED_KEY_BYTES:
            raise ValueError(f"key must be {SEED_KEY_BYTES} bytes, got {len(key)}")
        nbits = n + m - 1
        digest = hashlib.shake_256(key).digest((nbits + 7) // 8)
        bits = np.unpackbits(
            np.frombuffer(digest, dtype=np.uint8), bitorder="little", count=nbits
        )
        return cls(bits=bits, n=n, m=m)

    @classmethod
    def from_file(cls, path: str | Path, n: int, m: int) -> "ToeplitzSeed":
        """Read a 32-byte key file and expand it (see `from_key`)."""
        key = Path(path).read_bytes()
        if len(key) != SEED_KEY_BYTES:
            raise ValueError(
                f"{path}: seed file must be exactly {SEED_KEY_BYTES} bytes, "
                f"got {len(key)}"
            )
        return cls.from_key(key, n, m)

    @classmethod
    def random(cls, n: int, m: int, seed: int) -> "ToeplitzSeed":
        """Uniformly random seed bits from a PRNG seed (tests, examples)."""
        rng = np.random.default_rng(seed)
        return cls(bits=rng.integers(0, 2, n + m - 1, dtype=np.uint8), n=n, m=m)


def toeplitz_matrix(seed: ToeplitzSeed) -> np.ndarray:
    """Materialize T as a dense (m, n) 0/1 array.  Reference path only."""
    i = np.arange(seed.m)[:, None]
    j = np.arange(seed.n)[None, :]
    return seed.bits[i - j + seed.n - 1]


def extract_block(seed: ToeplitzSeed, input_bits: np.ndarray) -> np.ndarray:
    """Reference GF(2) matrix-vector product: m output bits from n input bits."""
    x = np.asarray(input_bits, dtype=np.uint8)
    if x.shape != (seed.n,):
        raise ValueError(f"input must be {seed.n} bits, got shape {x.shape}")
    t = toeplitz_matrix(seed).astype(np.uint32)
    return ((t @ x.astype(np.uint32)) & 1).astype(np.uint8)


def extract_fast(seed: ToeplitzSeed, input_bits: np.ndarray) -> np.ndarray:
    """Same contract as `extract_block`, through the active kernel."""
    x = np.asarray(input_bits, dtype=np.uint8)
    if x.shape != (seed.n,):
        raise ValueError(f"input must be {seed.n} bits, got shape {x.shape}")
    return make_kernel(seed).extract(x[None, :])[0]


def make_kernel(seed: ToeplitzSeed):
    """Instantiate the active backend's per-seed kernel."""
    return _backend.Kernel(seed.bits, seed.n, seed.m)


def codes_to_bits(block: RawCodeBlock) -> BitStream:
    """Serialize ADC codes to bits, LSB of each code first, in sample order."""
    shifts = np.arange(block.adc_bits, dtype=np.uint16)
    bits = ((block.codes[:, None] >> shifts) & 1).astype(np.uint8)
    return BitStream.from_bits(bits.ravel())


def extract_bits(bits: np.ndarray, seed: ToeplitzSeed) -> BitStream:
    """Hash a flat bit array block by block; trailing partial block dropped."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    n_blocks = bits.size // seed.n
    if n_blocks == 0:
        return BitStream(data=b"", bit_count=0)
    blocks = bits[: n_blocks * seed.n].reshape(n_blocks, seed.n)
    kernel = make_kernel(seed)
    pieces = [
        kernel.extract(blocks[start : start + _EXTRACT_BATCH])
        for start in range(0, n_blocks, _EXTRACT_BATCH)
    ]
    return BitStream.from_bits(np.concatenate(pieces, axis=0).ravel())


def stream_extract(
    blocks, cfg: ExtractorConfig, seed: ToeplitzSeed
) -> BitStream:
    """Condition a sequence of raw code blocks into one output bit stream.

    The code bit streams are concatenated, partitioned into n-bit blocks,
    and hashed with the same seed throughout; output order matches input
    order.  Output length is ``floor(total_bits / n) * m``.
    """
    if seed.n != cfg.n or seed.m != cfg.m:
        raise ValueError(
            f"seed geometry ({seed.n}->{seed.m}) does not match config "
            f"({cfg.n}->{cfg.m})"
        )
    arrays = [codes_to_bits(b).to_bits() for b in blocks]
    if not arrays:
        return BitStream(data=b"", bit_count=0)
    return extract_bits(np.concatenate(arrays), seed)


@dataclass(frozen=True)
class LeftoverHashResult:
    """Outcome of the leftover-hash output-length check."""

    ok: bool
    m_max: int
    slack_bits: int


def leftover_hash_check(
    cfg: ExtractorConfig, min_entropy_rate: float
) -> LeftoverHashResult:
    """Check m against the leftover hash bound m <= n*h - 2*log2(1/eps).

    ``min_entropy_rate`` is the per-bit min-entropy h of the input (0..1);
    the statistical distance is eps = 2**-security_exponent.  Slack is how
    many more output bits the bound would allow (negative on failure).
    """
    if not 0.0 <= min_entropy_rate <= 1.0:
        raise ValueError(f"min_entropy_rate must be in [0, 1], got {min_entropy_rate}")
    # 1e-9 absorbs float representation error in rates like 7/12 so exact
    # integer products are not floored one short.
    budget = cfg.n * min_entropy_rate - 2.0 * cfg.security_exponent
    m_max = int(np.floor(budget + 1e-9))
    return LeftoverHashResult(ok=cfg.m <= m_max, m_max=m_max, slack_bits=m_max - cfg.m)
