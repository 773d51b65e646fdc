"""Statistical validation of extracted bit streams.

A native battery of p-value tests (monobit, block frequency, runs, byte
chi-square) run over disjoint sub-streams, Kolmogorov-Smirnov aggregation
of the resulting p-values against Uniform(0,1), bitwise autocorrelation
with a three-sigma bound, and bit-exact raw export for external suites
such as dieharder.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.fft
import scipy.signal
from scipy.special import kolmogorov
from scipy.stats import chi2

from . import bitstream
from .bitstream import BitStream

DEFAULT_BLOCK_LEN = 128
# Smallest sub-stream every battery test accepts: the byte chi-square needs
# 2048 bits and block frequency needs 100 blocks of DEFAULT_BLOCK_LEN.
MIN_SUBSTREAM_BITS = max(2048, 100 * DEFAULT_BLOCK_LEN)


@dataclass(frozen=True)
class AutocorrResult:
    """Normalized bitwise autocorrelation up to a maximum lag."""

    coefficients: np.ndarray  # index = lag, coefficients[0] == 1
    n_bits: int
    three_sigma_bound: float


@dataclass(frozen=True)
class PValueSet:
    """Named p-values from the battery: (test, substream index, p)."""

    entries: tuple[tuple[str, int, float], ...]

    def __post_init__(self):
        for test, _, p in self.entries:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{test}: p-value {p} outside [0, 1]")

    @property
    def pvalues(self) -> np.ndarray:
        return np.array([p for _, _, p in self.entries])

    def by_test(self) -> dict[str, np.ndarray]:
        grouped: dict[str, list[float]] = {}
        for test, _, p in self.entries:
            grouped.setdefault(test, []).append(p)
        return {t: np.array(ps) for t, ps in grouped.items()}


def _as_bits(bits) -> np.ndarray:
    if isinstance(bits, BitStream):
        return bits.to_bits()
    return np.asarray(bits, dtype=np.uint8).ravel()


def cross_correlate(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Full raw cross-correlation Z[k] = sum_l x[l] * y[l-k+N-1].

    Unnormalized, length ||x||+||y||-1; the self-correlation of a sequence
    peaks at the center (zero lag).
    """
    return scipy.signal.correlate(
        np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64), mode="full"
    )


def autocorrelation(bits, max_lag: int) -> AutocorrResult:
    """Normalized autocorrelation of the +/-1-mapped bit sequence.

    rho(k) = (1/(n-k)) * sum_i s_i * s_{i+k} for k = 0..max_lag, computed
    via FFT with zero padding (no circular wrap).  Under the uniform null
    each rho(k>0) is approximately N(0, 1/n), hence the reported 3/sqrt(n)
    bound.
    """
    s = _as_bits(bits).astype(np.float64) * 2.0 - 1.0
    n = s.size
    if n < max_lag + 1:
        raise ValueError(f"need at least max_lag+1 = {max_lag + 1} bits, got {n}")
    size = scipy.fft.next_fast_len(n + max_lag)
    spectrum = scipy.fft.rfft(s, size)
    raw = scipy.fft.irfft(spectrum * spectrum.conj(), size)[: max_lag + 1]
    coeffs = raw / (n - np.arange(max_lag + 1))
    coeffs[0] = 1.0  # exact by construction; overwrite FFT roundoff
    return AutocorrResult(
        coefficients=coeffs, n_bits=n, three_sigma_bound=3.0 / math.sqrt(n)
    )


def monobit_test(bits) -> float:
    """Frequency test: p = erfc(|sum +/-1| / sqrt(2n))."""
    b = _as_bits(bits)
    n = b.size
    if n < 100:
        raise ValueError(f"monobit test needs >= 100 bits, got {n}")
    s = 2.0 * float(b.sum()) - n
    return float(math.erfc(abs(s) / math.sqrt(2.0 * n)))


def runs_test(bits) -> float:
    """Total-runs test; presupposes the monobit proportion is plausible."""
    b = _as_bits(bits)
    n = b.size
    if n < 100:
        raise ValueError(f"runs test needs >= 100 bits, got {n}")
    pi = float(b.mean())
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return 0.0  # proportion prerequisite failed; maximally non-random
    v = 1 + int(np.count_nonzero(np.diff(b)))
    num = abs(v - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    return float(math.erfc(num / den))


def block_frequency_test(bits, block_len: int = DEFAULT_BLOCK_LEN) -> float:
    """Per-block ones-proportion chi-square over >= 100 blocks."""
    b = _as_bits(bits)
    n_blocks = b.size // block_len
    if n_blocks < 100:
        raise ValueError(
            f"block frequency test needs >= 100 blocks of {block_len}, got {n_blocks}"
        )
    props = b[: n_blocks * block_len].reshape(n_blocks, block_len).mean(axis=1)
    stat = 4.0 * block_len * float(np.sum((props - 0.5) ** 2))
    return float(chi2.sf(stat, n_blocks))


def chi_square_bytes(bits) -> float:
    """Chi-square uniformity over byte values (255 degrees of freedom)."""
    b = _as_bits(bits)
    if b.size < 2048:
        raise ValueError(f"byte chi-square needs >= 2048 bits, got {b.size}")
    n_bytes = b.size // 8
    values = np.packbits(b[: n_bytes * 8], bitorder="little")
    observed = np.bincount(values, minlength=256)
    expected = n_bytes / 256.0
    stat = float(np.sum((observed - expected) ** 2) / expected)
    return float(chi2.sf(stat, 255))


def ks_uniformity(pvalues) -> tuple[float, float]:
    """One-sample KS of p-values against Uniform(0,1).

    Returns (D, p) with the p-value from the asymptotic Kolmogorov
    distribution; sample counts in this suite (>= tens) make the asymptotic
    form adequate.
    """
    if isinstance(pvalues, PValueSet):
        values = pvalues.pvalues
    else:
        values = np.asarray(pvalues, dtype=np.float64).ravel()
    n = values.size
    if n < 5:
        raise ValueError(f"KS aggregation needs >= 5 p-values, got {n}")
    ordered = np.sort(values)
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - ordered))
    d_minus = float(np.max(ordered - (grid - 1.0 / n)))
    d = max(d_plus, d_minus)
    return d, float(kolmogorov(math.sqrt(n) * d))


BATTERY_TESTS = ("monobit", "block_frequency", "runs", "chi_square_bytes")

_TEST_FUNCS = {
    "monobit": monobit_test,
    "block_frequency": block_frequency_test,
    "runs": runs_test,
    "chi_square_bytes": chi_square_bytes,
}


def run_battery(bits, n_substreams: int | None = None) -> PValueSet:
    """Run every battery test on disjoint equal-length sub-streams.

    Defaults to 100 sub-streams, reduced if the input is too short to give
    each one MIN_SUBSTREAM_BITS.
    """
    b = _as_bits(bits)
    if n_substreams is None:
        n_substreams = min(100, b.size // MIN_SUBSTREAM_BITS)
    if n_substreams < 1:
        raise ValueError(
            f"input too short for the battery: {b.size} bits < {MIN_SUBSTREAM_BITS}"
        )
    per = b.size // n_substreams
    if per < MIN_SUBSTREAM_BITS:
        raise ValueError(
            f"{n_substreams} sub-streams of {per} bits are below the "
            f"{MIN_SUBSTREAM_BITS}-bit minimum"
        )
    entries = []
    for index in range(n_substreams):
        sub = b[index * per : (index + 1) * per]
        for test in BATTERY_TESTS:
            entries.append((test, index, _TEST_FUNCS[test](sub)))
    return PValueSet(entries=tuple(entries))


def export_raw(bits: BitStream, path: str | Path) -> int:
    """Write the packed bytes exactly as stored; returns bytes written."""
    return bitstream.write_raw(bits, path)


def import_raw(path: str | Path, bit_count: int | None = None) -> BitStream:
    """Read back a raw export (see `bitstream.read_raw` for bit_count)."""
    return bitstream.read_raw(path, bit_count)


def write_pvalues_csv(path: str | Path, pvalues: PValueSet) -> None:
    """CSV with (test, substream, p_value) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["test", "substream", "p_value"])
        for test, index, p in pvalues.entries:
            writer.writerow([test, index, repr(p)])


def write_autocorr_csv(path: str | Path, result: AutocorrResult) -> None:
    """CSV with (lag, rho, bound) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "rho", "bound"])
        for lag, rho in enumerate(result.coefficients):
            writer.writerow([lag, repr(float(rho)), repr(result.three_sigma_bound)])
