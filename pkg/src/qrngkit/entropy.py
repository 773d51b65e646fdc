"""Entropy metrics computed from raw code blocks.

Implements the figure-of-merit pipeline: per-code histogram, noise
statistics, quantum-to-classical noise ratio (QCNR), most-common-value
min-entropy, the recommended extraction ratio, and the linear/quadratic
variance-vs-current diagnostic used to confirm Poissonian scaling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .rawblock import RawCodeBlock


class NoQuantumSignalError(ValueError):
    """LED-on variance does not exceed the LED-off classical floor."""


@dataclass(frozen=True)
class Histogram:
    """Exact per-code counts over the full ADC code range."""

    bin_counts: np.ndarray
    total: int


@dataclass(frozen=True)
class NoiseStats:
    mean: float
    variance: float


@dataclass(frozen=True)
class LinearFitResult:
    slope: float
    intercept: float
    r_squared: float
    quadratic_coeff: float
    quadratic_t_stat: float


def histogram(block: RawCodeBlock) -> Histogram:
    """Count occurrences of every possible code in the block."""
    if len(block) == 0:
        raise ValueError("cannot histogram an empty block")
    counts = np.bincount(block.codes, minlength=1 << block.adc_bits)
    return Histogram(bin_counts=counts, total=int(counts.sum()))


def noise_stats(block: RawCodeBlock) -> NoiseStats:
    """Sample mean and unbiased (n-1) sample variance of the codes."""
    if len(block) < 2:
        raise ValueError("need at least 2 codes for noise statistics")
    codes = block.codes.astype(np.float64)
    return NoiseStats(mean=float(codes.mean()), variance=float(codes.var(ddof=1)))


def qcnr(stats_led_on: NoiseStats, stats_led_off: NoiseStats) -> float:
    """Quantum-to-classical noise ratio in dB.

    20*log10((var_on - var_off) / var_off), the device figure of merit as
    printed.  See `qcnr_power_db` for the 10*log10 power-ratio variant.
    """
    return 20.0 * math.log10(_quantum_to_classical_ratio(stats_led_on, stats_led_off))


def qcnr_power_db(stats_led_on: NoiseStats, stats_led_off: NoiseStats) -> float:
    """10*log10 variant of the QCNR, the conventional scaling for a power ratio."""
    return 10.0 * math.log10(_quantum_to_classical_ratio(stats_led_on, stats_led_off))


def _quantum_to_classical_ratio(on: NoiseStats, off: NoiseStats) -> float:
    if on.variance <= 0.0 or off.variance <= 0.0:
        raise ValueError("variances must be positive to compute a QCNR")
    if on.variance <= off.variance:
        raise NoQuantumSignalError(
            "no measurable quantum contribution: LED-on variance "
            f"({on.variance:g}) does not exceed LED-off variance ({off.variance:g})"
        )
    return (on.variance - off.variance) / off.variance


def min_entropy(hist: Histogram) -> float:
    """Most-common-value min-entropy in bits per sample: -log2(max p)."""
    if hist.total < 1:
        raise ValueError("histogram is empty")
    return float(-np.log2(hist.bin_counts.max() / hist.total))


def extraction_ratio(min_entropy_bits: float, clearance_bits: float) -> int:
    """Extractable bits per sample after subtracting a safety clearance."""
    if clearance_bits < 0.0:
        raise ValueError(f"clearance_bits must be >= 0, got {clearance_bits}")
    return max(0, math.floor(min_entropy_bits - clearance_bits))


def linearity_fit(sweep: Sequence[tuple[float, float]]) -> LinearFitResult:
    """Fit variance-vs-current with linear and quadratic models.

    The linear fit (ordinary least squares) carries the slope, intercept,
    and R^2; a separate quadratic fit reports its second-order coefficient
    and t-statistic, the super-Poissonian detector: |t| >= 3 flags a
    classically dominated (quadratic) trend.
    """
    pts = np.asarray(sweep, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("sweep must contain at least 3 (current, variance) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0.0:
        raise ValueError("sweep currents are degenerate (all equal)")

    design_lin = np.column_stack([np.ones_like(x), x])
    coef_lin, *_ = np.linalg.lstsq(design_lin, y, rcond=None)
    resid_lin = y - design_lin @ coef_lin
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - float(resid_lin @ resid_lin) / ss_tot

    design_quad = np.column_stack([np.ones_like(x), x, x * x])
    coef_quad, *_ = np.linalg.lstsq(design_quad, y, rcond=None)
    resid_quad = y - design_quad @ coef_quad
    dof = len(x) - 3
    t_stat = 0.0
    if dof > 0:
        s2 = float(resid_quad @ resid_quad) / dof
        gram_inv = np.linalg.inv(design_quad.T @ design_quad)
        se = math.sqrt(max(s2 * gram_inv[2, 2], 0.0))
        if se > 0.0:
            t_stat = float(coef_quad[2]) / se
        elif coef_quad[2] != 0.0:
            t_stat = math.inf
    return LinearFitResult(
        slope=float(coef_lin[1]),
        intercept=float(coef_lin[0]),
        r_squared=float(np.clip(r_squared, 0.0, 1.0)),
        quadratic_coeff=float(coef_quad[2]),
        quadratic_t_stat=t_stat,
    )


@dataclass(frozen=True)
class Characterization:
    """Everything the characterize step reports for an on/off block pair."""

    mean_on: float
    variance_on: float
    mean_off: float
    variance_off: float
    qcnr_db: float
    qcnr_power_db: float
    min_entropy_bits: float
    clearance_bits: float
    extraction_bits: int

    def rows(self) -> list[tuple[str, float, str]]:
        return [
            ("mean_led_on", self.mean_on, "code"),
            ("variance_led_on", self.variance_on, "code^2"),
            ("mean_led_off", self.mean_off, "code"),
            ("variance_led_off", self.variance_off, "code^2"),
            ("qcnr_printed_formula", self.qcnr_db, "dB"),
            ("qcnr_power_ratio", self.qcnr_power_db, "dB"),
            ("min_entropy", self.min_entropy_bits, "bits/sample"),
            ("clearance", self.clearance_bits, "bits"),
            ("extraction_ratio", float(self.extraction_bits), "bits/sample"),
        ]


def characterize(
    block_on: RawCodeBlock,
    block_off: RawCodeBlock,
    clearance_bits: float = 2.0,
) -> Characterization:
    """Compute the full entropy report for an LED-on / LED-off block pair."""
    stats_on = noise_stats(block_on)
    stats_off = noise_stats(block_off)
    h_min = min_entropy(histogram(block_on))
    return Characterization(
        mean_on=stats_on.mean,
        variance_on=stats_on.variance,
        mean_off=stats_off.mean,
        variance_off=stats_off.variance,
        qcnr_db=qcnr(stats_on, stats_off),
        qcnr_power_db=qcnr_power_db(stats_on, stats_off),
        min_entropy_bits=h_min,
        clearance_bits=clearance_bits,
        extraction_bits=extraction_ratio(h_min, clearance_bits),
    )


def write_report_csv(path: str | Path, report: Characterization) -> None:
    """CSV report with one (metric, value, units) row per line."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value", "units"])
        for name, value, units in report.rows():
            writer.writerow([name, repr(value), units])


def write_sweep_csv(
    path: str | Path, sweeps: Iterable[Sequence[tuple[float, float]]]
) -> None:
    """Sweep CSV with (current_mA, variance, run_index) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["current_mA", "variance", "run_index"])
        for run_index, sweep in enumerate(sweeps):
            for current, variance in sweep:
                writer.writerow([repr(current), repr(variance), run_index])


def read_sweep_csv(path: str | Path) -> list[list[tuple[float, float]]]:
    """Inverse of `write_sweep_csv`; returns one point list per run."""
    runs: dict[int, list[tuple[float, float]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            runs.setdefault(int(row["run_index"]), []).append(
                (float(row["current_mA"]), float(row["variance"]))
            )
    return [runs[k] for k in sorted(runs)]
