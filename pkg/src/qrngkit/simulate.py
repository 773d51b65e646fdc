"""Monte-Carlo model of the optical and electronic signal chain.

The chain is simulated photon-first at an internal rate of
``OVERSAMPLE_FACTOR * adc_sample_rate`` so the photodiode low-pass can act
before decimation, mimicking the analog front end:

    LED photons -> beam split -> photodiode pair -> current difference
    -> transimpedance + voltage gain -> single-pole low-pass -> ADC

Photon numbers per interval are Poisson; an optional band-limited
common-mode intensity fluctuation models classical (power-supply style)
noise that the balanced difference is designed to reject.  All stages are
pure functions of (inputs, config, seed) and reproduce bit-identically for
identical arguments.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from scipy.signal import lfilter

from .config import AcquisitionConfig, ConfigError, PhysicsConfig, config_digest
from .rawblock import RawCodeBlock

# Internal samples generated per ADC output sample.  Lets the photodiode
# low-pass shape the noise before the ADC decimates.
OVERSAMPLE_FACTOR = 4

DEFAULT_INTERNAL_RATE = OVERSAMPLE_FACTOR * 100e3  # Hz


def child_seeds(seed: int, count: int) -> list[int]:
    """Derive independent per-stage seeds from one 64-bit run seed."""
    state = np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def lowpass_coefficient(cutoff_hz: float, rate_hz: float) -> float:
    """Feed-in coefficient of the single-pole IIR low-pass.

    y[k] = a*x[k] + (1-a)*y[k-1] with a = 1 - exp(-2*pi*fc/fs).  Stable for
    any cutoff; approaches the identity when the cutoff is far above the
    sampling rate, which is the physically sensible limit for a discrete
    grid that cannot resolve the rolloff.
    """
    return 1.0 - float(np.exp(-2.0 * np.pi * cutoff_hz / rate_hz))


def lowpass_noise_gain(a: float) -> float:
    """Variance transfer of the single-pole filter for white input.

    Geometric sum of the squared impulse response: a^2 * sum (1-a)^(2k)
    = a / (2 - a).
    """
    return a / (2.0 - a)


def _lowpass(x: np.ndarray, a: float, y_prev: float = 0.0) -> np.ndarray:
    return lfilter([a], [1.0, -(1.0 - a)], x, zi=[(1.0 - a) * y_prev])[0]


def generate_photon_counts(
    cfg: PhysicsConfig,
    n: int,
    seed: int,
    sample_rate_hz: float = DEFAULT_INTERNAL_RATE,
) -> np.ndarray:
    """Draw per-interval photon numbers emitted toward the detector pair.

    The per-interval mean is ``flux_coefficient * drive_current * (1 + c)``
    where ``c`` is a stationary band-limited Gaussian common-mode
    fluctuation with RMS ``classical_mod_depth`` (zero depth gives pure
    Poisson).  ``sample_rate_hz`` only sets the timebase used to discretize
    ``classical_mod_cutoff``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lam = cfg.flux_coefficient * cfg.drive_current
    if lam < 0.0:
        raise ConfigError(f"mean photon number is negative ({lam})")
    rng = np.random.default_rng(seed)
    if lam == 0.0:
        return np.zeros(n, dtype=np.int64)
    if cfg.classical_mod_depth == 0.0:
        return rng.poisson(lam, n).astype(np.int64, copy=False)

    a = lowpass_coefficient(cfg.classical_mod_cutoff, sample_rate_hz)
    gain = np.sqrt(lowpass_noise_gain(a))
    white = rng.standard_normal(n)
    # Start the filter in its stationary state so the modulation RMS is
    # classical_mod_depth from the first sample on.
    y_prev = rng.standard_normal() * gain
    modulation = _lowpass(white, a, y_prev) * (cfg.classical_mod_depth / gain)
    # Intensity cannot go negative; an excursion below -100% clips to dark.
    lam_t = np.maximum(lam * (1.0 + modulation), 0.0)
    return rng.poisson(lam_t).astype(np.int64, copy=False)


def split_and_detect(
    counts: np.ndarray, cfg: PhysicsConfig, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Route photons to the two photodiodes and apply detection efficiency.

    Each photon goes to PD1 with probability
    ``split_ratio * (1 + split_imbalance_epsilon)`` (clamped to [0, 1]) and
    to PD2 otherwise; each routed photon converts with probability
    ``quantum_efficiency``.  Draws are binomial per interval, which is
    statistically identical to per-photon routing.
    """
    counts = np.asarray(counts)
    if counts.size == 0:
        raise ValueError("counts must be nonempty")
    p1 = min(max(cfg.split_ratio * (1.0 + cfg.split_imbalance_epsilon), 0.0), 1.0)
    rng = np.random.default_rng(seed)
    to_pd1 = rng.binomial(counts, p1)
    pe1 = rng.binomial(to_pd1, cfg.quantum_efficiency)
    pe2 = rng.binomial(counts - to_pd1, cfg.quantum_efficiency)
    return pe1.astype(np.int64, copy=False), pe2.astype(np.int64, copy=False)


def balanced_difference(pe1: np.ndarray, pe2: np.ndarray) -> np.ndarray:
    """Photoelectron difference of the two arms (signed)."""
    pe1 = np.asarray(pe1)
    pe2 = np.asarray(pe2)
    if pe1.shape != pe2.shape:
        raise ValueError(f"arm length mismatch: {pe1.shape} vs {pe2.shape}")
    return pe1.astype(np.int64) - pe2.astype(np.int64)


def analog_chain(
    diff: np.ndarray,
    acq: AcquisitionConfig,
    seed: int,
    sample_rate_hz: float | None = None,
    electron_charge: float = 1.602176634e-19,
) -> np.ndarray:
    """Amplify the differential photocurrent into ADC input voltages.

    Counts become current through ``electron_charge`` per interval, pick up
    transimpedance and voltage gain plus the amplifier's Gaussian noise
    (``electronic_noise_rms``), pass the single-pole photodiode low-pass,
    and are offset by ``offset_volts``.  Output stays at the internal rate.
    """
    if sample_rate_hz is None:
        sample_rate_hz = OVERSAMPLE_FACTOR * acq.adc_sample_rate
    diff = np.asarray(diff, dtype=np.float64)
    dt = 1.0 / sample_rate_hz
    volts = diff * (electron_charge / dt) * acq.transimpedance_gain * acq.voltage_gain
    if acq.electronic_noise_rms > 0.0:
        rng = np.random.default_rng(seed)
        volts = volts + rng.standard_normal(diff.size) * acq.electronic_noise_rms
    a = lowpass_coefficient(acq.pd_bandwidth, sample_rate_hz)
    return _lowpass(volts, a) + acq.offset_volts


def adc_noise_sigma(acq: AcquisitionConfig) -> float:
    """Additive ADC noise (volts) that degrades a full-scale sine to adc_enob.

    Solves SINAD = 6.02*ENOB + 1.76 for the total noise power of a
    full-scale sine and subtracts the ideal quantization noise LSB^2/12.
    ``adc_enob == adc_bits`` disables the additive noise exactly.
    """
    if acq.adc_enob >= acq.adc_bits:
        return 0.0
    sinad_db = 6.02 * acq.adc_enob + 1.76
    total_noise = acq.full_scale_volts**2 / 8.0 * 10.0 ** (-sinad_db / 10.0)
    quantization = acq.lsb_volts**2 / 12.0
    return float(np.sqrt(max(total_noise - quantization, 0.0)))


def adc_sample(
    voltages: np.ndarray,
    acq: AcquisitionConfig,
    seed: int,
    oversample: int = OVERSAMPLE_FACTOR,
    led_on: bool = True,
    digest: bytes = b"\x00" * 8,
    rng_seed: int | None = None,
) -> RawCodeBlock:
    """Decimate, add ENOB-calibrated noise, and quantize to ADC codes.

    Keeps the last internal sample of each conversion period, adds the
    Gaussian noise from `adc_noise_sigma`, and truncating-quantizes over
    [0, full_scale_volts) with out-of-range values clamped to the rails.
    Provenance fields (led_on, digest, rng_seed) are supplied by the caller.
    """
    voltages = np.asarray(voltages, dtype=np.float64)
    sampled = voltages[oversample - 1 :: oversample].copy()
    sigma = adc_noise_sigma(acq)
    if sigma > 0.0:
        rng = np.random.default_rng(seed)
        sampled += rng.standard_normal(sampled.size) * sigma
    levels = acq.code_levels
    codes = np.floor(sampled / acq.full_scale_volts * levels)
    codes = np.clip(codes, 0, levels - 1).astype(np.uint16)
    return RawCodeBlock(
        codes=codes,
        led_on=led_on,
        rng_seed=seed if rng_seed is None else rng_seed,
        config_digest=digest,
        adc_bits=acq.adc_bits,
        sample_rate=acq.adc_sample_rate,
    )


def simulate_run(
    phys: PhysicsConfig,
    acq: AcquisitionConfig,
    n_codes: int,
    led_on: bool,
    seed: int,
) -> RawCodeBlock:
    """Run the full chain and return `n_codes` ADC codes.

    ``led_on=False`` forces the drive current to zero, leaving only the
    classical noise floor (amplifier + ADC).  Identical (configs, seed)
    reproduce the block bit-for-bit.
    """
    if n_codes < 1:
        raise ValueError(f"n_codes must be >= 1, got {n_codes}")
    internal_rate = OVERSAMPLE_FACTOR * acq.adc_sample_rate
    effective = phys if led_on else replace(phys, drive_current=0.0)
    s_photon, s_split, s_chain, s_adc = child_seeds(seed, 4)
    counts = generate_photon_counts(
        effective, n_codes * OVERSAMPLE_FACTOR, s_photon, sample_rate_hz=internal_rate
    )
    pe1, pe2 = split_and_detect(counts, effective, s_split)
    diff = balanced_difference(pe1, pe2)
    volts = analog_chain(
        diff, acq, s_chain,
        sample_rate_hz=internal_rate,
        electron_charge=phys.electron_charge,
    )
    return adc_sample(
        volts, acq, s_adc,
        oversample=OVERSAMPLE_FACTOR,
        led_on=led_on,
        digest=config_digest(phys, acq),
        rng_seed=seed,
    )


def current_sweep(
    phys: PhysicsConfig,
    acq: AcquisitionConfig,
    steps: int,
    n_codes_per_step: int,
    seed: int,
) -> list[tuple[float, float]]:
    """Step the drive current linearly from 0 to the configured maximum.

    Mirrors a DAC-controlled current sweep; returns (drive_current_mA,
    output code variance) per step.  Step 0 is the dark classical floor.
    """
    if steps < 3:
        raise ValueError(f"steps must be >= 3, got {steps}")
    currents = np.linspace(0.0, phys.drive_current, steps)
    seeds = child_seeds(seed, steps)
    out = []
    for current, step_seed in zip(currents, seeds):
        block = simulate_run(
            replace(phys, drive_current=float(current)), acq,
            n_codes_per_step, True, step_seed,
        )
        out.append((float(current), float(np.var(block.codes, ddof=1))))
    return out
