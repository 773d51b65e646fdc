import math

import numpy as np
import pytest

from qrngkit.config import AcquisitionConfig, ConfigError, PhysicsConfig
from qrngkit.simulate import (
    OVERSAMPLE_FACTOR,
    adc_noise_sigma,
    adc_sample,
    analog_chain,
    balanced_difference,
    current_sweep,
    generate_photon_counts,
    simulate_run,
    split_and_detect,
)


def phys_cfg(**kwargs):
    return PhysicsConfig(**kwargs)


def fano(samples):
    return np.var(samples, ddof=1) / np.mean(samples)


# --- photon generation ---------------------------------------------------


def test_zero_drive_gives_zero_counts():
    counts = generate_photon_counts(phys_cfg(drive_current=0.0), 1000, seed=1)
    assert not counts.any()


def test_needs_at_least_one_draw():
    with pytest.raises(ValueError):
        generate_photon_counts(phys_cfg(), 0, seed=1)


def test_poisson_fano_factor_is_one():
    cfg = phys_cfg(drive_current=1.0, flux_coefficient=1000.0, classical_mod_depth=0.0)
    counts = generate_photon_counts(cfg, 1_000_000, seed=11)
    assert fano(counts) == pytest.approx(1.0, abs=0.01)


def test_modulated_flux_is_super_poissonian():
    # With mean rate modulated by a zero-mean fluctuation c of RMS depth,
    # total variance is lam + lam^2 * Var(c), i.e. Fano = 1 + lam * depth^2.
    lam, depth = 1000.0, 0.05
    expected_fano = 1.0 + lam * depth**2  # = 3.5
    cfg = phys_cfg(drive_current=1.0, flux_coefficient=lam, classical_mod_depth=depth)
    counts = generate_photon_counts(cfg, 1_000_000, seed=12)
    measured = fano(counts)
    assert measured > 1.5
    assert measured == pytest.approx(expected_fano, rel=0.15)


def test_same_seed_reproduces_counts():
    cfg = phys_cfg(classical_mod_depth=0.01)
    a = generate_photon_counts(cfg, 10_000, seed=5)
    b = generate_photon_counts(cfg, 10_000, seed=5)
    assert np.array_equal(a, b)


# --- beam split and detection --------------------------------------------


def test_split_conserves_photons_at_unit_efficiency():
    cfg = phys_cfg(split_ratio=0.5, split_imbalance_epsilon=0.0, quantum_efficiency=1.0)
    counts = generate_photon_counts(phys_cfg(flux_coefficient=100.0, drive_current=1.0,
                                             classical_mod_depth=0.0), 10_000, seed=2)
    pe1, pe2 = split_and_detect(counts, cfg, seed=3)
    assert np.array_equal(pe1 + pe2, counts)


def test_thinned_arms_stay_poissonian():
    gen = phys_cfg(flux_coefficient=2000.0, drive_current=1.0, classical_mod_depth=0.0)
    counts = generate_photon_counts(gen, 1_000_000, seed=4)
    pe1, pe2 = split_and_detect(counts, phys_cfg(quantum_efficiency=0.8), seed=5)
    assert fano(pe1) == pytest.approx(1.0, abs=0.01)
    assert fano(pe2) == pytest.approx(1.0, abs=0.01)


def test_routing_probability_clamps_at_one():
    # split_ratio * (1 + epsilon) >= 1 routes everything to PD1.
    cfg = phys_cfg(split_ratio=0.8, split_imbalance_epsilon=0.5,
                   quantum_efficiency=1.0)
    counts = np.full(100, 50)
    pe1, pe2 = split_and_detect(counts, cfg, seed=6)
    assert not pe2.any()
    assert np.array_equal(pe1, counts)


def test_empty_counts_rejected():
    with pytest.raises(ValueError):
        split_and_detect(np.array([], dtype=np.int64), phys_cfg(), seed=1)


# --- balanced difference --------------------------------------------------


def test_identical_arms_cancel():
    pe = np.arange(100)
    assert not balanced_difference(pe, pe).any()


def test_difference_is_signed():
    diff = balanced_difference(np.array([1, 0]), np.array([0, 3]))
    assert diff.tolist() == [1, -3]


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        balanced_difference(np.zeros(3), np.zeros(4))


def test_variance_additivity_of_independent_arms():
    # Independent Poisson arms of mean lam/2 each: Var(diff) = lam, and the
    # oracle is the sum of the per-arm sample variances.
    lam = 2000.0
    gen = phys_cfg(flux_coefficient=lam, drive_current=1.0, classical_mod_depth=0.0)
    counts = generate_photon_counts(gen, 1_000_000, seed=7)
    pe1, pe2 = split_and_detect(
        counts, phys_cfg(split_imbalance_epsilon=0.0, quantum_efficiency=1.0), seed=8
    )
    diff = balanced_difference(pe1, pe2)
    var_sum = np.var(pe1, ddof=1) + np.var(pe2, ddof=1)
    assert np.var(diff, ddof=1) == pytest.approx(var_sum, rel=0.01)
    assert np.var(diff, ddof=1) == pytest.approx(lam, rel=0.01)


def test_common_mode_rejection():
    # With a perfectly balanced split the difference variance is blind to
    # the common-mode modulation (paired runs, 5% band).
    def diff_variance(depth, seed):
        gen = phys_cfg(flux_coefficient=2000.0, drive_current=1.0,
                       classical_mod_depth=depth)
        counts = generate_photon_counts(gen, 1_000_000, seed=seed)
        pe1, pe2 = split_and_detect(
            counts, phys_cfg(split_imbalance_epsilon=0.0), seed=seed + 1
        )
        return np.var(balanced_difference(pe1, pe2), ddof=1)

    quiet = diff_variance(0.0, seed=20)
    modulated = diff_variance(0.05, seed=20)
    assert modulated == pytest.approx(quiet, rel=0.05)


# --- analog chain ----------------------------------------------------------


def test_dc_path_is_offset_only():
    acq = AcquisitionConfig(electronic_noise_rms=0.0)
    volts = analog_chain(np.zeros(1000), acq, seed=1)
    assert np.array_equal(volts, np.full(1000, acq.offset_volts))


def test_single_pole_attenuation_at_cutoff():
    # Inject a sine at the photodiode bandwidth and compare against the
    # analytic single-pole response 1/sqrt(1 + (f/fc)^2).
    fs, n = 20e6, 1 << 16
    acq = AcquisitionConfig(
        transimpedance_gain=1.0, voltage_gain=1.0, electronic_noise_rms=0.0,
        offset_volts=0.0, adc_sample_rate=fs / OVERSAMPLE_FACTOR,
    )
    cycles = round(acq.pd_bandwidth / fs * n)  # whole cycles in the window
    freq = cycles * fs / n
    t = np.arange(n) / fs
    sine = np.sin(2 * np.pi * freq * t)
    # electron_charge=dt makes the counts-to-volts factor exactly 1
    volts = analog_chain(sine, acq, seed=1, sample_rate_hz=fs,
                         electron_charge=1.0 / fs)
    steady = volts[n // 4 :]
    amplitude = math.sqrt(2.0) * np.sqrt(np.mean(steady**2))
    expected = 1.0 / math.sqrt(1.0 + (freq / acq.pd_bandwidth) ** 2)
    assert amplitude == pytest.approx(expected, rel=0.02)


def test_electronic_noise_passes_the_filter():
    # White noise of RMS sigma through the single-pole low-pass comes out
    # with variance sigma^2 * sum_k h[k]^2; the oracle sums the impulse
    # response energy directly.
    fs, sigma, n = 8e6, 2.5e-3, 1_000_000
    acq = AcquisitionConfig(
        electronic_noise_rms=sigma, offset_volts=0.0,
        adc_sample_rate=fs / OVERSAMPLE_FACTOR,
    )
    volts = analog_chain(np.zeros(n), acq, seed=33, sample_rate_hz=fs)
    a = 1.0 - math.exp(-2.0 * math.pi * acq.pd_bandwidth / fs)
    impulse = a * (1.0 - a) ** np.arange(2000)  # truncated impulse response
    expected_std = sigma * math.sqrt(float(np.sum(impulse**2)))
    assert np.std(volts) == pytest.approx(expected_std, rel=0.03)


# --- ADC -------------------------------------------------------------------


def test_midscale_constant_hits_midscale_code():
    acq = AcquisitionConfig(adc_enob=12.0)  # additive ADC noise disabled
    block = adc_sample(np.full(400, acq.full_scale_volts / 2), acq, seed=1)
    assert len(block) == 100
    assert np.array_equal(block.codes, np.full(100, 2048))


def test_rail_clamping():
    acq = AcquisitionConfig(adc_enob=12.0)
    block = adc_sample(np.array([3.4, 3.3, -0.2, 0.0]), acq, seed=1, oversample=1)
    assert block.codes.tolist() == [4095, 4095, 0, 0]


def test_enob_noise_disabled_at_full_resolution():
    assert adc_noise_sigma(AcquisitionConfig(adc_enob=12.0)) == 0.0


def test_enob_measured_by_sine_fit():
    # Oracle: IEEE-style three-parameter sine fit at the known frequency;
    # ENOB = (SINAD - 1.76) / 6.02 on a full-scale sine.
    acq = AcquisitionConfig()
    n, fs = 1 << 16, acq.adc_sample_rate
    cycles = 1021  # coprime with n, non-coherent-ish bin
    freq = cycles * fs / n
    t = np.arange(n) / fs
    amplitude = acq.full_scale_volts / 2
    sine = amplitude * np.sin(2 * np.pi * freq * t) + acq.offset_volts
    block = adc_sample(sine, acq, seed=17, oversample=1)

    codes = block.codes.astype(np.float64)
    design = np.column_stack(
        [np.sin(2 * np.pi * freq * t), np.cos(2 * np.pi * freq * t), np.ones(n)]
    )
    coef, *_ = np.linalg.lstsq(design, codes, rcond=None)
    residual = codes - design @ coef
    signal_power = (coef[0] ** 2 + coef[1] ** 2) / 2.0
    sinad_db = 10.0 * math.log10(signal_power / np.mean(residual**2))
    enob = (sinad_db - 1.76) / 6.02
    assert enob == pytest.approx(acq.adc_enob, abs=0.2)


# --- composed run ----------------------------------------------------------


def test_silent_chain_sits_at_midscale():
    acq = AcquisitionConfig(electronic_noise_rms=0.0, adc_enob=12.0)
    block = simulate_run(PhysicsConfig(), acq, 5000, led_on=False, seed=9)
    assert np.array_equal(block.codes, np.full(5000, 2048))
    assert block.led_on is False


def test_led_variance_ratio_exceeds_forty():
    on = simulate_run(PhysicsConfig(), AcquisitionConfig(), 300_000, True, seed=41)
    off = simulate_run(PhysicsConfig(), AcquisitionConfig(), 300_000, False, seed=42)
    ratio = np.var(on.codes, ddof=1) / np.var(off.codes, ddof=1)
    assert ratio > 40.0


def test_run_is_deterministic():
    a = simulate_run(PhysicsConfig(), AcquisitionConfig(), 20_000, True, seed=77)
    b = simulate_run(PhysicsConfig(), AcquisitionConfig(), 20_000, True, seed=77)
    assert a == b
    c = simulate_run(PhysicsConfig(), AcquisitionConfig(), 20_000, True, seed=78)
    assert not np.array_equal(a.codes, c.codes)


def test_run_records_provenance():
    block = simulate_run(PhysicsConfig(), AcquisitionConfig(), 100, True, seed=123)
    assert block.rng_seed == 123
    assert block.adc_bits == 12
    assert block.sample_rate == 100e3
    assert len(block.config_digest) == 8


# --- current sweep ----------------------------------------------------------


def test_sweep_needs_three_steps():
    with pytest.raises(ValueError):
        current_sweep(PhysicsConfig(), AcquisitionConfig(), 2, 100, seed=1)


def test_sweep_zero_step_matches_dark_floor():
    sweep = current_sweep(PhysicsConfig(), AcquisitionConfig(), 5, 100_000, seed=50)
    currents = [c for c, _ in sweep]
    assert currents[0] == 0.0
    assert currents[-1] == PhysicsConfig().drive_current
    off = simulate_run(PhysicsConfig(), AcquisitionConfig(), 100_000, False, seed=51)
    floor = np.var(off.codes, ddof=1)
    assert sweep[0][1] == pytest.approx(floor, rel=0.05)


def test_sweep_variance_grows_linearly():
    sweep = current_sweep(PhysicsConfig(), AcquisitionConfig(), 8, 30_000, seed=52)
    variances = np.array([v for _, v in sweep])
    assert np.all(np.diff(variances) > 0)
