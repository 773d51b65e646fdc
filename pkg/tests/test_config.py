import dataclasses

import pytest

from qrngkit.config import (
    AcquisitionConfig,
    ConfigError,
    ExtractorConfig,
    PhysicsConfig,
    config_digest,
    config_to_text,
    default_configs,
    load_config_file,
    parse_config_text,
)


def test_default_file_matches_dataclass_defaults():
    # data/default.cfg is the calibration of record; the dataclass defaults
    # must stay in sync with it.
    phys, acq, ext = default_configs()
    assert phys == PhysicsConfig()
    assert acq == AcquisitionConfig()
    assert ext == ExtractorConfig()


def test_round_trip_through_text():
    phys = PhysicsConfig(drive_current=35.0, classical_mod_depth=0.05)
    acq = AcquisitionConfig(voltage_gain=8.0)
    ext = ExtractorConfig(n=2400, m=1000)
    text = config_to_text(phys, acq, ext)
    assert parse_config_text(text) == (phys, acq, ext)


def test_unknown_key_is_hard_error():
    with pytest.raises(ConfigError, match="unknown config key 'flux_coeficient'"):
        parse_config_text("flux_coeficient = 1e6\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("voltage_gain = 2\nvoltage_gain = 3\n")


def test_bad_value_rejected():
    with pytest.raises(ConfigError, match="bad value"):
        parse_config_text("voltage_gain = sixteen\n")


def test_missing_equals_rejected():
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        parse_config_text("just a line\n")


def test_comments_and_blank_lines_ignored():
    phys, acq, ext = parse_config_text("\n# comment\ndrive_current = 10 # inline\n")
    assert phys.drive_current == 10.0
    assert acq == AcquisitionConfig()


def test_load_config_file(tmp_path):
    path = tmp_path / "device.cfg"
    path.write_text("drive_current = 12.5\nadc_bits = 10\nn = 4090\nm = 100\nbits_per_code = 10\n")
    phys, acq, ext = load_config_file(path)
    assert phys.drive_current == 12.5
    assert acq.adc_bits == 10
    assert (ext.n, ext.m, ext.bits_per_code) == (4090, 100, 10)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"split_ratio": 0.0},
        {"split_ratio": 1.0},
        {"quantum_efficiency": 0.0},
        {"quantum_efficiency": 1.1},
        {"flux_coefficient": 0.0},
        {"drive_current": -1.0},
        {"classical_mod_depth": -0.1},
    ],
)
def test_physics_invariants(kwargs):
    with pytest.raises(ConfigError):
        PhysicsConfig(**kwargs)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"full_scale_volts": 0.0},
        {"adc_enob": 13.0},
        {"adc_bits": 0},
        {"adc_sample_rate": 0.0},
        {"electronic_noise_rms": -1e-3},
    ],
)
def test_acquisition_invariants(kwargs):
    with pytest.raises(ConfigError):
        AcquisitionConfig(**kwargs)


def test_supra_bandwidth_sampling_warns():
    with pytest.warns(UserWarning, match="exceeds pd_bandwidth"):
        AcquisitionConfig(adc_sample_rate=400e3)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 4093},            # not a multiple of bits_per_code
        {"n": 12, "m": 13},     # m > n
        {"m": 0},
        {"security_exponent": -1},
    ],
)
def test_extractor_invariants(kwargs):
    with pytest.raises(ConfigError):
        ExtractorConfig(**kwargs)


def test_digest_is_stable_and_sensitive():
    phys, acq = PhysicsConfig(), AcquisitionConfig()
    d = config_digest(phys, acq)
    assert len(d) == 8
    assert d == config_digest(PhysicsConfig(), AcquisitionConfig())
    bumped = dataclasses.replace(phys, drive_current=71.0)
    assert config_digest(bumped, acq) != d
