"""Configuration objects for the simulated QRNG signal chain.

Three frozen dataclasses describe the device: `PhysicsConfig` (LED drive,
photon statistics, beam split), `AcquisitionConfig` (amplifier chain and
ADC), and `ExtractorConfig` (Toeplitz hashing geometry).  Defaults are the
shipped calibration; the same values live in ``data/default.cfg``, which is
the file the CLI loads when ``--config`` is not given.

Config files are flat ``key = value`` text.  Keys mirror the dataclass
field names exactly; unknown keys are hard errors so a typo cannot silently
change the calibration.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import get_type_hints


class ConfigError(ValueError):
    """Raised for invalid configuration values or malformed config files."""


@dataclass(frozen=True)
class PhysicsConfig:
    """Optical front end: LED, beam split, photodiode pair.

    drive_current is the LED forward current in mA.  flux_coefficient maps
    drive current to mean photon number per internal sampling interval, so
    the per-interval Poisson mean is ``flux_coefficient * drive_current``.
    classical_mod_depth is the relative RMS of a band-limited common-mode
    intensity fluctuation (power-supply style noise) with a single-pole
    spectrum cut off at classical_mod_cutoff.
    """

    drive_current: float = 70.0            # mA
    flux_coefficient: float = 1.83e6       # photons / interval / mA
    split_ratio: float = 0.5               # fraction of photons toward PD1
    split_imbalance_epsilon: float = 5e-4  # residual arm mismatch
    quantum_efficiency: float = 0.8
    classical_mod_depth: float = 0.002     # relative RMS of common-mode noise
    classical_mod_cutoff: float = 1e3      # Hz
    electron_charge: float = 1.602176634e-19  # C
    photon_energy: float = 2.114e-19       # J (940 nm LED)

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError(f"split_ratio must be in (0, 1), got {self.split_ratio}")
        if not 0.0 < self.quantum_efficiency <= 1.0:
            raise ConfigError(
                f"quantum_efficiency must be in (0, 1], got {self.quantum_efficiency}"
            )
        if self.flux_coefficient <= 0.0:
            raise ConfigError(f"flux_coefficient must be > 0, got {self.flux_coefficient}")
        if self.drive_current < 0.0:
            raise ConfigError(f"drive_current must be >= 0, got {self.drive_current}")
        if self.classical_mod_depth < 0.0:
            raise ConfigError(
                f"classical_mod_depth must be >= 0, got {self.classical_mod_depth}"
            )

    def mean_photon_rate(self) -> float:
        """Mean photons per internal sampling interval at the set drive current."""
        return self.flux_coefficient * self.drive_current

    def led_optical_power_watts(self, internal_rate_hz: float) -> float:
        """Mean emitted optical power implied by the flux model."""
        return self.mean_photon_rate() * internal_rate_hz * self.photon_energy


@dataclass(frozen=True)
class AcquisitionConfig:
    """Amplifier chain and ADC model.

    The signal path is transimpedance gain, voltage gain, a single-pole
    low-pass at pd_bandwidth, a DC offset, then a SAR ADC of adc_bits
    resolution whose additive noise is calibrated to reach adc_enob on a
    full-scale sine.  Setting ``adc_enob == adc_bits`` disables the additive
    ADC noise entirely.
    """

    transimpedance_gain: float = 4.7e6   # V/A
    voltage_gain: float = 16.0
    load_resistance: float = 50.0        # ohm, noise-power bookkeeping only
    pd_bandwidth: float = 250e3          # Hz
    offset_volts: float = 1.65
    full_scale_volts: float = 3.3
    adc_bits: int = 12
    adc_enob: float = 8.0
    adc_sample_rate: float = 100e3       # Sa/s
    electronic_noise_rms: float = 6.74e-3  # V, referred to the amplifier output

    def __post_init__(self):
        if self.full_scale_volts <= 0.0:
            raise ConfigError(f"full_scale_volts must be > 0, got {self.full_scale_volts}")
        if self.adc_enob > self.adc_bits:
            raise ConfigError(
                f"adc_enob ({self.adc_enob}) must not exceed adc_bits ({self.adc_bits})"
            )
        if self.adc_bits < 1:
            raise ConfigError(f"adc_bits must be >= 1, got {self.adc_bits}")
        if self.adc_sample_rate <= 0.0:
            raise ConfigError(f"adc_sample_rate must be > 0, got {self.adc_sample_rate}")
        if self.electronic_noise_rms < 0.0:
            raise ConfigError(
                f"electronic_noise_rms must be >= 0, got {self.electronic_noise_rms}"
            )
        if self.adc_sample_rate > self.pd_bandwidth:
            # Sub-Nyquist operation is the designed mode: sampling above the
            # photodiode bandwidth correlates successive codes.
            warnings.warn(
                f"adc_sample_rate ({self.adc_sample_rate:g} Sa/s) exceeds pd_bandwidth "
                f"({self.pd_bandwidth:g} Hz); successive samples will be correlated",
                stacklevel=2,
            )

    @property
    def code_levels(self) -> int:
        return 1 << self.adc_bits

    @property
    def lsb_volts(self) -> float:
        return self.full_scale_volts / self.code_levels


@dataclass(frozen=True)
class ExtractorConfig:
    """Toeplitz extractor geometry.

    One hashing block consumes ``n`` raw bits and emits ``m`` bits.  The
    defaults keep the 5-out-of-12 per-sample rate on 12-bit codes with
    ``n`` divisible by bits_per_code (341 codes per block).  security_exponent
    is the leftover-hash statistical distance exponent: eps = 2**-exponent.
    """

    n: int = 4092
    m: int = 1705
    bits_per_code: int = 12
    security_exponent: int = 50

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ConfigError(f"block sizes must be >= 1, got n={self.n}, m={self.m}")
        if self.m > self.n:
            raise ConfigError(f"m ({self.m}) must not exceed n ({self.n})")
        if self.n % self.bits_per_code != 0:
            raise ConfigError(
                f"n ({self.n}) must be a multiple of bits_per_code ({self.bits_per_code})"
            )
        if self.security_exponent < 0:
            raise ConfigError(
                f"security_exponent must be >= 0, got {self.security_exponent}"
            )


_SECTIONS = (("physics", PhysicsConfig), ("acquisition", AcquisitionConfig),
             ("extractor", ExtractorConfig))


def _field_types(cls) -> dict[str, type]:
    hints = get_type_hints(cls)
    return {f.name: hints[f.name] for f in fields(cls)}


def parse_config_text(text: str, source: str = "<config>"):
    """Parse flat key=value config text into the three config objects.

    Returns (PhysicsConfig, AcquisitionConfig, ExtractorConfig).  Unknown
    keys, duplicate keys, and unparsable values raise ConfigError.
    """
    owners: dict[str, tuple[str, type]] = {}
    for section, cls in _SECTIONS:
        for name, typ in _field_types(cls).items():
            owners[name] = (section, typ)

    values: dict[str, dict] = {section: {} for section, _ in _SECTIONS}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in owners:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate config key {key!r}")
        seen.add(key)
        section, typ = owners[key]
        try:
            values[section][key] = typ(value) if typ is not int else int(value, 0)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {value!r}") from exc

    try:
        phys = PhysicsConfig(**values["physics"])
        acq = AcquisitionConfig(**values["acquisition"])
        ext = ExtractorConfig(**values["extractor"])
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return phys, acq, ext


def load_config_file(path: str | Path):
    """Load a config file; returns (PhysicsConfig, AcquisitionConfig, ExtractorConfig)."""
    path = Path(path)
    return parse_config_text(path.read_text(), source=str(path))


def default_configs():
    """The shipped default calibration, loaded from the packaged config file."""
    text = resources.files("qrngkit").joinpath("data/default.cfg").read_text()
    return parse_config_text(text, source="qrngkit/data/default.cfg")


def config_to_text(phys: PhysicsConfig, acq: AcquisitionConfig,
                   ext: ExtractorConfig) -> str:
    """Serialize configs back to the flat key=value format (sorted keys)."""
    lines = []
    for _, obj in (("physics", phys), ("acquisition", acq), ("extractor", ext)):
        for f in sorted(fields(obj), key=lambda f: f.name):
            lines.append(f"{f.name} = {getattr(obj, f.name)!r}")
    return "\n".join(lines) + "\n"


def config_digest(phys: PhysicsConfig, acq: AcquisitionConfig) -> bytes:
    """8-byte digest of the physics + acquisition configuration.

    Stamped into every RawCodeBlock so a code stream can be matched to the
    exact device settings that produced it.
    """
    parts = []
    for prefix, obj in (("physics", phys), ("acquisition", acq)):
        for f in sorted(fields(obj), key=lambda f: f.name):
            parts.append(f"{prefix}.{f.name}={getattr(obj, f.name)!r}")
    return hashlib.sha256("\n".join(parts).encode()).digest()[:8]
