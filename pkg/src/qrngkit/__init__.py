"""Software twin of an LED-based balanced-detection quantum RNG.

Simulates the optical and electronic signal chain at the photon level,
characterizes the entropy of the raw ADC codes, conditions them through a
seeded Toeplitz extractor, and validates the output statistically.
"""

from .bitstream import BitStream, read_raw, write_raw
from .config import (
    AcquisitionConfig,
    ConfigError,
    ExtractorConfig,
    PhysicsConfig,
    config_digest,
    default_configs,
    load_config_file,
)
from .entropy import (
    Characterization,
    Histogram,
    LinearFitResult,
    NoiseStats,
    NoQuantumSignalError,
    characterize,
    extraction_ratio,
    histogram,
    linearity_fit,
    min_entropy,
    noise_stats,
    qcnr,
    qcnr_power_db,
)
from .extractor import (
    ToeplitzSeed,
    active_backend,
    codes_to_bits,
    extract_bits,
    extract_block,
    extract_fast,
    leftover_hash_check,
    stream_extract,
)
from .rawblock import RawCodeBlock, read_block, write_block
from .simulate import (
    OVERSAMPLE_FACTOR,
    adc_sample,
    analog_chain,
    balanced_difference,
    current_sweep,
    generate_photon_counts,
    simulate_run,
    split_and_detect,
)
from .stats import (
    AutocorrResult,
    PValueSet,
    autocorrelation,
    block_frequency_test,
    chi_square_bytes,
    cross_correlate,
    export_raw,
    import_raw,
    ks_uniformity,
    monobit_test,
    run_battery,
    runs_test,
)

__version__ = "0.1.0"
