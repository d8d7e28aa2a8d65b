"""Joint ML channel estimation and data detection for SIMO block fading."""

from ._simoml import (
    CapExceeded,
    Constellation,
    DecodeResult,
    Estimator,
    ExperimentConfig,
    NotPositiveSemidefinite,
    ObservationBlock,
    SearchMatrix,
    build_search_matrix,
    cholesky_psd,
    coherent_detect,
    estimate_channel,
    exhaustive_ml,
    generate_block,
    gram,
    iterative_detect,
    max_eigenvalue,
    pilot_estimate,
    quantize,
    run_complexity,
    run_ser_sweep,
    run_oracle_check,
    snr_to_noise_var,
    sphere_decode,
    validate_asymptotics,
)

__version__ = "0.1.0"
