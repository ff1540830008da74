"""gapcov: bias-free statistics for uniformly sampled signals with gaps.

Estimates means, variances, auto-/cross-covariance functions and power
spectral densities from equidistant records in which some samples are
flagged invalid, by averaging over valid samples and pairs only, and
removes the remaining short-record bias (from subtracting an estimated
mean) exactly by inverting a lag-window mapping matrix.
"""

__version__ = "0.1.0"

from .core import (
    CovarianceEstimate,
    GappySeries,
    LagWindow,
    MappingMatrix,
    MomentSummary,
    SpectrumEstimate,
    validate_series,
    weight_fingerprint,
)
from .errors import (
    AllInvalidError,
    ConfigError,
    FingerprintMismatchError,
    GapcovError,
    PairCoverageError,
    SerializationError,
    SeriesValidationError,
    SingularMatrixError,
    SingularWindowError,
    TruncationError,
    WindowError,
)
from .io import deserialize_series, read_series_csv, serialize_series, write_series_csv
from .moments import (
    corrected_variance,
    mean_estimator_variance,
    weighted_mean,
    weighted_variance,
)
from .covariance import (
    PairAccumulators,
    autocovariance_direct,
    autocovariance_fft,
    crosscovariance_direct,
    crosscovariance_fft,
    pair_counts,
)
from .correction import (
    TripleAccumulators,
    build_auto_matrix,
    build_cross_matrix,
    correct_covariance,
    predict_expected_covariance,
    triple_products_auto,
    triple_products_cross,
)
from .spectrum import (
    covariance_to_spectrum,
    spectrum_frequencies,
    spectrum_to_covariance,
    verify_identities,
)
from .baselines import (
    LombScargleSpectrum,
    interpolated_covariance_spectrum,
    lomb_scargle,
    lomb_scargle_offset,
    lomb_scargle_offset_correct,
    lomb_scargle_on_window_grid,
    sample_and_hold,
)
from .simulate import GapModelSpec, ProcessSpec, ProcessTruth, apply_gaps, generate_pair
from .harness import (
    ESTIMATORS,
    ExperimentConfig,
    ExperimentResult,
    run_bias_experiment,
    run_rms_experiment,
)

__all__ = [
    "__version__",
    "GappySeries",
    "LagWindow",
    "CovarianceEstimate",
    "MappingMatrix",
    "SpectrumEstimate",
    "MomentSummary",
    "validate_series",
    "weight_fingerprint",
    "GapcovError",
    "SeriesValidationError",
    "AllInvalidError",
    "WindowError",
    "SingularWindowError",
    "PairCoverageError",
    "FingerprintMismatchError",
    "SingularMatrixError",
    "TruncationError",
    "SerializationError",
    "ConfigError",
    "serialize_series",
    "deserialize_series",
    "read_series_csv",
    "write_series_csv",
    "weighted_mean",
    "weighted_variance",
    "mean_estimator_variance",
    "corrected_variance",
    "PairAccumulators",
    "autocovariance_direct",
    "autocovariance_fft",
    "crosscovariance_direct",
    "crosscovariance_fft",
    "pair_counts",
    "TripleAccumulators",
    "triple_products_auto",
    "triple_products_cross",
    "build_auto_matrix",
    "build_cross_matrix",
    "correct_covariance",
    "predict_expected_covariance",
    "covariance_to_spectrum",
    "spectrum_to_covariance",
    "spectrum_frequencies",
    "verify_identities",
    "LombScargleSpectrum",
    "lomb_scargle",
    "lomb_scargle_offset",
    "lomb_scargle_offset_correct",
    "lomb_scargle_on_window_grid",
    "sample_and_hold",
    "interpolated_covariance_spectrum",
    "ProcessSpec",
    "GapModelSpec",
    "ProcessTruth",
    "generate_pair",
    "apply_gaps",
    "ESTIMATORS",
    "ExperimentConfig",
    "ExperimentResult",
    "run_bias_experiment",
    "run_rms_experiment",
]
