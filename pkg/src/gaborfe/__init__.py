"""gaborfe: a learnable Gabor-filterbank audio front-end.

The pipeline maps a waveform through a bank of complex Gabor filters,
sample-wise energy, per-channel Gaussian low-pass pooling with decimation,
and per-channel energy normalization (PCEN).  Every stage parameter — filter
centre frequencies and bandwidths, pooling widths, and the PCEN smoother/
gain/offset/root — carries an analytic gradient, so the whole front-end
trains with the bundled Adam optimizer under configurable freeze masks.

See the README for the library tour and the ``gaborfe`` CLI for the
file-level workflow.
"""

from .analysis import (
    DriftReport,
    drift_report,
    gain_curve_table,
    gaussian_response_table,
    read_drift_csv,
    read_gain_curve_csv,
    read_gaussian_response_csv,
    write_drift_csv,
    write_gain_curve_csv,
    write_gaussian_response_csv,
)
from .audio_io import (
    Manifest,
    ManifestRow,
    ParseError,
    UnsupportedFormatError,
    load_manifest,
    read_wav,
    write_wav,
)
from .config import RunConfig, load_config, parse_config
from .filterbank import (
    FeatureMap,
    GaborBankParams,
    GaussianPoolParams,
    filterbank_energy,
    gabor_kernel,
    gaussian_pool,
    hz_to_mel,
    mel_init_bank,
    mel_to_hz,
)
from .frontend import (
    FrontendParams,
    GradientBundle,
    LoudnessSpec,
    TrainMask,
    default_frontend,
    extract_features,
    frontend_backward,
    rescale_loudness,
)
from .modelio import load_model, save_model
from .noise import make_babble, mix_at_snr
from .optim import (
    AdamState,
    DEFAULT_RANGES,
    TrainingDivergenceError,
    adam_step,
    finite_diff_check,
)
from .pcen import (
    PcenGradients,
    PcenParams,
    SmootherState,
    gain_curve,
    iir_smooth,
    pcen_backward,
    pcen_forward,
)
from .toydata import LabelledDataset, ToyDatasetSpec, class_profiles, gen_toy_dataset
from .trainer import (
    AdaptConfig,
    BackendParams,
    ProtocolConfig,
    ProtocolOutcome,
    ProtocolRow,
    RegimeConfig,
    TrainedModel,
    adapt_pcen,
    evaluate,
    run_noise_protocol,
    train,
    write_results_csv,
)

__version__ = "0.1.0"
