"""Similarity-based vibration condition monitoring.

Pipeline: segment vibration recordings, corrupt with SNR-calibrated white
noise, denoise with db4 wavelet packets, extract time/spectrum/spectrogram
features, and classify each segment by its similarity to per-class averaged
reference feature vectors. An evaluation harness sweeps the full
feature x measure x SNR grid and reports accuracy and confusion matrices.
"""

from .classifier import ClassId, ReferenceLibrary, Scorecard, build_library, classify
from .dataset import (
    DatasetManifest,
    ManifestEntry,
    RecordingFormat,
    SegmentRecord,
    SelectionRule,
    SplitSpec,
    load_and_segment,
    load_manifest,
    read_recording,
    split_references,
    synth_dataset,
    write_recording,
)
from .errors import (
    CalibrationError,
    CorruptTreeError,
    DegenerateInputWarning,
    IncompleteLibraryError,
    InvalidDepthError,
    InvalidInputError,
    ManifestError,
    ReportError,
    SimvibError,
    SplitError,
    UndefinedSimilarityError,
)
from .evaluate import (
    EvalReport,
    RunConfig,
    accuracy,
    emit_report,
    load_runlog,
    run_sweep,
    snr_label,
)
from .features import (
    FeatureKind,
    FeatureVector,
    StftConfig,
    TIME_FEATURE_NAMES,
    fft_features,
    stft_features,
    time_features,
)
from .signals import (
    NoiseSpec,
    Segment,
    add_awgn,
    derive_seed,
    segment_recording,
    signal_power,
    splitmix64,
)
from .similarity import MeasureKind, SsmParams, cosine, euclidean, ssm
from .storage import (
    load_feature_vector,
    load_library,
    load_segment_cache,
    save_feature_vector,
    save_library,
    save_segment_cache,
)
from .wavelet import (
    DenoiseConfig,
    ThresholdRule,
    WaveletPacketTree,
    denoise,
    soft_threshold,
    universal_threshold,
    wpd_decompose,
    wpd_reconstruct,
)

__version__ = "0.1.0"
