"""Time, spectrum, and spectrogram feature extraction from vibration segments."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from .errors import InvalidInputError
from .signals import Segment

__all__ = [
    "FeatureKind",
    "FeatureVector",
    "StftConfig",
    "TIME_FEATURE_NAMES",
    "time_features",
    "fft_features",
    "stft_features",
    "hann_window",
]


class FeatureKind(Enum):
    TIME = "time"
    FFT = "fft"
    STFT = "stft"


@dataclass(frozen=True)
class FeatureVector:
    """Flat real feature vector tagged with the extractor that produced it."""

    kind: FeatureKind
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise InvalidInputError("feature values must be a non-empty 1-D vector")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("feature values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class StftConfig:
    """Short-time transform parameters.

    Frames of ``window_len`` samples are taken every ``hop`` samples,
    multiplied by a periodic Hann window, and zero-padded to ``nfft`` when
    ``nfft > window_len`` (``nfft=None`` means ``nfft = window_len``).
    """

    window_len: int = 256
    hop: int = 128
    window: str = "hann"
    nfft: int | None = None

    def __post_init__(self) -> None:
        nfft = self.window_len if self.nfft is None else self.nfft
        if not (1 <= self.hop <= self.window_len <= nfft):
            raise InvalidInputError("need hop <= window_len <= nfft, all positive")
        if self.window != "hann":
            raise InvalidInputError("only the hann window is supported")
        object.__setattr__(self, "nfft", nfft)

    def n_frames(self, segment_len: int) -> int:
        if segment_len < self.window_len:
            raise InvalidInputError(
                f"window_len {self.window_len} exceeds segment length {segment_len}"
            )
        return (segment_len - self.window_len) // self.hop + 1


# Fixed output order of the time-domain statistics; part of the contract.
TIME_FEATURE_NAMES = (
    "mean",
    "std",
    "rms",
    "peak",
    "peak_to_peak",
    "crest_factor",
    "kurtosis",
    "skewness",
    "shape_factor",
    "impulse_factor",
    "clearance_factor",
    "zero_crossings",
    "waveform_length",
    "mean_abs",
)


def _finite_or_zero(v: float) -> float:
    # moment ratios are undefined for zero-variance input; report 0 by convention
    return float(v) if np.isfinite(v) else 0.0


def time_features(seg: Segment) -> FeatureVector:
    """14 waveform statistics in the order of ``TIME_FEATURE_NAMES``.

    Conventions: std is the population standard deviation; kurtosis is
    excess and bias-corrected, as is skewness; zero crossings count strict
    sign changes. Ratio statistics with a zero denominator are reported as 0
    and flagged via ``meta["degenerate"]``.
    """
    x = seg.samples
    mean = float(np.mean(x))
    std = float(np.std(x))
    rms = float(np.sqrt(np.mean(np.square(x))))
    peak = float(np.max(np.abs(x)))
    peak_to_peak = float(np.max(x) - np.min(x))
    mean_abs = float(np.mean(np.abs(x)))
    mean_sqrt_abs = float(np.mean(np.sqrt(np.abs(x))))

    degenerate = rms == 0.0
    crest = peak / rms if rms > 0 else 0.0
    shape = rms / mean_abs if mean_abs > 0 else 0.0
    impulse = peak / mean_abs if mean_abs > 0 else 0.0
    clearance = peak / mean_sqrt_abs**2 if mean_sqrt_abs > 0 else 0.0
    with np.errstate(invalid="ignore", divide="ignore"), warnings.catch_warnings():
        # constant input trips scipy's precision-loss warning; the nan result
        # is mapped to 0 below, so the warning carries no information here
        warnings.simplefilter("ignore", RuntimeWarning)
        kurt = _finite_or_zero(stats.kurtosis(x, fisher=True, bias=False))
        skew = _finite_or_zero(stats.skew(x, bias=False))
    zero_crossings = float(np.count_nonzero(x[:-1] * x[1:] < 0))
    waveform_length = float(np.sum(np.abs(np.diff(x)))) if x.size > 1 else 0.0

    values = np.array(
        [
            mean,
            std,
            rms,
            peak,
            peak_to_peak,
            crest,
            kurt,
            skew,
            shape,
            impulse,
            clearance,
            zero_crossings,
            waveform_length,
            mean_abs,
        ]
    )
    return FeatureVector(
        FeatureKind.TIME,
        values,
        meta={"n": int(x.size), "degenerate": degenerate},
    )


def fft_features(seg: Segment) -> FeatureVector:
    """Raw DFT magnitude at the non-negative frequency bins.

    No window and no normalization are applied; the output has
    ``floor(N/2) + 1`` values for an N-sample segment.
    """
    mags = np.abs(np.fft.rfft(seg.samples))
    return FeatureVector(FeatureKind.FFT, mags, meta={"n": int(len(seg))})


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window ``0.5 - 0.5 cos(2 pi k / n)``, k = 0..n-1."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def stft_features(seg: Segment, cfg: StftConfig = StftConfig()) -> FeatureVector:
    """Hann-windowed frame magnitudes, flattened frame-major.

    Each length-``window_len`` frame is windowed, zero-padded to ``nfft``,
    and reduced to its ``nfft/2 + 1`` magnitude bins; frames are concatenated
    in time order.
    """
    x = seg.samples
    n_frames = cfg.n_frames(x.size)
    window = hann_window(cfg.window_len)
    frames = np.empty((n_frames, cfg.nfft // 2 + 1))
    for f in range(n_frames):
        start = f * cfg.hop
        frame = x[start : start + cfg.window_len] * window
        frames[f] = np.abs(np.fft.rfft(frame, n=cfg.nfft))
    return FeatureVector(
        FeatureKind.STFT,
        frames.ravel(),
        meta={
            "n": int(x.size),
            "window_len": cfg.window_len,
            "hop": cfg.hop,
            "nfft": cfg.nfft,
            "window": cfg.window,
            "n_frames": n_frames,
        },
    )
