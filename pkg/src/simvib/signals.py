"""Vibration segments, segmentation of long recordings, and SNR-calibrated noise.

All operations are pure functions of their inputs and safe to call from
concurrent workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CalibrationError, InvalidInputError

__all__ = [
    "Segment",
    "NoiseSpec",
    "segment_recording",
    "signal_power",
    "add_awgn",
    "splitmix64",
    "derive_seed",
]

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class Segment:
    """Fixed-length real-valued vibration window; the unit of classification.

    ``label`` is the integer class id of the operating condition, when known.
    """

    samples: np.ndarray
    sample_rate_hz: float
    source_id: str = ""
    label: int | None = None

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidInputError("segment samples must be a non-empty 1-D vector")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("segment samples must be finite")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise InvalidInputError("sample_rate_hz must be positive and finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)

    def with_samples(self, samples: np.ndarray) -> "Segment":
        """Copy of this segment with new sample values, metadata preserved."""
        return Segment(samples, self.sample_rate_hz, self.source_id, self.label)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise at a target SNR, fixed by a 64-bit seed.

    ``snr_db = math.inf`` is the documented no-noise sentinel: corruption is
    bypassed entirely. Any other non-finite SNR is rejected.
    """

    snr_db: float
    seed: int = 0

    def __post_init__(self) -> None:
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise InvalidInputError("snr_db must be finite (or +inf for no noise)")
        if not (0 <= int(self.seed) <= _U64):
            raise InvalidInputError("seed must fit in an unsigned 64-bit integer")

    @property
    def bypass(self) -> bool:
        return self.snr_db == math.inf


def segment_recording(
    recording: np.ndarray,
    window_len: int,
    hop: int | None = None,
    *,
    sample_rate_hz: float = 1.0,
    source_id: str = "",
    label: int | None = None,
) -> list[Segment]:
    """Slice a long recording into fixed-length windows.

    ``hop`` defaults to ``window_len`` (non-overlapping windows); a trailing
    remainder shorter than ``window_len`` is discarded. Returns
    ``floor((len - window_len) / hop) + 1`` segments.
    """
    recording = np.asarray(recording, dtype=np.float64)
    if recording.ndim != 1 or recording.size == 0:
        raise InvalidInputError("recording must be a non-empty 1-D vector")
    if window_len < 1:
        raise InvalidInputError("window_len must be a positive integer")
    if window_len > recording.size:
        raise InvalidInputError(
            f"window_len {window_len} exceeds recording length {recording.size}"
        )
    if hop is None:
        hop = window_len
    if hop < 1:
        raise InvalidInputError("hop must be >= 1")

    n_segments = (recording.size - window_len) // hop + 1
    out = []
    for k in range(n_segments):
        start = k * hop
        out.append(
            Segment(
                recording[start : start + window_len].copy(),
                sample_rate_hz,
                source_id=source_id,
                label=label,
            )
        )
    return out


def signal_power(seg: Segment) -> float:
    """Mean of squared samples."""
    return float(np.mean(np.square(seg.samples)))


def add_awgn(seg: Segment, spec: NoiseSpec) -> Segment:
    """Corrupt a segment with zero-mean white Gaussian noise at ``spec.snr_db``.

    The noise variance is ``signal_power(seg) / 10**(snr_db/10)`` so the SNR
    is defined against the clean segment's mean-square power. Variates come
    from numpy's PCG64 generator with the ziggurat normal sampler, so the
    realization is fully determined by ``spec.seed``.
    """
    if spec.bypass:
        return seg.with_samples(seg.samples.copy())
    power = signal_power(seg)
    if power <= 0.0:
        raise CalibrationError("cannot calibrate noise for a zero-power segment")
    sigma = math.sqrt(power / 10.0 ** (spec.snr_db / 10.0))
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    noise = rng.standard_normal(seg.samples.size) * sigma
    return seg.with_samples(seg.samples + noise)


def splitmix64(x: int) -> int:
    """SplitMix64 mixing step; a stateless 64-bit avalanche function."""
    x = (x + 0x9E3779B97F4A7C15) & _U64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _U64
    return (x ^ (x >> 31)) & _U64


def derive_seed(master_seed: int, *tokens: str) -> int:
    """Derive a per-work-item noise seed from a master seed and string tokens.

    Stateless: each token's UTF-8 bytes are absorbed through SplitMix64, so
    independent workers can derive their seeds without sharing RNG state.
    """
    h = splitmix64(int(master_seed) & _U64)
    for token in tokens:
        for b in token.encode("utf-8"):
            h = splitmix64(h ^ b)
        h = splitmix64(h ^ 0xFF)  # token separator, so ("ab","c") != ("a","bc")
    return h
