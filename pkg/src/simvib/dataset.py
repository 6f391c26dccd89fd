"""Labeled vibration corpora: manifest ingestion, segmentation, splits, synthesis.

The manifest is a line-oriented text file (grammar in docs/FORMATS.md):

    # comment
    version 1
    entry path=rec/a.f64 class_id=0 class_name=Normal motor_speed_rpm=1797 \
sample_rate_hz=12000 format=f64le

Recordings are either ``text`` (one decimal sample per line) or ``f64le``
(raw little-endian 64-bit reals); both round-trip bit-exactly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ManifestError, SimvibError, SplitError
from .signals import Segment, derive_seed, segment_recording

__all__ = [
    "RecordingFormat",
    "ManifestEntry",
    "DatasetManifest",
    "SegmentRecord",
    "SelectionRule",
    "SplitSpec",
    "read_recording",
    "write_recording",
    "load_manifest",
    "load_and_segment",
    "split_references",
    "synth_dataset",
]

MANIFEST_VERSION = 1
_ENTRY_KEYS = frozenset(
    {"path", "class_id", "class_name", "motor_speed_rpm", "sample_rate_hz", "format"}
)

# CWRU-style motor speeds; extended arithmetically when more are requested.
_DEFAULT_SPEEDS = (1797.0, 1772.0, 1750.0, 1730.0)


class RecordingFormat(Enum):
    TEXT = "text"
    F64LE = "f64le"


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    class_id: int
    class_name: str
    motor_speed_rpm: float
    sample_rate_hz: float
    format: RecordingFormat


@dataclass(frozen=True)
class DatasetManifest:
    version: int
    entries: tuple[ManifestEntry, ...]
    root: Path

    @property
    def n_classes(self) -> int:
        return max(e.class_id for e in self.entries) + 1

    def class_names(self) -> dict[int, str]:
        return {e.class_id: e.class_name for e in sorted(self.entries, key=lambda e: e.class_id)}

    @property
    def sample_rate_hz(self) -> float:
        return self.entries[0].sample_rate_hz


@dataclass(frozen=True)
class SegmentRecord:
    """A labeled segment plus the split bookkeeping the protocol needs."""

    segment: Segment
    motor_speed_rpm: float
    entry_index: int
    segment_index: int

    @property
    def uid(self) -> str:
        """Stable identifier used for seed derivation and provenance."""
        return f"e{self.entry_index}s{self.segment_index}"

    @property
    def label(self) -> int:
        assert self.segment.label is not None
        return self.segment.label


class SelectionRule(Enum):
    FIRST = "first"
    SEEDED_RANDOM = "seeded_random"


@dataclass(frozen=True)
class SplitSpec:
    """How many reference segments to reserve per (class, motor speed)."""

    refs_per_class_per_speed: int = 1
    selection: SelectionRule = SelectionRule.FIRST
    seed: int = 0

    def __post_init__(self) -> None:
        if self.refs_per_class_per_speed < 1:
            raise InvalidInputError("refs_per_class_per_speed must be >= 1")


def read_recording(path: Path, fmt: RecordingFormat) -> np.ndarray:
    path = Path(path)
    if fmt is RecordingFormat.F64LE:
        return np.frombuffer(path.read_bytes(), dtype="<f8").astype(np.float64)
    values = [
        float(line) for line in path.read_text().splitlines() if line.strip()
    ]
    return np.asarray(values, dtype=np.float64)


def write_recording(path: Path, samples: np.ndarray, fmt: RecordingFormat) -> None:
    path = Path(path)
    samples = np.asarray(samples, dtype=np.float64)
    if fmt is RecordingFormat.F64LE:
        path.write_bytes(samples.astype("<f8").tobytes())
    else:
        # repr round-trips float64 exactly
        path.write_text("\n".join(repr(float(v)) for v in samples) + "\n")


def _parse_entry(tokens: list[str], lineno: int, root: Path) -> ManifestEntry:
    kv: dict[str, str] = {}
    for token in tokens:
        if "=" not in token:
            raise ManifestError(f"line {lineno}: malformed token {token!r}")
        key, _, value = token.partition("=")
        if key not in _ENTRY_KEYS:
            raise ManifestError(f"line {lineno}: unknown key {key!r}")
        if key in kv:
            raise ManifestError(f"line {lineno}: duplicate key {key!r}")
        kv[key] = value
    missing = _ENTRY_KEYS - kv.keys()
    if missing:
        raise ManifestError(f"line {lineno}: missing keys {sorted(missing)}")
    try:
        fmt = RecordingFormat(kv["format"])
    except ValueError:
        raise ManifestError(
            f"line {lineno}: unsupported format {kv['format']!r}"
        ) from None
    try:
        entry = ManifestEntry(
            path=(root / kv["path"]).resolve(),
            class_id=int(kv["class_id"]),
            class_name=kv["class_name"],
            motor_speed_rpm=float(kv["motor_speed_rpm"]),
            sample_rate_hz=float(kv["sample_rate_hz"]),
            format=fmt,
        )
    except ValueError as exc:
        raise ManifestError(f"line {lineno}: {exc}") from None
    if entry.class_id < 0:
        raise ManifestError(f"line {lineno}: class_id must be nonnegative")
    if entry.sample_rate_hz <= 0:
        raise ManifestError(f"line {lineno}: sample_rate_hz must be positive")
    return entry


def load_manifest(path: Path) -> DatasetManifest:
    """Parse and fully validate a dataset manifest.

    Validation reads every referenced recording once: files must exist, parse
    in their declared format, and contain only finite samples. Class ids must
    be contiguous from 0 with consistent names, and all entries must share
    one sample rate.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    root = path.resolve().parent

    version: int | None = None
    entries: list[ManifestEntry] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if version is None:
            if tokens[0] != "version" or len(tokens) != 2:
                raise ManifestError(
                    f"line {lineno}: first record must be 'version <n>'"
                )
            version = int(tokens[1])
            if version != MANIFEST_VERSION:
                raise ManifestError(f"unsupported manifest version {version}")
            continue
        if tokens[0] != "entry":
            raise ManifestError(f"line {lineno}: expected an 'entry' record")
        entries.append(_parse_entry(tokens[1:], lineno, root))

    if version is None:
        raise ManifestError("manifest has no version record")
    if not entries:
        raise ManifestError("manifest contains no entries (empty dataset)")

    ids = sorted({e.class_id for e in entries})
    if ids != list(range(len(ids))):
        raise ManifestError(f"class ids must be contiguous from 0, got {ids}")
    names: dict[int, str] = {}
    for e in entries:
        if names.setdefault(e.class_id, e.class_name) != e.class_name:
            raise ManifestError(
                f"conflicting names for class {e.class_id}: "
                f"{names[e.class_id]!r} vs {e.class_name!r}"
            )
    rates = {e.sample_rate_hz for e in entries}
    if len(rates) != 1:
        raise ManifestError(f"inconsistent sample rates: {sorted(rates)}")
    labels_by_path: dict[Path, tuple[int, float]] = {}
    for e in entries:
        seen = labels_by_path.setdefault(e.path, (e.class_id, e.motor_speed_rpm))
        if seen != (e.class_id, e.motor_speed_rpm):
            raise ManifestError(f"duplicate path with conflicting labels: {e.path}")

    for e in entries:
        if not e.path.is_file():
            raise ManifestError(f"entry {e.path}: recording file not found")
        try:
            samples = read_recording(e.path, e.format)
        except ValueError as exc:
            raise ManifestError(f"entry {e.path}: unreadable recording ({exc})") from None
        if samples.size == 0:
            raise ManifestError(f"entry {e.path}: recording is empty")
        if not np.all(np.isfinite(samples)):
            raise ManifestError(f"entry {e.path}: recording has non-finite samples")

    return DatasetManifest(version=version, entries=tuple(entries), root=root)


def load_and_segment(
    manifest: DatasetManifest,
    window_len: int = 2000,
    hop: int | None = None,
) -> list[SegmentRecord]:
    """Segment every recording non-overlapping (by default) into labeled windows.

    Recordings shorter than ``window_len`` are skipped with a warning.
    """
    records: list[SegmentRecord] = []
    for entry_index, entry in enumerate(manifest.entries):
        samples = read_recording(entry.path, entry.format)
        if samples.size < window_len:
            warnings.warn(
                f"recording {entry.path.name} has {samples.size} samples, "
                f"shorter than window {window_len}; skipped",
                stacklevel=2,
            )
            continue
        segments = segment_recording(
            samples,
            window_len,
            hop,
            sample_rate_hz=entry.sample_rate_hz,
            source_id=entry.path.name,
            label=entry.class_id,
        )
        records.extend(
            SegmentRecord(
                segment=seg,
                motor_speed_rpm=entry.motor_speed_rpm,
                entry_index=entry_index,
                segment_index=k,
            )
            for k, seg in enumerate(segments)
        )
    return records


def split_references(
    records: list[SegmentRecord],
    spec: SplitSpec = SplitSpec(),
) -> tuple[list[SegmentRecord], list[SegmentRecord]]:
    """Partition segments into reference and test sets per (class, speed).

    FIRST picks the earliest segments of each (class, speed) group (manifest
    order, then position in the recording); SEEDED_RANDOM draws them
    deterministically from ``spec.seed``. The two outputs are disjoint and
    cover the input.
    """
    if not records:
        raise SplitError("no segments to split")
    groups: dict[tuple[int, float], list[int]] = {}
    for i, rec in enumerate(records):
        if rec.segment.label is None:
            raise SplitError(f"segment {rec.uid} has no class label")
        groups.setdefault((rec.label, rec.motor_speed_rpm), []).append(i)

    k = spec.refs_per_class_per_speed
    ref_indices: set[int] = set()
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    for key in sorted(groups):
        members = sorted(
            groups[key],
            key=lambda i: (records[i].entry_index, records[i].segment_index),
        )
        if len(members) < k:
            raise SplitError(
                f"class {key[0]} at {key[1]:g} rpm has only {len(members)} "
                f"segments, need {k} references"
            )
        if spec.selection is SelectionRule.FIRST:
            chosen = members[:k]
        else:
            picks = rng.choice(len(members), size=k, replace=False)
            chosen = [members[i] for i in sorted(picks)]
        ref_indices.update(chosen)

    refs = [records[i] for i in sorted(ref_indices)]
    tests = [rec for i, rec in enumerate(records) if i not in ref_indices]
    return refs, tests


def _speeds(n_speeds: int) -> list[float]:
    speeds = list(_DEFAULT_SPEEDS[:n_speeds])
    while len(speeds) < n_speeds:
        speeds.append(speeds[-1] - 25.0)
    return speeds


def _synth_recording(
    rng: np.random.Generator,
    n_samples: int,
    sample_rate_hz: float,
    class_id: int,
    speed_factor: float,
) -> np.ndarray:
    """Deterministic class signature: 3 tones plus an impulsive burst train.

    Tone frequencies are class-distinct so classes separate cleanly in the
    spectrum; amplitudes are class-identical (up to small jitter) so waveform
    statistics overlap across classes.
    """
    t = np.arange(n_samples) / sample_rate_hz
    fundamental = (300.0 + 110.0 * class_id) * speed_factor
    x = np.zeros(n_samples)
    for harmonic, amp in ((1.0, 1.0), (2.0, 0.6), (3.0, 0.35)):
        jitter = 1.0 + 0.02 * rng.uniform(-1.0, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        x += amp * jitter * np.sin(2.0 * np.pi * fundamental * harmonic * t + phase)

    # burst train: class-distinct repetition rate and resonance frequency
    rate_hz = (13.0 + 2.5 * class_id) * speed_factor
    resonance_hz = 2000.0 + 150.0 * class_id
    decay = 1500.0
    kernel_t = np.arange(256) / sample_rate_hz
    kernel = np.exp(-decay * kernel_t) * np.sin(2.0 * np.pi * resonance_hz * kernel_t)
    train = np.zeros(n_samples)
    period = sample_rate_hz / rate_hz
    offset = rng.uniform(0.0, period)
    positions = np.arange(offset, n_samples, period).astype(int)
    train[positions[positions < n_samples]] = 1.0
    x += 0.25 * np.convolve(train, kernel)[:n_samples]
    return x


def _check_separable(manifest: DatasetManifest, window_len: int) -> None:
    from .features import fft_features

    records = load_and_segment(manifest, window_len)
    by_class: dict[int, list[np.ndarray]] = {}
    feats = []
    for rec in records:
        fv = fft_features(rec.segment).values
        feats.append((rec.label, fv))
        by_class.setdefault(rec.label, []).append(fv)
    refs = {cid: np.mean(vs, axis=0) for cid, vs in by_class.items()}
    ids = sorted(refs)
    for label, fv in feats:
        dists = [float(np.linalg.norm(fv - refs[cid])) for cid in ids]
        if ids[int(np.argmin(dists))] != label:
            raise SimvibError(
                "synthetic dataset failed its separability self-check; "
                "try a different seed or fewer classes"
            )


def synth_dataset(
    out_dir: Path,
    n_classes: int = 10,
    per_class: int = 80,
    sample_rate_hz: float = 12000.0,
    seed: int = 0,
    *,
    n_speeds: int = 4,
    window_len: int = 2000,
    fmt: RecordingFormat = RecordingFormat.F64LE,
    verify_separable: bool = True,
) -> DatasetManifest:
    """Generate a seed-deterministic labeled corpus plus its manifest.

    Each class contributes ``per_class`` windows of ``window_len`` samples,
    spread over ``n_speeds`` motor speeds (one recording per class-speed
    pair). Clean class signatures are linearly separable in spectrum-feature
    space, which ``verify_separable`` confirms before returning.
    """
    if n_classes < 2:
        raise InvalidInputError("need at least 2 classes")
    if per_class < n_speeds:
        raise InvalidInputError("per_class must be >= n_speeds")
    out_dir = Path(out_dir)
    rec_dir = out_dir / "recordings"
    rec_dir.mkdir(parents=True, exist_ok=True)

    speeds = _speeds(n_speeds)
    max_rpm = max(speeds)
    ext = "f64" if fmt is RecordingFormat.F64LE else "txt"
    lines = [f"# synthetic corpus: {n_classes} classes x {n_speeds} speeds", "version 1"]
    for c in range(n_classes):
        for s, rpm in enumerate(speeds):
            n_windows = per_class // n_speeds + (1 if s < per_class % n_speeds else 0)
            rng = np.random.Generator(
                np.random.PCG64(derive_seed(seed, "synth", str(c), str(s)))
            )
            samples = _synth_recording(
                rng, n_windows * window_len, sample_rate_hz, c, rpm / max_rpm
            )
            rel = f"recordings/class{c:02d}_rpm{rpm:g}.{ext}"
            write_recording(out_dir / rel, samples, fmt)
            lines.append(
                f"entry path={rel} class_id={c} class_name=synth-{c:02d} "
                f"motor_speed_rpm={rpm:g} sample_rate_hz={sample_rate_hz:g} "
                f"format={fmt.value}"
            )
    manifest_path = out_dir / "manifest.txt"
    manifest_path.write_text("\n".join(lines) + "\n")

    manifest = load_manifest(manifest_path)
    if verify_separable:
        _check_separable(manifest, window_len)
    return manifest
