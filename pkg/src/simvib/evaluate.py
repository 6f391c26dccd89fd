"""Accuracy-vs-SNR sweeps over the feature x measure grid, with report emission.

The sweep corrupts test segments (and, by default, reference segments) with
seeded white noise, denoises, extracts each configured feature kind, builds
the per-class reference library, and classifies every test segment under
each configured measure. Per-segment noise seeds are derived statelessly
from the master seed, the segment uid, its role, and the SNR label, so work
items are order-independent and the whole run is reproducible.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .classifier import ClassId, build_library, classify
from .dataset import DatasetManifest, SegmentRecord, SplitSpec, load_and_segment, split_references
from .errors import InvalidInputError, ReportError
from .features import FeatureKind, StftConfig, fft_features, stft_features, time_features
from .signals import NoiseSpec, Segment, add_awgn, derive_seed
from .similarity import MeasureKind, SsmParams
from .wavelet import DenoiseConfig, denoise

__all__ = [
    "RunConfig",
    "CellResult",
    "ScatterData",
    "EvalReport",
    "snr_label",
    "accuracy",
    "run_sweep",
    "emit_report",
    "load_runlog",
    "SCATTER_PAIRS",
]

ALL_FEATURES = (FeatureKind.TIME, FeatureKind.FFT, FeatureKind.STFT)
ALL_MEASURES = (MeasureKind.COSINE, MeasureKind.EUCLIDEAN, MeasureKind.SSM)
DEFAULT_SNRS_DB = (2.0, 4.0, 6.0, 8.0, 10.0, 20.0)

# Score pairs plotted per feature kind: the two best-performing measures.
SCATTER_PAIRS = {
    FeatureKind.FFT: (MeasureKind.COSINE, MeasureKind.EUCLIDEAN),
    FeatureKind.STFT: (MeasureKind.COSINE, MeasureKind.EUCLIDEAN),
    FeatureKind.TIME: (MeasureKind.SSM, MeasureKind.EUCLIDEAN),
}


def snr_label(snr_db: float) -> str:
    """Canonical short label for an SNR value; ``inf`` is the no-noise run."""
    return "inf" if snr_db == math.inf else f"{snr_db:g}"


@dataclass(frozen=True)
class RunConfig:
    """Everything one sweep depends on; echoed verbatim into reports."""

    features: tuple[FeatureKind, ...] = ALL_FEATURES
    measures: tuple[MeasureKind, ...] = ALL_MEASURES
    snr_db: tuple[float, ...] = DEFAULT_SNRS_DB
    denoise: DenoiseConfig = DenoiseConfig()
    stft: StftConfig = StftConfig()
    ssm: SsmParams = SsmParams()
    split: SplitSpec = SplitSpec()
    master_seed: int = 0
    corrupt_references: bool = True
    apply_denoise: bool = True
    window_len: int = 2000
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.features or not self.measures or not self.snr_db:
            raise InvalidInputError("features, measures, and snr_db must be non-empty")
        for snr in self.snr_db:
            if math.isnan(snr) or snr == -math.inf:
                raise InvalidInputError(f"invalid SNR value: {snr}")
        if self.workers < 1:
            raise InvalidInputError("workers must be >= 1")

    def echo(self) -> dict:
        return {
            "features": [k.value for k in self.features],
            "measures": [m.value for m in self.measures],
            "snr_db": [snr_label(s) for s in self.snr_db],
            "denoise": {
                "depth": self.denoise.depth,
                "threshold_rule": self.denoise.threshold_rule.value,
                "wavelet": self.denoise.wavelet,
            },
            "stft": {
                "window_len": self.stft.window_len,
                "hop": self.stft.hop,
                "nfft": self.stft.nfft,
                "window": self.stft.window,
            },
            "ssm": {
                "window": self.ssm.window,
                "k1": self.ssm.k1,
                "k2": self.ssm.k2,
                "stride": self.ssm.stride,
            },
            "split": {
                "refs_per_class_per_speed": self.split.refs_per_class_per_speed,
                "selection": self.split.selection.value,
                "seed": self.split.seed,
            },
            "master_seed": self.master_seed,
            "corrupt_references": self.corrupt_references,
            "apply_denoise": self.apply_denoise,
            "window_len": self.window_len,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class CellResult:
    """Outcome of one (feature, measure, SNR) setting."""

    feature: FeatureKind
    measure: MeasureKind
    snr: str
    accuracy: float
    confusion: np.ndarray  # rows = true class, columns = decided class
    n_tests: int
    timings_s: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ScatterData:
    """Per-test score pairs against the true-class reference (one SNR)."""

    feature: FeatureKind
    snr: str
    measure_x: MeasureKind
    measure_y: MeasureKind
    rows: tuple[tuple[int, float, float], ...]  # (true class id, x, y)


@dataclass(frozen=True)
class EvalReport:
    class_names: dict[int, str]
    features: tuple[FeatureKind, ...]
    measures: tuple[MeasureKind, ...]
    snrs: tuple[str, ...]
    cells: dict[tuple[str, str, str], CellResult]
    scatter: dict[tuple[str, str], ScatterData]
    config_echo: dict

    def cell(self, feature: FeatureKind, measure: MeasureKind, snr: float | str) -> CellResult:
        key = snr if isinstance(snr, str) else snr_label(snr)
        return self.cells[(feature.value, measure.value, key)]

    def mean_accuracy(self, feature: FeatureKind, measure: MeasureKind) -> float:
        """Mean accuracy over this run's SNR levels for one setting."""
        return float(
            np.mean([self.cell(feature, measure, s).accuracy for s in self.snrs])
        )


def accuracy(predictions, truths) -> float:
    """Fraction of predictions equal to their ground-truth labels."""
    predictions = list(predictions)
    truths = list(truths)
    if not predictions or len(predictions) != len(truths):
        raise InvalidInputError("predictions and truths must be equal-length, non-empty")
    matches = sum(1 for p, t in zip(predictions, truths) if p == t)
    return matches / len(predictions)


def _map_maybe_parallel(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _prepare(
    rec: SegmentRecord,
    role: str,
    snr_db: float,
    corrupt: bool,
    cfg: RunConfig,
) -> Segment:
    seg = rec.segment
    if corrupt:
        seed = derive_seed(cfg.master_seed, role, rec.uid, snr_label(snr_db))
        seg = add_awgn(seg, NoiseSpec(snr_db, seed))
    if cfg.apply_denoise:
        seg = denoise(seg, cfg.denoise)
    return seg


def _extract(kind: FeatureKind, seg: Segment, cfg: RunConfig):
    if kind is FeatureKind.TIME:
        return time_features(seg)
    if kind is FeatureKind.FFT:
        return fft_features(seg)
    return stft_features(seg, cfg.stft)


def run_sweep(manifest: DatasetManifest, cfg: RunConfig = RunConfig()) -> EvalReport:
    """Evaluate the full feature x measure grid at every configured SNR."""
    names = manifest.class_names()
    n_classes = manifest.n_classes
    class_ids = {i: ClassId(i, names[i]) for i in range(n_classes)}

    records = load_and_segment(manifest, cfg.window_len)
    refs, tests = split_references(records, cfg.split)
    provenance: dict[ClassId, tuple[str, ...]] = {}
    for rec in refs:
        cid = class_ids[rec.label]
        provenance[cid] = provenance.get(cid, ()) + (rec.uid,)

    cells: dict[tuple[str, str, str], CellResult] = {}
    scatter: dict[tuple[str, str], ScatterData] = {}
    for snr in cfg.snr_db:
        label = snr_label(snr)
        t0 = time.perf_counter()
        ref_signals = _map_maybe_parallel(
            lambda r: _prepare(r, "ref", snr, cfg.corrupt_references, cfg),
            refs,
            cfg.workers,
        )
        test_signals = _map_maybe_parallel(
            lambda r: _prepare(r, "test", snr, True, cfg),
            tests,
            cfg.workers,
        )
        prepare_s = time.perf_counter() - t0

        for kind in cfg.features:
            t0 = time.perf_counter()
            ref_feats = _map_maybe_parallel(
                lambda s: _extract(kind, s, cfg), ref_signals, cfg.workers
            )
            test_feats = _map_maybe_parallel(
                lambda s: _extract(kind, s, cfg), test_signals, cfg.workers
            )
            extract_s = time.perf_counter() - t0

            lib = build_library(
                [(class_ids[rec.label], fv) for rec, fv in zip(refs, ref_feats)],
                provenance=provenance,
            )

            cards_by_measure = {}
            for measure in cfg.measures:
                t0 = time.perf_counter()
                cards = _map_maybe_parallel(
                    lambda fv: classify(fv, lib, measure, cfg.ssm),
                    test_feats,
                    cfg.workers,
                )
                classify_s = time.perf_counter() - t0
                cards_by_measure[measure] = cards

                confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
                for rec, card in zip(tests, cards):
                    confusion[rec.label, card.decided.id] += 1
                cells[(kind.value, measure.value, label)] = CellResult(
                    feature=kind,
                    measure=measure,
                    snr=label,
                    accuracy=float(np.trace(confusion)) / len(tests),
                    confusion=confusion,
                    n_tests=len(tests),
                    timings_s={
                        "prepare": prepare_s,
                        "extract": extract_s,
                        "classify": classify_s,
                    },
                )

            mx, my = SCATTER_PAIRS[kind]
            if mx in cfg.measures and my in cfg.measures:
                rows = tuple(
                    (
                        rec.label,
                        cards_by_measure[mx][i].scores[class_ids[rec.label]],
                        cards_by_measure[my][i].scores[class_ids[rec.label]],
                    )
                    for i, rec in enumerate(tests)
                )
                scatter[(kind.value, label)] = ScatterData(
                    feature=kind, snr=label, measure_x=mx, measure_y=my, rows=rows
                )

    return EvalReport(
        class_names=names,
        features=cfg.features,
        measures=cfg.measures,
        snrs=tuple(snr_label(s) for s in cfg.snr_db),
        cells=cells,
        scatter=scatter,
        config_echo=cfg.echo(),
    )


# ---------------------------------------------------------------------------
# report emission

_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _timestamp_line(generated_at: str) -> str:
    return f"# generated_at={generated_at}\n"


def _grid_csv(report: EvalReport, generated_at: str) -> str:
    header = ",".join(["setting"] + [f"snr_{s}_db" for s in report.snrs])
    lines = [header]
    for kind in report.features:
        for measure in report.measures:
            row = [f"{kind.value}+{measure.value}"]
            row += [
                f"{report.cells[(kind.value, measure.value, s)].accuracy:.6f}"
                for s in report.snrs
            ]
            lines.append(",".join(row))
    return _timestamp_line(generated_at) + "\n".join(lines) + "\n"


def _confusion_csv(report: EvalReport, cell: CellResult, generated_at: str) -> str:
    names = [report.class_names[i] for i in sorted(report.class_names)]
    lines = ["true\\decided," + ",".join(names)]
    for i, name in enumerate(names):
        lines.append(name + "," + ",".join(str(int(v)) for v in cell.confusion[i]))
    return _timestamp_line(generated_at) + "\n".join(lines) + "\n"


def _scatter_csv(sc: ScatterData, names: dict[int, str], generated_at: str) -> str:
    lines = [
        f"class_id,class_name,score_{sc.measure_x.value},score_{sc.measure_y.value}"
    ]
    for cid, x, y in sc.rows:
        lines.append(f"{cid},{names[cid]},{x!r},{y!r}")
    return _timestamp_line(generated_at) + "\n".join(lines) + "\n"


def _scatter_svg(sc: ScatterData, names: dict[int, str]) -> str:
    width, height, margin = 640, 480, 60
    xs = [r[1] for r in sc.rows]
    ys = [r[2] for r in sc.rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = (x_hi - x_lo) * 0.05 or 1.0
    y_pad = (y_hi - y_lo) * 0.05 or 1.0
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(v: float) -> float:
        return margin + (v - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def py(v: float) -> float:
        return height - margin - (v - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" '
        f'font-size="14">{sc.measure_x.value} score ({sc.feature.value} features, '
        f"snr {sc.snr} dB)</text>",
        f'<text x="18" y="{height / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {height / 2:.1f})">{sc.measure_y.value} score</text>',
    ]
    for cid, x, y in sc.rows:
        color = _PALETTE[cid % len(_PALETTE)]
        parts.append(
            f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}" '
            f'fill-opacity="0.7"/>'
        )
    for i, cid in enumerate(sorted(names)):
        color = _PALETTE[cid % len(_PALETTE)]
        y = margin + 14 * i
        parts.append(f'<rect x="{width - margin + 8}" y="{y - 8}" width="8" height="8" fill="{color}"/>')
        parts.append(
            f'<text x="{width - margin + 20}" y="{y}" font-size="10">{names[cid]}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(
    report: EvalReport,
    out_dir: Path,
    formats: tuple[str, ...] = ("csv", "jsonl"),
) -> list[Path]:
    """Write the accuracy grid, confusion matrices, scatter data, and run log.

    Every CSV starts with a single ``# generated_at=`` comment line; all
    remaining bytes are deterministic for a fixed report.
    """
    out_dir = Path(out_dir)
    unknown = set(formats) - {"csv", "jsonl", "svg"}
    if unknown:
        raise ReportError(f"unknown report formats: {sorted(unknown)}")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create report directory {out_dir}: {exc}") from exc

    generated_at = datetime.now(timezone.utc).isoformat()
    written: list[Path] = []

    def _write(path: Path, text: str) -> None:
        try:
            path.write_text(text)
        except OSError as exc:
            raise ReportError(f"cannot write report file {path}: {exc}") from exc
        written.append(path)

    if "csv" in formats:
        _write(out_dir / "accuracy_grid.csv", _grid_csv(report, generated_at))
        for key in sorted(report.cells):
            kind, measure, snr = key
            _write(
                out_dir / f"confusion_{kind}_{measure}_snr{snr}.csv",
                _confusion_csv(report, report.cells[key], generated_at),
            )
        for key in sorted(report.scatter):
            kind, snr = key
            _write(
                out_dir / f"scatter_{kind}_snr{snr}.csv",
                _scatter_csv(report.scatter[key], report.class_names, generated_at),
            )
    if "svg" in formats:
        for key in sorted(report.scatter):
            kind, snr = key
            _write(
                out_dir / f"scatter_{kind}_snr{snr}.svg",
                _scatter_svg(report.scatter[key], report.class_names),
            )
    if "jsonl" in formats:
        _write(out_dir / "runlog.jsonl", _runlog_text(report, generated_at))
    return written


def _runlog_text(report: EvalReport, generated_at: str) -> str:
    records = [
        {
            "type": "meta",
            "schema_version": 1,
            "generated_at": generated_at,
            "config": report.config_echo,
            "class_names": {str(k): v for k, v in report.class_names.items()},
            "features": [k.value for k in report.features],
            "measures": [m.value for m in report.measures],
            "snrs": list(report.snrs),
        }
    ]
    for key in sorted(report.cells):
        cell = report.cells[key]
        records.append(
            {
                "type": "cell",
                "feature": cell.feature.value,
                "measure": cell.measure.value,
                "snr": cell.snr,
                "accuracy": cell.accuracy,
                "n_tests": cell.n_tests,
                "confusion": cell.confusion.tolist(),
                "timings_s": cell.timings_s,
            }
        )
    for key in sorted(report.scatter):
        sc = report.scatter[key]
        records.append(
            {
                "type": "scatter",
                "feature": sc.feature.value,
                "snr": sc.snr,
                "measure_x": sc.measure_x.value,
                "measure_y": sc.measure_y.value,
                "rows": [[cid, x, y] for cid, x, y in sc.rows],
            }
        )
    return "\n".join(json.dumps(rec, sort_keys=True) for rec in records) + "\n"


def load_runlog(path: Path) -> EvalReport:
    """Rebuild an EvalReport from a saved run log for re-rendering."""
    path = Path(path)
    meta = None
    cells: dict[tuple[str, str, str], CellResult] = {}
    scatter: dict[tuple[str, str], ScatterData] = {}
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec["type"] == "meta":
            meta = rec
        elif rec["type"] == "cell":
            cell = CellResult(
                feature=FeatureKind(rec["feature"]),
                measure=MeasureKind(rec["measure"]),
                snr=rec["snr"],
                accuracy=rec["accuracy"],
                confusion=np.asarray(rec["confusion"], dtype=np.int64),
                n_tests=rec["n_tests"],
                timings_s=rec.get("timings_s", {}),
            )
            cells[(rec["feature"], rec["measure"], rec["snr"])] = cell
        elif rec["type"] == "scatter":
            scatter[(rec["feature"], rec["snr"])] = ScatterData(
                feature=FeatureKind(rec["feature"]),
                snr=rec["snr"],
                measure_x=MeasureKind(rec["measure_x"]),
                measure_y=MeasureKind(rec["measure_y"]),
                rows=tuple((int(c), float(x), float(y)) for c, x, y in rec["rows"]),
            )
    if meta is None:
        raise ReportError(f"{path}: run log has no meta record")
    return EvalReport(
        class_names={int(k): v for k, v in meta["class_names"].items()},
        features=tuple(FeatureKind(k) for k in meta["features"]),
        measures=tuple(MeasureKind(m) for m in meta["measures"]),
        snrs=tuple(meta["snrs"]),
        cells=cells,
        scatter=scatter,
        config_echo=meta["config"],
    )
