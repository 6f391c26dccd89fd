"""Command-line interface.

Subcommands: ``synth`` (generate a synthetic dataset), ``segment``
(pre-segment and cache), ``sweep`` (full evaluation), ``classify`` (score a
recording's windows against a saved library), ``report`` (re-render outputs
from a saved run log). Exits 0 on success; on failure prints one
machine-readable ``error {json}`` line to stderr and exits nonzero.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .classifier import classify
from .dataset import (
    RecordingFormat,
    SplitSpec,
    SelectionRule,
    load_manifest,
    load_and_segment,
    read_recording,
    split_references,
    synth_dataset,
)
from .errors import SimvibError
from .evaluate import (
    ALL_FEATURES,
    ALL_MEASURES,
    DEFAULT_SNRS_DB,
    RunConfig,
    emit_report,
    load_runlog,
    run_sweep,
    snr_label,
)
from .features import FeatureKind, StftConfig
from .signals import NoiseSpec, Segment, add_awgn, derive_seed, segment_recording
from .similarity import MeasureKind
from .storage import load_library, save_library, save_segment_cache
from .wavelet import DenoiseConfig, ThresholdRule, denoise


def _parse_features(text: str) -> tuple[FeatureKind, ...]:
    return tuple(FeatureKind(tok.strip().lower()) for tok in text.split(","))


def _parse_measures(text: str) -> tuple[MeasureKind, ...]:
    return tuple(MeasureKind(tok.strip().lower()) for tok in text.split(","))


def _parse_snrs(text: str) -> tuple[float, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        out.append(math.inf if tok in ("inf", "clean", "none") else float(tok))
    return tuple(out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simvib",
        description="Similarity-based vibration condition monitoring toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=80, help="segments per class")
    p.add_argument("--speeds", type=int, default=4, help="motor speeds per class")
    p.add_argument("--sample-rate", type=float, default=12000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, default=2000)
    p.add_argument(
        "--format", choices=[f.value for f in RecordingFormat], default="f64le"
    )

    p = sub.add_parser("segment", help="pre-segment a dataset and cache the windows")
    p.add_argument("--dataset", type=Path, required=True, help="manifest path")
    p.add_argument("--out", type=Path, required=True, help="cache directory")
    p.add_argument("--window", type=int, default=2000)
    p.add_argument("--hop", type=int, default=None)

    p = sub.add_parser("sweep", help="run the full accuracy-vs-SNR evaluation")
    p.add_argument("--dataset", type=Path, required=True, help="manifest path")
    p.add_argument("--out", type=Path, required=True, help="report directory")
    p.add_argument("--features", type=str, default="time,fft,stft")
    p.add_argument("--measures", type=str, default="cosine,euclidean,ssm")
    p.add_argument(
        "--snr",
        type=str,
        default=",".join(snr_label(s) for s in DEFAULT_SNRS_DB),
        help="comma-separated SNR levels in dB ('inf' for no noise)",
    )
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument(
        "--refs-clean",
        action="store_true",
        help="keep reference segments noise-free (tests are always corrupted)",
    )
    p.add_argument("--no-denoise", action="store_true", help="skip wavelet denoising")
    p.add_argument("--window", type=int, default=2000)
    p.add_argument("--depth", type=int, default=3, help="wavelet packet depth")
    p.add_argument(
        "--threshold-rule",
        choices=[r.value for r in ThresholdRule],
        default="paper",
    )
    p.add_argument("--stft-window", type=int, default=256)
    p.add_argument("--stft-hop", type=int, default=128)
    p.add_argument("--refs-per-speed", type=int, default=1)
    p.add_argument(
        "--ref-selection",
        choices=[r.value for r in SelectionRule],
        default="first",
    )
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--svg", action="store_true", help="also render scatter SVGs")
    p.add_argument(
        "--save-libraries",
        action="store_true",
        help="save the clean reference library per feature kind under <out>/libraries",
    )

    p = sub.add_parser("classify", help="classify a recording against a saved library")
    p.add_argument("--library", type=Path, required=True, help="library directory")
    p.add_argument("--input", type=Path, required=True, help="recording file")
    p.add_argument(
        "--format", choices=[f.value for f in RecordingFormat], default="f64le"
    )
    p.add_argument("--sample-rate", type=float, default=12000.0)
    p.add_argument(
        "--measure", choices=[m.value for m in MeasureKind], default="cosine"
    )
    p.add_argument("--snr", type=str, default="inf", help="corrupt input first (dB)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("report", help="re-render reports from a saved run log")
    p.add_argument("--runlog", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--svg", action="store_true")

    return parser


def _cmd_synth(args) -> int:
    manifest = synth_dataset(
        args.out,
        n_classes=args.classes,
        per_class=args.per_class,
        sample_rate_hz=args.sample_rate,
        seed=args.seed,
        n_speeds=args.speeds,
        window_len=args.window,
        fmt=RecordingFormat(args.format),
    )
    print(
        json.dumps(
            {
                "manifest": str(args.out / "manifest.txt"),
                "classes": manifest.n_classes,
                "entries": len(manifest.entries),
            }
        )
    )
    return 0


def _cmd_segment(args) -> int:
    manifest = load_manifest(args.dataset)
    records = load_and_segment(manifest, args.window, args.hop)
    save_segment_cache(records, args.out)
    print(json.dumps({"cache": str(args.out), "segments": len(records)}))
    return 0


def _sweep_config(args) -> RunConfig:
    return RunConfig(
        features=_parse_features(args.features),
        measures=_parse_measures(args.measures),
        snr_db=_parse_snrs(args.snr),
        denoise=DenoiseConfig(
            depth=args.depth, threshold_rule=ThresholdRule(args.threshold_rule)
        ),
        stft=StftConfig(window_len=args.stft_window, hop=args.stft_hop),
        split=SplitSpec(
            refs_per_class_per_speed=args.refs_per_speed,
            selection=SelectionRule(args.ref_selection),
            seed=args.seed,
        ),
        master_seed=args.seed,
        corrupt_references=not args.refs_clean,
        apply_denoise=not args.no_denoise,
        window_len=args.window,
        workers=args.workers,
    )


def _save_clean_libraries(manifest, cfg: RunConfig, out_dir: Path) -> None:
    from .classifier import ClassId, build_library
    from .evaluate import _extract, _prepare

    records = load_and_segment(manifest, cfg.window_len)
    refs, _ = split_references(records, cfg.split)
    names = manifest.class_names()
    signals = [_prepare(rec, "ref", math.inf, False, cfg) for rec in refs]
    for kind in cfg.features:
        feats = [_extract(kind, seg, cfg) for seg in signals]
        lib = build_library(
            [(ClassId(rec.label, names[rec.label]), fv) for rec, fv in zip(refs, feats)]
        )
        save_library(
            lib,
            out_dir / "libraries" / kind.value,
            pipeline={
                "window_len": cfg.window_len,
                "apply_denoise": cfg.apply_denoise,
                "denoise": cfg.echo()["denoise"],
                "stft": cfg.echo()["stft"],
            },
        )


def _cmd_sweep(args) -> int:
    manifest = load_manifest(args.dataset)
    cfg = _sweep_config(args)
    report = run_sweep(manifest, cfg)
    formats = ("csv", "jsonl", "svg") if args.svg else ("csv", "jsonl")
    written = emit_report(report, args.out, formats)
    if args.save_libraries:
        _save_clean_libraries(manifest, cfg, args.out)
    print(
        json.dumps(
            {
                "out": str(args.out),
                "files": len(written),
                "settings": len(report.cells),
            }
        )
    )
    return 0


def _cmd_classify(args) -> int:
    lib, pipeline = load_library(args.library)
    samples = read_recording(args.input, RecordingFormat(args.format))
    window_len = int(pipeline.get("window_len", 2000))
    segments = segment_recording(
        samples, window_len, sample_rate_hz=args.sample_rate, source_id=args.input.name
    )
    measure = MeasureKind(args.measure)
    snrs = _parse_snrs(args.snr)
    stft_cfg = StftConfig(
        window_len=int(pipeline.get("stft", {}).get("window_len", 256)),
        hop=int(pipeline.get("stft", {}).get("hop", 128)),
    )
    denoise_cfg = DenoiseConfig(
        depth=int(pipeline.get("denoise", {}).get("depth", 3)),
        threshold_rule=ThresholdRule(
            pipeline.get("denoise", {}).get("threshold_rule", "paper")
        ),
    )
    from .evaluate import _extract

    helper_cfg = RunConfig(stft=stft_cfg)  # reuses the extractor dispatch
    for i, seg in enumerate(segments):
        if snrs[0] != math.inf:
            seed = derive_seed(args.seed, "classify", f"{args.input.name}#{i}")
            seg = add_awgn(seg, NoiseSpec(snrs[0], seed))
        if pipeline.get("apply_denoise", True):
            seg = denoise(seg, denoise_cfg)
        fv = _extract(lib.kind, seg, helper_cfg)
        card = classify(fv, lib, measure)
        print(
            json.dumps(
                {
                    "segment": i,
                    "decided": card.decided.id,
                    "class_name": card.decided.name,
                    "tie": card.tie,
                    "scores": {str(c.id): card.scores[c] for c in sorted(card.scores)},
                },
                sort_keys=True,
            )
        )
    return 0


def _cmd_report(args) -> int:
    report = load_runlog(args.runlog)
    formats = ("csv", "jsonl", "svg") if args.svg else ("csv", "jsonl")
    written = emit_report(report, args.out, formats)
    print(json.dumps({"out": str(args.out), "files": len(written)}))
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "segment": _cmd_segment,
    "sweep": _cmd_sweep,
    "classify": _cmd_classify,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (SimvibError, OSError) as exc:
        print(
            "error " + json.dumps({"type": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
