"""Binary-plus-descriptor serialization for feature vectors, libraries, segments.

Every record is a flat little-endian float64 payload (``.bin``) next to a
JSON sidecar (``.json``) describing what the payload is. Formats are
documented in docs/FORMATS.md.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .classifier import ClassId, ReferenceLibrary
from .errors import InvalidInputError
from .features import FeatureKind, FeatureVector
from .signals import Segment

__all__ = [
    "save_feature_vector",
    "load_feature_vector",
    "save_library",
    "load_library",
    "save_segment_cache",
    "load_segment_cache",
]

SCHEMA_VERSION = 1


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _read_json(path: Path) -> dict:
    return json.loads(path.read_text())


def save_feature_vector(fv: FeatureVector, base: Path) -> None:
    """Write ``<base>.bin`` (little-endian float64) and ``<base>.json``."""
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    base.with_suffix(".bin").write_bytes(fv.values.astype("<f8").tobytes())
    _write_json(
        base.with_suffix(".json"),
        {
            "schema_version": SCHEMA_VERSION,
            "record": "feature_vector",
            "kind": fv.kind.value,
            "length": len(fv),
            "meta": fv.meta,
        },
    )


def load_feature_vector(base: Path) -> FeatureVector:
    base = Path(base)
    desc = _read_json(base.with_suffix(".json"))
    values = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype="<f8")
    if desc.get("record") != "feature_vector":
        raise InvalidInputError(f"{base}: not a feature-vector record")
    if len(values) != desc["length"]:
        raise InvalidInputError(
            f"{base}: payload has {len(values)} values, descriptor says {desc['length']}"
        )
    return FeatureVector(
        FeatureKind(desc["kind"]), values.astype(np.float64), meta=dict(desc["meta"])
    )


def save_library(
    lib: ReferenceLibrary, out_dir: Path, pipeline: dict | None = None
) -> None:
    """Write one bin+descriptor record per class plus a ``library.json`` index.

    ``pipeline`` may carry the denoise/extractor settings the library was
    built with, so a later classification can reproduce the same pipeline.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    classes = []
    for cid in lib.classes:
        base = out_dir / f"class_{cid.id:03d}"
        save_feature_vector(lib.entries[cid], base)
        classes.append(
            {
                "id": cid.id,
                "name": cid.name,
                "record": base.name,
                "provenance": list(lib.provenance.get(cid, ())),
            }
        )
    _write_json(
        out_dir / "library.json",
        {
            "schema_version": SCHEMA_VERSION,
            "record": "reference_library",
            "kind": lib.kind.value,
            "classes": classes,
            "pipeline": pipeline or {},
        },
    )


def load_library(out_dir: Path) -> tuple[ReferenceLibrary, dict]:
    out_dir = Path(out_dir)
    index = _read_json(out_dir / "library.json")
    if index.get("record") != "reference_library":
        raise InvalidInputError(f"{out_dir}: not a reference-library directory")
    kind = FeatureKind(index["kind"])
    entries: dict[ClassId, FeatureVector] = {}
    provenance: dict[ClassId, tuple[str, ...]] = {}
    for rec in index["classes"]:
        cid = ClassId(rec["id"], rec["name"])
        fv = load_feature_vector(out_dir / rec["record"])
        if fv.kind is not kind:
            raise InvalidInputError(
                f"{out_dir}: class {cid.id} record kind {fv.kind.value} != {kind.value}"
            )
        entries[cid] = fv
        provenance[cid] = tuple(rec.get("provenance", ()))
    lib = ReferenceLibrary(kind=kind, entries=entries, provenance=provenance)
    return lib, dict(index.get("pipeline", {}))


def save_segment_cache(records, out_dir: Path) -> None:
    """Cache pre-segmented windows: one packed payload plus a JSON index."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not records:
        raise InvalidInputError("no segments to cache")
    lengths = {len(rec.segment) for rec in records}
    if len(lengths) != 1:
        raise InvalidInputError("cached segments must share one window length")
    window_len = lengths.pop()
    payload = np.concatenate([rec.segment.samples for rec in records])
    (out_dir / "segments.bin").write_bytes(payload.astype("<f8").tobytes())
    _write_json(
        out_dir / "segments.json",
        {
            "schema_version": SCHEMA_VERSION,
            "record": "segment_cache",
            "window_len": window_len,
            "count": len(records),
            "segments": [
                {
                    "uid": rec.uid,
                    "source_id": rec.segment.source_id,
                    "label": rec.segment.label,
                    "sample_rate_hz": rec.segment.sample_rate_hz,
                    "motor_speed_rpm": rec.motor_speed_rpm,
                    "entry_index": rec.entry_index,
                    "segment_index": rec.segment_index,
                }
                for rec in records
            ],
        },
    )


def load_segment_cache(out_dir: Path):
    from .dataset import SegmentRecord

    out_dir = Path(out_dir)
    index = _read_json(out_dir / "segments.json")
    if index.get("record") != "segment_cache":
        raise InvalidInputError(f"{out_dir}: not a segment cache")
    window_len = int(index["window_len"])
    payload = np.frombuffer((out_dir / "segments.bin").read_bytes(), dtype="<f8")
    if payload.size != window_len * index["count"]:
        raise InvalidInputError(f"{out_dir}: cache payload size mismatch")
    records = []
    for i, meta in enumerate(index["segments"]):
        seg = Segment(
            payload[i * window_len : (i + 1) * window_len].astype(np.float64),
            meta["sample_rate_hz"],
            source_id=meta["source_id"],
            label=meta["label"],
        )
        records.append(
            SegmentRecord(
                segment=seg,
                motor_speed_rpm=meta["motor_speed_rpm"],
                entry_index=meta["entry_index"],
                segment_index=meta["segment_index"],
            )
        )
    return records
