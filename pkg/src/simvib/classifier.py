"""Per-class reference library construction and nearest-reference decisions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IncompleteLibraryError, InvalidInputError
from .features import FeatureKind, FeatureVector
from .similarity import MeasureKind, SsmParams, score

__all__ = [
    "ClassId",
    "ReferenceLibrary",
    "Scorecard",
    "build_library",
    "classify",
]


@dataclass(frozen=True, order=True)
class ClassId:
    """Operational-condition identity: a small contiguous id plus a name."""

    id: int
    name: str = ""

    def __post_init__(self) -> None:
        if self.id < 0:
            raise InvalidInputError("class id must be nonnegative")


@dataclass(frozen=True)
class ReferenceLibrary:
    """One averaged feature vector per operational class.

    ``entries`` holds the elementwise mean of each class's reference feature
    vectors; ``provenance`` records the source segment ids that were averaged.
    """

    kind: FeatureKind
    entries: dict[ClassId, FeatureVector]
    provenance: dict[ClassId, tuple[str, ...]] = field(default_factory=dict)

    @property
    def classes(self) -> list[ClassId]:
        return sorted(self.entries)

    @property
    def n_classes(self) -> int:
        return len(self.entries)

    def vector_length(self) -> int:
        return len(next(iter(self.entries.values())))


@dataclass(frozen=True)
class Scorecard:
    """All per-class scores for one test vector, plus the decision.

    ``decided`` is the argmax class for similarities and the argmin class for
    distances; exact score ties resolve to the lowest class id with
    ``tie=True``.
    """

    measure: MeasureKind
    scores: dict[ClassId, float]
    decided: ClassId
    tie: bool = False

    def best_score(self) -> float:
        return self.scores[self.decided]


def build_library(
    refs: list[tuple[ClassId, FeatureVector]],
    provenance: dict[ClassId, tuple[str, ...]] | None = None,
) -> ReferenceLibrary:
    """Average same-class reference feature vectors into one entry per class.

    Every class id in 0..m-1 must be present at least once; all vectors must
    share one feature kind and length.
    """
    if not refs:
        raise IncompleteLibraryError("no reference vectors supplied")
    kind = refs[0][1].kind
    length = len(refs[0][1])
    by_class: dict[ClassId, list[np.ndarray]] = {}
    names: dict[int, str] = {}
    for cid, fv in refs:
        if fv.kind is not kind:
            raise InvalidInputError(
                f"mixed feature kinds: {fv.kind.value} vs {kind.value}"
            )
        if len(fv) != length:
            raise InvalidInputError(
                f"mixed feature lengths: {len(fv)} vs {length}"
            )
        if names.setdefault(cid.id, cid.name) != cid.name:
            raise InvalidInputError(
                f"conflicting names for class {cid.id}: "
                f"{names[cid.id]!r} vs {cid.name!r}"
            )
        by_class.setdefault(cid, []).append(fv.values)

    ids = sorted(c.id for c in by_class)
    if ids != list(range(len(ids))):
        missing = sorted(set(range(max(ids) + 1)) - set(ids))
        raise IncompleteLibraryError(f"missing reference classes: {missing}")

    entries = {
        cid: FeatureVector(kind, np.mean(vectors, axis=0), meta={"averaged": len(vectors)})
        for cid, vectors in by_class.items()
    }
    return ReferenceLibrary(kind=kind, entries=entries, provenance=dict(provenance or {}))


def classify(
    x: FeatureVector,
    lib: ReferenceLibrary,
    measure: MeasureKind,
    ssm_params: SsmParams = SsmParams(),
    *,
    invert_polarity: bool = False,
) -> Scorecard:
    """Score a test vector against every library entry and decide its class.

    ``invert_polarity`` is a debug flag that flips the decision rule (argmin
    for similarities, argmax for distances) so alternative readings of the
    decision operator can be compared; scores are unaffected.
    """
    if x.kind is not lib.kind:
        raise InvalidInputError(
            f"feature kind mismatch: test is {x.kind.value}, library is {lib.kind.value}"
        )
    if len(x) != lib.vector_length():
        raise InvalidInputError(
            f"feature length mismatch: test is {len(x)}, library is {lib.vector_length()}"
        )
    scores = {
        cid: score(measure, x.values, entry.values, ssm_params)
        for cid, entry in sorted(lib.entries.items())
    }
    pick_max = measure.higher_is_better ^ invert_polarity
    extremum = max(scores.values()) if pick_max else min(scores.values())
    winners = [cid for cid in sorted(scores) if scores[cid] == extremum]
    return Scorecard(
        measure=measure,
        scores=scores,
        decided=winners[0],
        tie=len(winners) > 1,
    )
