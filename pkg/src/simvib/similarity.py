"""Similarity measures between feature vectors: cosine, Euclidean, windowed SSM."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateInputWarning, InvalidInputError, UndefinedSimilarityError

__all__ = [
    "MeasureKind",
    "SsmParams",
    "cosine",
    "euclidean",
    "ssm",
    "score",
]


class MeasureKind(Enum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"
    SSM = "ssm"

    @property
    def higher_is_better(self) -> bool:
        """Decision polarity: similarities are maximized, distances minimized."""
        return self is not MeasureKind.EUCLIDEAN


@dataclass(frozen=True)
class SsmParams:
    """Sliding-window structural similarity parameters.

    Stabilizing constants are ``C1 = (k1 * L)**2`` and ``C2 = (k2 * L)**2``
    where L is the joint min-to-max range of the two input vectors.
    """

    window: int = 7
    k1: float = 0.01
    k2: float = 0.03
    stride: int = 1

    def __post_init__(self) -> None:
        if self.window < 3 or self.window % 2 == 0:
            raise InvalidInputError("window must be an odd integer >= 3")
        if not (self.k1 > 0 and self.k2 > 0):
            raise InvalidInputError("k1 and k2 must be positive")
        if self.stride < 1:
            raise InvalidInputError("stride must be >= 1")


def _as_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise InvalidInputError("similarity inputs must be 1-D vectors")
    if x.size != y.size:
        raise InvalidInputError(f"length mismatch: {x.size} vs {y.size}")
    if x.size == 0:
        raise InvalidInputError("similarity inputs must be non-empty")
    return x, y


def cosine(x, y) -> float:
    """Cosine similarity ``<x, y> / (|x| |y|)``, clamped to [-1, 1].

    Raises UndefinedSimilarityError when either vector is all zeros.
    """
    x, y = _as_pair(x, y)
    dx = float(np.dot(x, x))
    dy = float(np.dot(y, y))
    if dx == 0.0 or dy == 0.0:
        raise UndefinedSimilarityError("cosine similarity of a zero vector is undefined")
    # sqrt(dx * dy) keeps cosine(x, x) exactly 1; split the roots on overflow
    prod = dx * dy
    denom = math.sqrt(prod) if math.isfinite(prod) else math.sqrt(dx) * math.sqrt(dy)
    return float(np.clip(float(np.dot(x, y)) / denom, -1.0, 1.0))


def euclidean(x, y) -> float:
    """Euclidean distance ``sqrt(sum((x - y)**2))``."""
    x, y = _as_pair(x, y)
    return float(np.linalg.norm(x - y))


def _moving_mean(v: np.ndarray, window: int) -> np.ndarray:
    # means of every contiguous length-`window` slice (stride 1)
    return np.convolve(v, np.full(window, 1.0 / window), mode="valid")


def ssm(x, y, params: SsmParams = SsmParams()) -> float:
    """Mean structural similarity over sliding windows of the two vectors.

    Each window position compares local luminance (means), contrast
    (standard deviations), and structure (covariance):

        (2 mx my + C1) (2 cxy + C2) / ((mx^2 + my^2 + C1) (vx + vy + C2))

    using population moments over the window. Positions advance by
    ``params.stride``; the result is the mean over positions, in [-1, 1].
    A zero joint range degrades C1, C2 to ``(k * 1)**2`` with a
    DegenerateInputWarning.
    """
    x, y = _as_pair(x, y)
    w = params.window
    if x.size < w:
        raise InvalidInputError(f"vectors shorter than the window ({x.size} < {w})")

    joint_range = float(max(np.max(x), np.max(y)) - min(np.min(x), np.min(y)))
    if joint_range == 0.0:
        warnings.warn(
            "joint dynamic range is zero; falling back to unit range for C1/C2",
            DegenerateInputWarning,
            stacklevel=2,
        )
        joint_range = 1.0
    c1 = (params.k1 * joint_range) ** 2
    c2 = (params.k2 * joint_range) ** 2

    mx = _moving_mean(x, w)
    my = _moving_mean(y, w)
    # population second moments: var = E[v^2] - mean^2, cov = E[xy] - mx my
    vx = _moving_mean(x * x, w) - mx * mx
    vy = _moving_mean(y * y, w) - my * my
    cxy = _moving_mean(x * y, w) - mx * my

    sl = slice(None, None, params.stride)
    mx, my, vx, vy, cxy = mx[sl], my[sl], vx[sl], vy[sl], cxy[sl]
    scores = ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / (
        (mx * mx + my * my + c1) * (vx + vy + c2)
    )
    return float(np.clip(np.mean(scores), -1.0, 1.0))


def score(measure: MeasureKind, x, y, ssm_params: SsmParams = SsmParams()) -> float:
    """Evaluate one measure by kind; convenience for grid-driven callers."""
    if measure is MeasureKind.COSINE:
        return cosine(x, y)
    if measure is MeasureKind.EUCLIDEAN:
        return euclidean(x, y)
    if measure is MeasureKind.SSM:
        return ssm(x, y, ssm_params)
    raise InvalidInputError(f"unknown measure: {measure!r}")
