"""Cross-modal relevance from ingested joint-space embeddings.

Coarse relevance compares the whole-image and whole-text vectors; fine
relevance compares the aspect-term vector with the image vector. Both are
temperature-scaled cosines in ``raw`` mode, or the positive pair's softmax
probability against sampled in-batch negatives in ``contrastive`` mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BatchTooSmall, DimMismatch, ZeroVector

MODES = ("raw", "contrastive")


@dataclass(frozen=True)
class RelevanceConfig:
    """Temperature, scoring mode, and negative-sampling parameters."""

    t: float = 0.0
    mode: str = "raw"
    negatives_per_sample: int = 15
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode {self.mode!r} not in {MODES}")
        if self.negatives_per_sample < 1:
            raise ValueError("negatives_per_sample must be >= 1")
        if not math.isfinite(math.exp(self.t)):
            raise ValueError(f"e^t overflows for t={self.t}")


@dataclass(frozen=True)
class RelevanceScores:
    w_it: float
    w_ai: float


def l2_normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    return v / norm


def scaled_cosine(a: np.ndarray, b: np.ndarray, t: float = 0.0) -> float:
    """Cosine similarity of two vectors scaled by e^t."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.dot(l2_normalize(a), l2_normalize(b)) * math.exp(t))


def sample_negatives(
    batch_keys: Sequence, positive_index: int, k: int, rng: np.random.Generator
) -> list:
    """Draw ``k`` distinct non-positive keys uniformly without replacement."""
    n = len(batch_keys)
    if n < 2:
        raise BatchTooSmall(f"need at least 2 batch items, got {n}")
    if not 0 <= positive_index < n:
        raise BatchTooSmall(f"positive index {positive_index} outside batch of {n}")
    if k < 1 or k > n - 1:
        raise BatchTooSmall(f"cannot draw {k} negatives from a batch of {n}")
    candidates = [key for i, key in enumerate(batch_keys) if i != positive_index]
    chosen = rng.choice(len(candidates), size=k, replace=False)
    return [candidates[i] for i in chosen]


def rng_for_sample(base_seed: int, ordinal: int) -> np.random.Generator:
    """Per-sample generator; XOR partitioning keeps parallel draws disjoint."""
    return np.random.default_rng((base_seed ^ ordinal) & 0xFFFFFFFFFFFFFFFF)


def _softmax_positive(anchor: np.ndarray, positive: np.ndarray,
                      negatives: Sequence[np.ndarray], t: float) -> float:
    logits = [scaled_cosine(anchor, positive, t)]
    logits.extend(scaled_cosine(anchor, neg, t) for neg in negatives)
    z = np.asarray(logits, dtype=np.float64)
    z -= z.max()
    expz = np.exp(z)
    return float(expz[0] / expz.sum())


def _relevance(anchor: np.ndarray, positive: np.ndarray,
               negatives: Sequence[np.ndarray], config: RelevanceConfig) -> float:
    if config.mode == "raw":
        return scaled_cosine(anchor, positive, config.t)
    if not negatives:
        raise BatchTooSmall("contrastive mode needs at least one negative")
    return _softmax_positive(anchor, positive, negatives, config.t)


def coarse_relevance(
    image_emb: np.ndarray,
    text_emb: np.ndarray,
    negative_text_embs: Sequence[np.ndarray] = (),
    config: RelevanceConfig | None = None,
) -> float:
    """Image-text relevance: scaled cosine, or the paired text's softmax
    probability against negative texts in contrastive mode."""
    return _relevance(image_emb, text_emb, negative_text_embs, config or RelevanceConfig())


def fine_relevance(
    aspect_emb: np.ndarray,
    image_emb: np.ndarray,
    negative_image_embs: Sequence[np.ndarray] = (),
    config: RelevanceConfig | None = None,
) -> float:
    """Aspect-image relevance; negatives are other images from the batch."""
    return _relevance(aspect_emb, image_emb, negative_image_embs, config or RelevanceConfig())
