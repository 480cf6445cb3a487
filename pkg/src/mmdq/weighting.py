"""Per-sample weights from component scores, and the weighted CE loss.

A sample's weight is the arithmetic mean of its image-quality score and its
two relevance scores, floored at a small positive value so that noisy
relevance scores can never flip a gradient sign. The weight multiplies that
sample's cross-entropy term before the batch mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import NegativeWeight, NonFiniteComponent, ShapeMismatch

COMPONENTS = ("image", "it", "ai")


def format_float(x: float) -> str:
    """Canonical 9-significant-digit decimal rendering used in all reports."""
    return format(float(x), ".9g")


@dataclass(frozen=True)
class WeightingConfig:
    floor_eps: float = 0.05

    def __post_init__(self):
        if not self.floor_eps > 0:
            raise ValueError("floor_eps must be > 0")


@dataclass(frozen=True)
class SampleWeight:
    raw_mean: float
    weight: float
    # only the components that entered the mean, keyed by name
    components: dict[str, float]


def sample_weight(
    w_image: float,
    w_it: float,
    w_ai: float,
    config: WeightingConfig | None = None,
    enabled: Sequence[str] = COMPONENTS,
) -> SampleWeight:
    """Floored mean of the enabled component scores.

    ``enabled`` supports ablation runs: dropping a component recomputes the
    mean over the remaining ones, mirroring leave-one-out comparisons.
    """
    cfg = config or WeightingConfig()
    values = {"image": w_image, "it": w_it, "ai": w_ai}
    for name, value in values.items():
        if not math.isfinite(value):
            raise NonFiniteComponent(f"component {name!r} is {value}")
    enabled = tuple(enabled)
    if not enabled or any(name not in COMPONENTS for name in enabled):
        raise ValueError(f"enabled must be a nonempty subset of {COMPONENTS}")
    raw_mean = sum(values[name] for name in COMPONENTS if name in enabled) / len(enabled)
    return SampleWeight(
        raw_mean=raw_mean,
        weight=max(cfg.floor_eps, raw_mean),
        components={name: values[name] for name in COMPONENTS if name in enabled},
    )


def _check_batch(logits, labels, weights):
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    weights = np.asarray(weights, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] < 2:
        raise ShapeMismatch(f"logits must be B x K with K >= 2, got {logits.shape}")
    b = logits.shape[0]
    if b == 0:
        raise ShapeMismatch("empty batch")
    if labels.shape != (b,) or weights.shape != (b,):
        raise ShapeMismatch(
            f"labels {labels.shape} / weights {weights.shape} do not match batch {b}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        raise ShapeMismatch("labels must be integer class indices")
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise ShapeMismatch("label index out of range")
    if not np.all(np.isfinite(logits)):
        raise ShapeMismatch("non-finite logit")
    if np.any(weights < 0):
        raise NegativeWeight("weights must be nonnegative")
    return logits, labels, weights


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def weighted_ce_loss(logits, labels, weights) -> float:
    """Mean over the batch of weight_i * cross_entropy_i."""
    logits, labels, weights = _check_batch(logits, labels, weights)
    log_probs = _log_softmax(logits)
    per_sample = -log_probs[np.arange(logits.shape[0]), labels]
    return float(np.mean(weights * per_sample))


def weighted_ce_grad(logits, labels, weights) -> np.ndarray:
    """Gradient of :func:`weighted_ce_loss` with respect to the logits."""
    logits, labels, weights = _check_batch(logits, labels, weights)
    b = logits.shape[0]
    probs = np.exp(_log_softmax(logits))
    probs[np.arange(b), labels] -= 1.0
    return probs * (weights / b)[:, None]


def save_weights(path: str | Path, rows: Sequence[tuple[str, float]]) -> None:
    """Write the ``id,weight`` CSV consumed by the trainer."""
    lines = ["id,weight"]
    lines.extend(f"{sid},{format_float(w)}" for sid, w in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_weights(path: str | Path) -> dict[str, float]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != "id,weight":
        raise ShapeMismatch("weights file must start with 'id,weight' header")
    out: dict[str, float] = {}
    for line in text[1:]:
        if not line:
            continue
        sid, _, raw = line.partition(",")
        out[sid] = float(raw)
    return out
