"""Reference multinomial logistic-regression trainer for the weighted loss.

This is a deliberately small, deterministic stand-in for a full sentiment
backbone: the per-sample weights act on any cross-entropy objective the same
way, so a linear model over ingested features is enough to demonstrate and
test the reweighting end to end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateData, DimMismatch, NonFiniteValue, ShapeMismatch
from .weighting import weighted_ce_grad, weighted_ce_loss


@dataclass
class LinearModel:
    """Multinomial logistic regression parameters with recorded class order."""

    weights: np.ndarray  # (K, D)
    bias: np.ndarray  # (K,)
    classes: list

    def logits(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.weights.shape[1]:
            raise ShapeMismatch(f"features {x.shape} do not match model dim {self.weights.shape[1]}")
        return x @ self.weights.T + self.bias

    def predict(self, features: np.ndarray) -> list:
        idx = np.argmax(self.logits(features), axis=1)
        return [self.classes[i] for i in idx]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    l2_reg: float = 1e-4
    rng_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 0 or self.batch_size < 1 or self.l2_reg < 0:
            raise ValueError("invalid epochs/batch_size/l2_reg")


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    macro_f1: float
    per_class_f1: dict


@dataclass(frozen=True)
class ExperimentResult:
    weighted: EvalReport
    unweighted: EvalReport | None
    delta_accuracy: float | None
    delta_macro_f1: float | None
    weighted_model: LinearModel = field(repr=False, default=None)
    unweighted_model: LinearModel | None = field(repr=False, default=None)


def _encode_labels(labels: Sequence, classes: list) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    try:
        return np.asarray([index[lbl] for lbl in labels], dtype=np.int64)
    except KeyError as exc:
        raise ShapeMismatch(f"label {exc.args[0]!r} not among model classes {classes}") from None


def train(
    features: np.ndarray,
    labels: Sequence,
    weights: np.ndarray | None = None,
    config: TrainConfig | None = None,
) -> LinearModel:
    """Seeded mini-batch gradient descent on the weighted CE objective.

    The objective is mean_i w_i * CE_i + (l2_reg / 2) * ||W||^2. Parameters
    start at zero (the objective is convex); batches reshuffle every epoch
    with the configured seed, and the final short batch is kept.
    """
    cfg = config or TrainConfig()
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch(f"features must be N x D, got {x.shape}")
    n = x.shape[0]
    if len(labels) != n:
        raise ShapeMismatch(f"{len(labels)} labels for {n} feature rows")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise DegenerateData(f"need at least 2 classes, got {classes}")
    if n < len(classes):
        raise DegenerateData(f"{n} samples cannot cover {len(classes)} classes")
    y = _encode_labels(labels, classes)
    w = np.ones(n, dtype=np.float64) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ShapeMismatch(f"weights shape {w.shape} != ({n},)")

    k, d = len(classes), x.shape[1]
    theta_w = np.zeros((k, d))
    theta_b = np.zeros(k)
    rng = np.random.default_rng(cfg.rng_seed)
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            logits = x[batch] @ theta_w.T + theta_b
            g = weighted_ce_grad(logits, y[batch], w[batch])
            theta_w -= cfg.learning_rate * (g.T @ x[batch] + cfg.l2_reg * theta_w)
            theta_b -= cfg.learning_rate * g.sum(axis=0)
    return LinearModel(weights=theta_w, bias=theta_b, classes=classes)


def training_loss(model: LinearModel, features, labels, weights, l2_reg: float = 0.0) -> float:
    """Full-dataset objective value for a fitted or initial model."""
    y = _encode_labels(labels, model.classes)
    w = np.asarray(weights, dtype=np.float64)
    base = weighted_ce_loss(model.logits(features), y, w)
    return base + 0.5 * l2_reg * float(np.sum(model.weights**2))


def evaluate(model: LinearModel, features, labels: Sequence) -> EvalReport:
    """Accuracy and per-class/macro F1 under argmax predictions.

    A class with an undefined precision or recall contributes F1 = 0, so
    macro-F1 stays defined on degenerate predictions.
    """
    y_true = _encode_labels(labels, model.classes)
    y_pred = np.argmax(model.logits(features), axis=1)
    accuracy = float(np.mean(y_pred == y_true))
    per_class: dict = {}
    for i, cls in enumerate(model.classes):
        tp = int(np.sum((y_pred == i) & (y_true == i)))
        fp = int(np.sum((y_pred == i) & (y_true != i)))
        fn = int(np.sum((y_pred != i) & (y_true == i)))
        per_class[cls] = (2 * tp / (2 * tp + fp + fn)) if (2 * tp + fp + fn) else 0.0
    macro = float(np.mean([per_class[c] for c in model.classes]))
    return EvalReport(accuracy=accuracy, macro_f1=macro, per_class_f1=per_class)


def run_experiment(
    train_features,
    train_labels: Sequence,
    train_weights,
    test_features,
    test_labels: Sequence,
    config: TrainConfig | None = None,
    baseline: bool = True,
) -> ExperimentResult:
    """Train with pipeline weights and, for comparison, without them.

    Both runs share the seed, data order, and configuration, so the reported
    deltas isolate the effect of the weights alone.
    """
    cfg = config or TrainConfig()
    weighted_model = train(train_features, train_labels, train_weights, cfg)
    weighted_report = evaluate(weighted_model, test_features, test_labels)
    if not baseline:
        return ExperimentResult(weighted_report, None, None, None, weighted_model, None)
    unweighted_model = train(train_features, train_labels, None, cfg)
    unweighted_report = evaluate(unweighted_model, test_features, test_labels)
    return ExperimentResult(
        weighted=weighted_report,
        unweighted=unweighted_report,
        delta_accuracy=weighted_report.accuracy - unweighted_report.accuracy,
        delta_macro_f1=weighted_report.macro_f1 - unweighted_report.macro_f1,
        weighted_model=weighted_model,
        unweighted_model=unweighted_model,
    )


def save_model(path: str | Path, model: LinearModel) -> None:
    doc = {
        "classes": list(model.classes),
        "weights": [[float(v) for v in row] for row in model.weights],
        "bias": [float(v) for v in model.bias],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> LinearModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return LinearModel(
        weights=np.asarray(doc["weights"], dtype=np.float64),
        bias=np.asarray(doc["bias"], dtype=np.float64),
        classes=doc["classes"],
    )


def load_features(path: str | Path) -> tuple[list[str], np.ndarray, list]:
    """Read the line-delimited ``{key, vec, label}`` feature records."""
    keys: list[str] = []
    vecs: list[list[float]] = []
    labels: list = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if not {"key", "vec", "label"} <= record.keys():
                raise ShapeMismatch(f"line {line_no}: record needs key/vec/label")
            keys.append(record["key"])
            vecs.append(record["vec"])
            labels.append(record["label"])
    if not keys:
        return [], np.zeros((0, 0)), []
    if len({len(v) for v in vecs}) != 1:
        raise DimMismatch("feature vectors have inconsistent lengths")
    x = np.asarray(vecs, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("non-finite feature component")
    return keys, x, labels


def save_features(path: str | Path, keys: Sequence[str], features: np.ndarray, labels: Sequence) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, vec, label in zip(keys, features, labels):
            record = {"key": key, "vec": [float(v) for v in vec], "label": label}
            fh.write(json.dumps(record, sort_keys=True) + "\n")
