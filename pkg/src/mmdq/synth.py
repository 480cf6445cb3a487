"""Synthetic corpora with planted quality defects.

Base images are procedurally generated (a class-colored disc over gray noise)
so the pipeline can be validated without any external assets. A configurable
fraction of samples is degraded: their images are blurred, downscaled, or
brightness-shifted, their image embeddings are replaced with unrelated
vectors, a long fake OCR string is attached, and their labels flip with a
configurable probability. Everything is reproducible from the seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import corpus as corpus_mod
from . import trainer as trainer_mod
from .corpus import EmbeddingTable, Sample
from .errors import IoFailure, UnknownKind

DEGRADATION_KINDS = ("gaussian_blur", "downscale", "brightness_shift", "ocr_inject")
DEFAULT_DEGRADATIONS = (("gaussian_blur", 3.0), ("downscale", 0.35), ("ocr_inject", 450.0))

# palette index i is the color of latent class i
_PALETTE = (
    ("crimson", (208, 64, 56)),
    ("leafgreen", (72, 198, 84)),
    ("skyblue", (70, 112, 214)),
)
_SENTIMENTS = {2: ("negative", "positive"), 3: ("negative", "neutral", "positive")}

# geometry of the planted class signal in feature space; low-quality
# samples keep only a fraction of the class signal and carry inflated
# noise, modelling features extracted from degraded inputs
_CLASS_MARGIN = 1.3
_FEATURE_NOISE = 1.0
_LOWQ_SIGNAL = 0.15
_LOWQ_NOISE = 3.0
# angular jitter of paired embeddings around the per-sample latent direction
_EMB_NOISE = 0.35


@dataclass(frozen=True)
class SynthSpec:
    """Knobs for one generated corpus."""

    n_samples: int
    feature_dim: int = 16
    n_classes: int = 3
    lowq_fraction: float = 0.0
    label_noise_p: float = 0.0
    degradations: tuple[tuple[str, float], ...] = DEFAULT_DEGRADATIONS
    rng_seed: int = 0
    image_size: int = 64

    def __post_init__(self):
        if self.n_samples < 1 or self.feature_dim < 1 or self.image_size < 8:
            raise ValueError("n_samples/feature_dim/image_size too small")
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.n_classes > len(_PALETTE):
            raise ValueError(f"at most {len(_PALETTE)} classes map onto corpus labels")
        if not 0.0 <= self.lowq_fraction <= 1.0 or not 0.0 <= self.label_noise_p <= 1.0:
            raise ValueError("lowq_fraction and label_noise_p must lie in [0, 1]")
        object.__setattr__(self, "degradations", tuple((str(k), float(m)) for k, m in self.degradations))
        for kind, magnitude in self.degradations:
            if kind not in DEGRADATION_KINDS:
                raise UnknownKind(f"degradation {kind!r} not in {DEGRADATION_KINDS}")
            if magnitude < 0:
                raise ValueError(f"{kind} magnitude must be >= 0")
            if kind == "downscale" and not 0.0 < magnitude <= 1.0:
                raise ValueError("downscale factor must lie in (0, 1]")


@dataclass(frozen=True)
class GenResult:
    """Paths of the emitted corpus plus the planted ground truth."""

    out_dir: Path
    manifest_path: Path
    images_dir: Path
    ocr_path: Path
    embedding_paths: dict[str, Path]
    features_path: Path
    ids: tuple[str, ...]
    lowq_ids: frozenset[str]
    flipped_ids: frozenset[str]
    latent_classes: dict[str, int] = field(repr=False, default_factory=dict)


def _separable_blur(pixels: np.ndarray, sigma: float) -> np.ndarray:
    radius = max(1, math.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (xs / sigma) ** 2)
    kernel /= kernel.sum()
    out = pixels.astype(np.float64)
    for axis in (0, 1):
        pad = [(0, 0)] * out.ndim
        pad[axis] = (radius, radius)
        padded = np.pad(out, pad, mode="edge")
        acc = np.zeros_like(out)
        for i, kv in enumerate(kernel):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(i, i + out.shape[axis])
            acc += kv * padded[tuple(sl)]
        out = acc
    return out


def degrade(image: np.ndarray, kind: str, magnitude: float, seed: int = 0) -> np.ndarray:
    """Apply one deterministic degradation to an RGB uint8 array."""
    if magnitude < 0:
        raise ValueError("magnitude must be >= 0")
    if kind == "gaussian_blur":
        if magnitude == 0:
            return image.copy()
        return np.clip(np.rint(_separable_blur(image, magnitude)), 0, 255).astype(np.uint8)
    if kind == "downscale":
        if not 0.0 < magnitude <= 1.0:
            raise ValueError("downscale factor must lie in (0, 1]")
        h, w = image.shape[:2]
        new_w = max(1, int(w * magnitude + 0.5))
        new_h = max(1, int(h * magnitude + 0.5))
        resized = Image.fromarray(image).resize((new_w, new_h), resample=Image.Resampling.BOX)
        return np.asarray(resized, dtype=np.uint8)
    if kind == "brightness_shift":
        if magnitude == 0:
            return image.copy()
        return np.clip(image.astype(np.float64) + magnitude, 0, 255).astype(np.uint8)
    raise UnknownKind(f"degradation {kind!r} is not an image operation")


def render_base_image(rng: np.random.Generator, size: int, color: tuple[int, int, int]) -> np.ndarray:
    """Gray-noise background with one colored disc; high contrast and sharpness."""
    gray = rng.integers(60, 196, size=(size, size), dtype=np.int64)
    img = np.repeat(gray[:, :, None], 3, axis=2).astype(np.float64)
    radius = size / 6.0 + rng.uniform(-1.5, 1.5)
    cy = rng.uniform(radius, size - radius)
    cx = rng.uniform(radius, size - radius)
    yy, xx = np.mgrid[0:size, 0:size]
    mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
    jitter = rng.integers(-12, 13, size=3)
    img[mask] = np.clip(np.asarray(color, dtype=np.float64) + jitter, 0, 255)
    return img.astype(np.uint8)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _paired_embedding(rng: np.random.Generator, latent: np.ndarray) -> np.ndarray:
    noise = _unit(rng.standard_normal(latent.shape[0]))
    scale = rng.uniform(0.8, 1.6)
    return _unit(latent + _EMB_NOISE * noise) * scale


def gen_corpus(spec: SynthSpec, out_dir: str | Path) -> GenResult:
    """Write a complete corpus tree (manifest, PNGs, sidecars, features).

    Low-quality samples receive every listed degradation in order, an
    unrelated image embedding, the injected OCR string, and a label flipped
    to the next class with probability ``label_noise_p``. Labels of noisy
    samples flip cyclically rather than uniformly so the planted noise is
    directional and does not self-average.
    """
    out = Path(out_dir)
    images_dir = out / "images"
    try:
        images_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {images_dir}: {exc}") from None

    rng = np.random.default_rng(spec.rng_seed)
    names = _SENTIMENTS[spec.n_classes]
    # orthonormal class directions in feature space
    basis, _ = np.linalg.qr(rng.standard_normal((spec.feature_dim, spec.feature_dim)))
    centers = basis[: spec.n_classes] * _CLASS_MARGIN

    n = spec.n_samples
    n_lowq = int(round(n * spec.lowq_fraction))
    lowq_mask = np.zeros(n, dtype=bool)
    lowq_mask[rng.permutation(n)[:n_lowq]] = True

    image_degradations = [(k, m) for k, m in spec.degradations if k != "ocr_inject"]
    ocr_lengths = [int(m) for k, m in spec.degradations if k == "ocr_inject"]
    letters = np.array(list("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 "))

    samples: list[Sample] = []
    ocr_texts: dict[str, str] = {}
    emb_entries: dict[str, dict[str, np.ndarray]] = {"image": {}, "text": {}, "aspect": {}}
    feature_rows = np.zeros((n, spec.feature_dim))
    labels: list[str] = []
    ids: list[str] = []
    lowq_ids: set[str] = set()
    flipped_ids: set[str] = set()
    latent_classes: dict[str, int] = {}

    for i in range(n):
        sid = f"s{i:05d}"
        image_file = f"{sid}.png"
        cls = int(rng.integers(spec.n_classes))
        color_name, color = _PALETTE[cls]
        is_lowq = bool(lowq_mask[i])

        img = render_base_image(rng, spec.image_size, color)
        if is_lowq:
            for kind, magnitude in image_degradations:
                img = degrade(img, kind, magnitude)
        Image.fromarray(img).save(images_dir / image_file, format="PNG")

        if is_lowq:
            for length in ocr_lengths:
                ocr_texts[image_file] = "".join(rng.choice(letters, size=length))

        aspect = f"subject {i:05d}"
        text = f"snapshot of {aspect} beside a {color_name} disc"

        label_cls = cls
        if is_lowq and rng.random() < spec.label_noise_p:
            label_cls = (cls + 1) % spec.n_classes
            flipped_ids.add(sid)
        label = names[label_cls]

        latent = _unit(rng.standard_normal(spec.feature_dim))
        if is_lowq:
            emb_entries["image"][image_file] = rng.standard_normal(spec.feature_dim)
        else:
            emb_entries["image"][image_file] = _paired_embedding(rng, latent)
        emb_entries["text"][sid] = _paired_embedding(rng, latent)
        emb_entries["aspect"][sid] = _paired_embedding(rng, latent)

        # one draw per sample regardless of branch, to keep the stream aligned
        noise = rng.standard_normal(spec.feature_dim)
        if is_lowq:
            feature_rows[i] = _LOWQ_SIGNAL * centers[cls] + _FEATURE_NOISE * _LOWQ_NOISE * noise
        else:
            feature_rows[i] = centers[cls] + _FEATURE_NOISE * noise
        labels.append(label)
        ids.append(sid)
        if is_lowq:
            lowq_ids.add(sid)
        latent_classes[sid] = cls
        samples.append(Sample(id=sid, image_file=image_file, text=text, aspect=aspect, label=label))

    manifest_path = out / "manifest.tsv"
    ocr_path = out / "ocr.json"
    features_path = out / "features.jsonl"
    corpus_mod.save_manifest(manifest_path, samples)
    corpus_mod.save_ocr_sidecar(ocr_path, ocr_texts)
    embedding_paths: dict[str, Path] = {}
    for kind, entries in emb_entries.items():
        path = out / f"emb.{kind}.jsonl"
        table = EmbeddingTable(kind=kind, dim=spec.feature_dim, entries=entries)
        corpus_mod.save_embeddings(path, table)
        embedding_paths[kind] = path
    trainer_mod.save_features(features_path, ids, feature_rows, labels)
    truth = {"lowq_ids": sorted(lowq_ids), "flipped_ids": sorted(flipped_ids)}
    (out / "truth.json").write_text(
        json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    return GenResult(
        out_dir=out,
        manifest_path=manifest_path,
        images_dir=images_dir,
        ocr_path=ocr_path,
        embedding_paths=embedding_paths,
        features_path=features_path,
        ids=tuple(ids),
        lowq_ids=frozenset(lowq_ids),
        flipped_ids=frozenset(flipped_ids),
        latent_classes=latent_classes,
    )
