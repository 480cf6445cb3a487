"""Run one export: manifest in, three embedding sidecars plus metadata out.

Sidecar format (shared with the downstream pipeline): JSON lines, each
``{"key": ..., "kind": ..., "dim": ..., "vec": [...]}`` with one kind per
file. Image records are keyed by image filename, one per unique file in
first-appearance order; text and aspect records are keyed by sample id, one
per manifest row in manifest order. Vectors are post-projection and written
unnormalized; the consumer normalizes.

The model identifier, dimension, device and record counts go to a separate
``meta.json`` so provenance rides along without touching the strictly
line-per-record sidecar files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .encoders import DEFAULT_MODEL, load_backend
from .errors import EncodeFailure
from .manifest import read_manifest


@dataclass(frozen=True)
class ExportJob:
    manifest: Path
    images_dir: Path
    out_image: Path
    out_text: Path
    out_aspect: Path
    out_meta: Path
    model_id: str = DEFAULT_MODEL
    device: str = "cpu"
    batch_size: int = 16
    dim: int = 64

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def _batches(items: list, size: int):
    for start in range(0, len(items), size):
        yield items[start : start + size]


def _encode_batched(encode, keyed_inputs: list[tuple[str, object]], batch_size: int) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for batch in _batches(keyed_inputs, batch_size):
        keys = [k for k, _ in batch]
        try:
            vecs = encode([value for _, value in batch])
        except Exception as exc:
            raise EncodeFailure(f"encoding batch {keys}: {exc}") from exc
        for key, vec in zip(keys, vecs):
            if not np.all(np.isfinite(vec)):
                raise EncodeFailure(f"{key!r}: encoder produced a non-finite component")
            out[key] = np.asarray(vec, dtype=np.float64)
    return out


def _write_sidecar(path: Path, kind: str, dim: int, records: list[tuple[str, np.ndarray]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, vec in records:
            record = {"key": key, "kind": kind, "dim": dim, "vec": [float(x) for x in vec]}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def export(job: ExportJob) -> dict[str, int]:
    """Encode everything the manifest references and write the sidecars.

    Returns the record count per kind. Any unreadable image or encoder
    fault raises EncodeFailure naming the offending sample; nothing is
    written in that case.
    """
    rows = read_manifest(job.manifest)
    backend = load_backend(job.model_id, device=job.device, dim=job.dim)

    first_ref: dict[str, str] = {}
    for row in rows:
        first_ref.setdefault(row.image_file, row.id)
    unique_images = list(first_ref)

    keyed_images: list[tuple[str, object]] = []
    for name in unique_images:
        path = job.images_dir / name
        try:
            with Image.open(path) as img:
                img.load()
                keyed_images.append((name, img.convert("RGB")))
        except (OSError, UnidentifiedImageError) as exc:
            raise EncodeFailure(f"image {name!r} (sample {first_ref[name]!r}): {exc}") from exc

    image_vecs = _encode_batched(backend.encode_images, keyed_images, job.batch_size)
    text_vecs = _encode_batched(
        backend.encode_texts, [(row.id, row.text) for row in rows], job.batch_size
    )
    # the aspect embeds on its own, as the bare string fed to the text tower
    aspect_vecs = _encode_batched(
        backend.encode_texts, [(row.id, row.aspect) for row in rows], job.batch_size
    )

    dim = backend.dim
    _write_sidecar(job.out_image, "image", dim, [(n, image_vecs[n]) for n in unique_images])
    _write_sidecar(job.out_text, "text", dim, [(r.id, text_vecs[r.id]) for r in rows])
    _write_sidecar(job.out_aspect, "aspect", dim, [(r.id, aspect_vecs[r.id]) for r in rows])

    counts = {"image": len(unique_images), "text": len(rows), "aspect": len(rows)}
    meta = {
        "counts": counts,
        "device": backend.device,
        "dim": dim,
        "manifest": str(job.manifest),
        "model": backend.model_id,
    }
    job.out_meta.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return counts
