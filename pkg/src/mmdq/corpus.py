"""Corpus loading: manifest rows, OCR sidecar, and embedding sidecars.

File formats
------------
manifest      UTF-8 TSV with header ``id<TAB>image<TAB>text<TAB>aspect<TAB>label``
ocr sidecar   one JSON object mapping image filename -> recognized string
embeddings    JSON lines, each ``{"key": ..., "kind": ..., "dim": ..., "vec": [...]}``
              with a single kind per file

A built :class:`Corpus` is immutable and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AspectNotInText,
    DimMismatch,
    DuplicateId,
    MalformedSidecar,
    MissingColumn,
    NonFiniteValue,
    UnknownLabel,
    WrongKind,
)

LABELS = ("positive", "neutral", "negative")
MANIFEST_HEADER = ("id", "image", "text", "aspect", "label")
EMBEDDING_KINDS = ("image", "text", "aspect")


@dataclass(frozen=True)
class Sample:
    """One corpus row: an image/text pair with a target aspect and its label."""

    id: str
    image_file: str
    text: str
    aspect: str
    label: str

    def __post_init__(self):
        if not self.id:
            raise MissingColumn("empty id")
        if not self.image_file:
            raise MissingColumn("empty image")
        if not self.text:
            raise MissingColumn("empty text")
        if not self.aspect:
            raise MissingColumn("empty aspect")
        if self.label not in LABELS:
            raise UnknownLabel(f"label {self.label!r} not in {LABELS}")
        if self.aspect not in self.text:
            raise AspectNotInText(f"aspect {self.aspect!r} not found in text")


@dataclass(frozen=True)
class Corpus:
    """Ordered samples plus per-image OCR text lengths and their maximum."""

    samples: tuple[Sample, ...]
    ocr_lengths: dict[str, int] = field(default_factory=dict)
    l_max: int = 0

    def __len__(self):
        return len(self.samples)

    def image_files(self) -> list[str]:
        """Unique image filenames in first-seen manifest order."""
        seen: dict[str, None] = {}
        for s in self.samples:
            seen.setdefault(s.image_file, None)
        return list(seen)


@dataclass
class EmbeddingTable:
    """Keyed float vectors of one kind, all sharing the same dimension."""

    kind: str
    dim: int
    entries: dict[str, np.ndarray]

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def __getitem__(self, key: str) -> np.ndarray:
        return self.entries[key]


def load_manifest(path: str | Path) -> list[Sample]:
    """Parse a TSV manifest into validated samples, preserving row order.

    Raises MissingColumn, DuplicateId, AspectNotInText or UnknownLabel with
    the offending row number in the message.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or tuple(lines[0].split("\t")) != MANIFEST_HEADER:
        raise MissingColumn(
            f"manifest header must be {chr(9).join(MANIFEST_HEADER)!r}"
        )
    samples: list[Sample] = []
    seen_ids: set[str] = set()
    for row_no, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        fields = line.split("\t")
        if len(fields) != len(MANIFEST_HEADER):
            raise MissingColumn(
                f"row {row_no}: expected {len(MANIFEST_HEADER)} columns, got {len(fields)}"
            )
        sid, image_file, text, aspect, label = fields
        if sid in seen_ids:
            raise DuplicateId(f"row {row_no}: duplicate id {sid!r}")
        try:
            sample = Sample(id=sid, image_file=image_file, text=text, aspect=aspect, label=label)
        except (MissingColumn, UnknownLabel, AspectNotInText) as exc:
            raise type(exc)(f"row {row_no}: {exc}") from None
        seen_ids.add(sid)
        samples.append(sample)
    return samples


def save_manifest(path: str | Path, samples: list[Sample] | tuple[Sample, ...]) -> None:
    lines = ["\t".join(MANIFEST_HEADER)]
    for s in samples:
        for value in (s.text, s.aspect):
            if "\t" in value or "\n" in value:
                raise MalformedSidecar(f"sample {s.id!r}: tab or newline not representable in TSV")
        lines.append("\t".join((s.id, s.image_file, s.text, s.aspect, s.label)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def attach_ocr(samples: list[Sample] | tuple[Sample, ...], ocr_sidecar: str | Path) -> Corpus:
    """Join OCR text lengths onto the samples and compute the corpus maximum.

    Every image referenced by the samples gets an entry; images absent from
    the sidecar count as length 0 (no embedded text). Sidecar entries for
    images the corpus never references are ignored.
    """
    try:
        with open(ocr_sidecar, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedSidecar(f"OCR sidecar is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise MalformedSidecar("OCR sidecar must be a single JSON object")
    for key, value in raw.items():
        if not isinstance(value, str):
            raise MalformedSidecar(f"OCR entry for {key!r} is not a string")
    ocr_lengths: dict[str, int] = {}
    for s in samples:
        ocr_lengths.setdefault(s.image_file, len(raw.get(s.image_file, "")))
    l_max = max(ocr_lengths.values(), default=0)
    return Corpus(samples=tuple(samples), ocr_lengths=ocr_lengths, l_max=l_max)


def save_ocr_sidecar(path: str | Path, texts: dict[str, str]) -> None:
    payload = json.dumps(dict(sorted(texts.items())), ensure_ascii=False, indent=0, sort_keys=True)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def load_embeddings(path: str | Path, kind: str) -> EmbeddingTable:
    """Load a line-delimited embedding sidecar of the requested kind.

    Rejects mixed-kind files (WrongKind), inconsistent dimensions
    (DimMismatch) and non-finite vector components (NonFiniteValue).
    """
    if kind not in EMBEDDING_KINDS:
        raise WrongKind(f"kind {kind!r} not in {EMBEDDING_KINDS}")
    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedSidecar(f"line {line_no}: invalid JSON: {exc}") from None
            if not isinstance(record, dict) or not {"key", "kind", "dim", "vec"} <= record.keys():
                raise MalformedSidecar(f"line {line_no}: record needs key/kind/dim/vec")
            if record["kind"] != kind:
                raise WrongKind(f"line {line_no}: kind {record['kind']!r}, expected {kind!r}")
            vec = np.asarray(record["vec"], dtype=np.float64)
            if vec.ndim != 1 or vec.shape[0] != record["dim"]:
                raise DimMismatch(f"line {line_no}: vec length {vec.shape} != dim {record['dim']}")
            if dim is None:
                dim = int(record["dim"])
            elif record["dim"] != dim:
                raise DimMismatch(f"line {line_no}: dim {record['dim']} != {dim}")
            if not np.all(np.isfinite(vec)):
                raise NonFiniteValue(f"line {line_no}: non-finite component in {record['key']!r}")
            if record["key"] in entries:
                raise MalformedSidecar(f"line {line_no}: duplicate key {record['key']!r}")
            entries[record["key"]] = vec
    return EmbeddingTable(kind=kind, dim=0 if dim is None else dim, entries=entries)


def save_embeddings(path: str | Path, table: EmbeddingTable) -> None:
    """Write a table back out, one JSON record per line, keys sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(table.entries):
            vec = table.entries[key]
            record = {
                "key": key,
                "kind": table.kind,
                "dim": table.dim,
                "vec": [float(x) for x in vec],
            }
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
