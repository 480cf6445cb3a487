"""Minimal reader for the corpus manifest interchange format.

The exporter consumes the corpus only through its documented file layout:
UTF-8 TSV with the fixed header ``id  image  text  aspect  label``. Full
semantic validation (labels, aspect spans) is the consumer's job; this
reader checks just enough structure to key the export correctly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError

HEADER = ("id", "image", "text", "aspect", "label")


@dataclass(frozen=True)
class Row:
    id: str
    image_file: str
    text: str
    aspect: str
    label: str


def read_manifest(path: str | Path) -> list[Row]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or tuple(lines[0].split("\t")) != HEADER:
        raise ManifestError(f"{path}: first line must be {chr(9).join(HEADER)!r}")
    rows: list[Row] = []
    seen: set[str] = set()
    for row_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != len(HEADER):
            raise ManifestError(f"{path}: row {row_no}: expected {len(HEADER)} columns, got {len(parts)}")
        row = Row(*parts)
        if not row.id or not row.image_file:
            raise ManifestError(f"{path}: row {row_no}: empty id or image column")
        if row.id in seen:
            raise ManifestError(f"{path}: row {row_no}: duplicate id {row.id!r}")
        seen.add(row.id)
        rows.append(row)
    return rows
