import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmdq.corpus import (
    EmbeddingTable,
    Sample,
    attach_ocr,
    load_embeddings,
    load_manifest,
    save_embeddings,
    save_manifest,
    save_ocr_sidecar,
)
from mmdq.errors import (
    AspectNotInText,
    DimMismatch,
    DuplicateId,
    MalformedSidecar,
    MissingColumn,
    NonFiniteValue,
    UnknownLabel,
    WrongKind,
)


def sample(i: int = 0, **kw) -> Sample:
    base = dict(
        id=f"s{i}",
        image_file=f"img{i}.png",
        text=f"a photo of thing {i} on a table",
        aspect=f"thing {i}",
        label="positive",
    )
    base.update(kw)
    return Sample(**base)


class TestSample:
    def test_valid(self):
        s = sample()
        assert s.aspect in s.text

    def test_aspect_must_appear_in_text(self):
        with pytest.raises(AspectNotInText):
            sample(aspect="absent phrase")

    def test_unknown_label(self):
        with pytest.raises(UnknownLabel):
            sample(label="meh")

    @pytest.mark.parametrize("field", ["id", "image_file", "text", "aspect"])
    def test_empty_field(self, field):
        with pytest.raises(MissingColumn):
            sample(**{field: ""})


class TestManifest:
    def test_round_trip(self, tmp_path):
        rows = [sample(i, label=lab) for i, lab in enumerate(["positive", "neutral", "negative"])]
        path = tmp_path / "m.tsv"
        save_manifest(path, rows)
        assert load_manifest(path) == rows

    def test_header_required(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("id\timage\ttext\n", encoding="utf-8")
        with pytest.raises(MissingColumn):
            load_manifest(path)

    def test_wrong_column_count_reports_row(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text(
            "id\timage\ttext\taspect\tlabel\n" "s1\timg.png\tonly three\n", encoding="utf-8"
        )
        with pytest.raises(MissingColumn, match="row 2"):
            load_manifest(path)

    def test_duplicate_id_reports_row(self, tmp_path):
        path = tmp_path / "m.tsv"
        save_manifest(path, [sample(1)])
        with open(path, "a", encoding="utf-8") as fh:
            fh.write("s1\timg9.png\ta photo of thing 1 on a table\tthing 1\tneutral\n")
        with pytest.raises(DuplicateId, match="row 3"):
            load_manifest(path)

    def test_bad_label_reports_row(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text(
            "id\timage\ttext\taspect\tlabel\n" "s1\timg.png\tsome text\tsome\tgreat\n",
            encoding="utf-8",
        )
        with pytest.raises(UnknownLabel, match="row 2"):
            load_manifest(path)

    def test_tab_in_text_rejected_on_save(self, tmp_path):
        s = sample(text="has\ttab in it", aspect="tab")
        with pytest.raises(MalformedSidecar):
            save_manifest(tmp_path / "m.tsv", [s])


class TestOcr:
    def test_attach_defaults_absent_to_zero(self, tmp_path):
        rows = (sample(0), sample(1))
        ocr = tmp_path / "ocr.json"
        save_ocr_sidecar(ocr, {"img0.png": "HELLO WORLD"})
        corpus = attach_ocr(rows, ocr)
        assert corpus.ocr_lengths["img0.png"] == 11
        assert corpus.ocr_lengths["img1.png"] == 0
        assert corpus.l_max == 11

    def test_l_max_zero_for_textless_corpus(self, tmp_path):
        ocr = tmp_path / "ocr.json"
        save_ocr_sidecar(ocr, {})
        corpus = attach_ocr((sample(0),), ocr)
        assert corpus.l_max == 0

    def test_unreferenced_sidecar_keys_ignored(self, tmp_path):
        ocr = tmp_path / "ocr.json"
        save_ocr_sidecar(ocr, {"nope.png": "X"})
        corpus = attach_ocr((sample(0),), ocr)
        assert corpus.ocr_lengths == {"img0.png": 0}
        assert corpus.l_max == 0

    def test_non_object_sidecar_rejected(self, tmp_path):
        ocr = tmp_path / "ocr.json"
        ocr.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(MalformedSidecar):
            attach_ocr((sample(0),), ocr)


class TestEmbeddings:
    def table(self, kind="text", dim=3, keys=("a", "b")):
        entries = {k: np.arange(dim, dtype=np.float64) + i for i, k in enumerate(keys)}
        return EmbeddingTable(kind=kind, dim=dim, entries=entries)

    def test_round_trip(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        table = self.table()
        save_embeddings(path, table)
        loaded = load_embeddings(path, "text")
        assert loaded.dim == 3
        assert set(loaded.entries) == {"a", "b"}
        np.testing.assert_array_equal(loaded["a"], table["a"])

    def test_wrong_kind(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        save_embeddings(path, self.table(kind="image"))
        with pytest.raises(WrongKind):
            load_embeddings(path, "text")

    def test_dim_mismatch_across_records(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        lines = [
            json.dumps({"key": "a", "kind": "text", "dim": 3, "vec": [1.0, 2.0, 3.0]}),
            json.dumps({"key": "b", "kind": "text", "dim": 2, "vec": [1.0, 2.0]}),
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(DimMismatch):
            load_embeddings(path, "text")

    def test_vec_length_must_match_dim(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text(
            json.dumps({"key": "a", "kind": "text", "dim": 3, "vec": [1.0, 2.0]}) + "\n",
            encoding="utf-8",
        )
        with pytest.raises(DimMismatch):
            load_embeddings(path, "text")

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text(
            json.dumps({"key": "a", "kind": "text", "dim": 2, "vec": [1.0, None]}) + "\n",
            encoding="utf-8",
        )
        with pytest.raises((NonFiniteValue, MalformedSidecar)):
            load_embeddings(path, "text")

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        record = json.dumps({"key": "a", "kind": "text", "dim": 1, "vec": [1.0]})
        path.write_text(record + "\n" + record + "\n", encoding="utf-8")
        with pytest.raises(MalformedSidecar):
            load_embeddings(path, "text")

    @given(
        st.dictionaries(
            st.text(st.characters(min_codepoint=33, max_codepoint=126), min_size=1, max_size=8),
            st.lists(
                st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False, width=64),
                min_size=4,
                max_size=4,
            ),
            min_size=1,
            max_size=6,
        )
    )
    def test_round_trip_property(self, entries):
        # file round-trip preserves keys and values bit-for-bit
        import tempfile
        from pathlib import Path

        table = EmbeddingTable(
            kind="aspect",
            dim=4,
            entries={k: np.asarray(v) for k, v in entries.items()},
        )
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "emb.jsonl"
            save_embeddings(path, table)
            loaded = load_embeddings(path, "aspect")
        assert set(loaded.entries) == set(entries)
        for k, v in entries.items():
            np.testing.assert_array_equal(loaded[k], np.asarray(v))
