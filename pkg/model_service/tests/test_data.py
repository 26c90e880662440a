from __future__ import annotations

import json

import pytest

from model_service.data import (
    CLS,
    SEP,
    UNK,
    WordVocab,
    encode_pair,
    pad_batch,
    read_instances,
    render_hypothesis,
)
from model_service.errors import MalformedInstanceFileError

ROW = {
    "paper_id": "p1",
    "label": True,
    "task": "area1",
    "dataset": "corpus1",
    "metric": "measure1",
    "context": "results reported on corpus1",
}


def write_rows(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    return path


class TestReadInstances:
    def test_valid_file(self, tmp_path):
        rows = read_instances(write_rows(tmp_path / "i.jsonl", [ROW]))
        assert rows == [ROW]

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "i.jsonl"
        path.write_text("")
        with pytest.raises(MalformedInstanceFileError):
            read_instances(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(MalformedInstanceFileError):
            read_instances(tmp_path / "absent.jsonl")

    def test_missing_field_rejected(self, tmp_path):
        bad = {k: v for k, v in ROW.items() if k != "metric"}
        with pytest.raises(MalformedInstanceFileError) as err:
            read_instances(write_rows(tmp_path / "i.jsonl", [bad]))
        assert "metric" in str(err.value)

    def test_non_boolean_label_rejected(self, tmp_path):
        with pytest.raises(MalformedInstanceFileError):
            read_instances(write_rows(tmp_path / "i.jsonl", [{**ROW, "label": "yes"}]))

    def test_bad_json_rejected(self, tmp_path):
        path = tmp_path / "i.jsonl"
        path.write_text("{oops\n")
        with pytest.raises(MalformedInstanceFileError):
            read_instances(path)


def test_render_hypothesis():
    assert render_hypothesis(ROW) == "area1 : corpus1 : measure1"


class TestWordVocab:
    def test_deterministic_and_lowercased(self):
        a = WordVocab.from_rows([ROW])
        b = WordVocab.from_rows([dict(ROW, context=ROW["context"].upper())])
        assert a.token_to_id == b.token_to_id

    def test_unknown_token(self):
        vocab = WordVocab.from_rows([ROW])
        assert vocab.encode("never-seen-token") == [UNK]

    def test_save_load(self, tmp_path):
        vocab = WordVocab.from_rows([ROW])
        vocab.save(tmp_path / "v.json")
        assert WordVocab.load(tmp_path / "v.json").token_to_id == vocab.token_to_id


class TestEncodePair:
    def test_layout(self):
        vocab = WordVocab.from_rows([ROW])
        ids, types, mask = encode_pair(vocab, "results reported", "area1 : corpus1 : measure1", 32)
        assert ids[0] == CLS
        assert ids.count(SEP) == 2
        assert len(ids) == len(types) == len(mask)
        boundary = ids.index(SEP)
        assert set(types[: boundary + 1]) == {0}
        assert set(types[boundary + 1 :]) == {1}

    def test_context_truncated_from_right(self):
        vocab = WordVocab.from_rows([ROW])
        long_context = " ".join(["results"] * 50)
        ids, _, _ = encode_pair(vocab, long_context, "area1", 16)
        assert len(ids) == 16
        # hypothesis survives intact at the tail
        assert ids[-1] == SEP
        assert ids[-2] == vocab.encode("area1")[0]

    def test_pad_batch_rectangular(self):
        vocab = WordVocab.from_rows([ROW])
        encoded = [
            encode_pair(vocab, "results", "area1", 16),
            encode_pair(vocab, "results reported on corpus1", "area1 : corpus1", 16),
        ]
        ids, types, masks = pad_batch(encoded)
        assert len({len(row) for row in ids + types + masks}) == 1
        assert masks[0][-1] == 0  # short row padded out
