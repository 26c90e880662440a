"""Instance-file reading and the word-level encoding used by the toy profile.

The instance file is the pipeline's line-delimited exchange format:
{"paper_id", "label", "task", "dataset", "metric", "context"}. Hypotheses
are rendered as "task : dataset : metric", matching what the pipeline
sends to /score at inference time.
"""

from __future__ import annotations

import json
from pathlib import Path

from model_service.errors import MalformedInstanceFileError

REQUIRED_FIELDS = ("paper_id", "label", "task", "dataset", "metric", "context")

PAD, UNK, CLS, SEP = 0, 1, 2, 3
SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]")


def read_instances(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise MalformedInstanceFileError(f"instance file not found: {path}")
    rows = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedInstanceFileError(f"{path}:{lineno}: {exc}") from exc
            missing = [f for f in REQUIRED_FIELDS if f not in row]
            if missing:
                raise MalformedInstanceFileError(
                    f"{path}:{lineno}: row missing fields {missing}"
                )
            if not isinstance(row["label"], bool):
                raise MalformedInstanceFileError(f"{path}:{lineno}: label must be boolean")
            rows.append(row)
    if not rows:
        raise MalformedInstanceFileError(f"instance file is empty: {path}")
    return rows


def render_hypothesis(row: dict) -> str:
    return " : ".join((row["task"], row["dataset"], row["metric"]))


class WordVocab:
    """Lowercased whitespace-token vocabulary for the from-scratch toy model."""

    def __init__(self, token_to_id: dict[str, int]):
        self.token_to_id = token_to_id

    def __len__(self) -> int:
        return len(self.token_to_id)

    @classmethod
    def from_rows(cls, rows: list[dict]) -> "WordVocab":
        tokens = sorted(
            {
                word.lower()
                for row in rows
                for word in (row["context"] + " " + render_hypothesis(row)).split()
            }
        )
        mapping = {special: i for i, special in enumerate(SPECIALS)}
        for token in tokens:
            mapping.setdefault(token, len(mapping))
        return cls(mapping)

    def encode(self, text: str) -> list[int]:
        return [self.token_to_id.get(word.lower(), UNK) for word in text.split()]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.token_to_id, handle, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | Path) -> "WordVocab":
        with open(path, encoding="utf-8") as handle:
            return cls({k: int(v) for k, v in json.load(handle).items()})


def encode_pair(
    vocab: WordVocab, context: str, hypothesis: str, max_length: int
) -> tuple[list[int], list[int], list[int]]:
    """[CLS] context [SEP] hypothesis [SEP]; the context segment is truncated
    from the right when the pair exceeds max_length."""
    ids_b = vocab.encode(hypothesis)
    budget = max(0, max_length - 3 - len(ids_b))
    ids_a = vocab.encode(context)[:budget]
    input_ids = [CLS] + ids_a + [SEP] + ids_b + [SEP]
    input_ids = input_ids[:max_length]
    token_type_ids = [0] * (len(ids_a) + 2) + [1] * (len(ids_b) + 1)
    token_type_ids = token_type_ids[: len(input_ids)]
    attention_mask = [1] * len(input_ids)
    return input_ids, token_type_ids, attention_mask


def pad_batch(
    encoded: list[tuple[list[int], list[int], list[int]]]
) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    width = max(len(ids) for ids, _, _ in encoded)
    input_ids, token_types, masks = [], [], []
    for ids, types, mask in encoded:
        pad = [PAD] * (width - len(ids))
        input_ids.append(ids + pad)
        token_types.append(types + [0] * (width - len(types)))
        masks.append(mask + [0] * (width - len(mask)))
    return input_ids, token_types, masks
