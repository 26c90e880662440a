"""Fine-tune a sequence-pair entailment classifier on pipeline instance files.

Named profiles follow the published recipe: learning rate 1e-5 for 14
epochs, AdamW with weight decay 0 for bias/gamma/beta parameters and
0.01 for the rest, and a maximum length of 512 (BERT variants) or 2000
(long-context variants). The "toy" profile trains a small transformer
from scratch over a corpus-derived word vocabulary so CI runs need no
checkpoint downloads; it keeps the optimizer rule but raises the
learning rate, since a from-scratch model does not move at 1e-5.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
from transformers import BertConfig, BertForSequenceClassification

from model_service.data import (
    WordVocab,
    encode_pair,
    pad_batch,
    read_instances,
    render_hypothesis,
)
from model_service.errors import ArtifactMissingError, ResourceExhaustionError

logger = logging.getLogger(__name__)

# published checkpoints per named profile, with their sequence-length regime
NAMED_PROFILES = {
    "bert-base-uncased": ("bert-base-uncased", 512),
    "scibert-uncased": ("allenai/scibert_scivocab_uncased", 512),
    "xlnet-base-cased": ("xlnet-base-cased", 2000),
    "bigbird-base": ("google/bigbird-roberta-base", 2000),
}

NO_DECAY_MARKERS = ("bias", "gamma", "beta", "LayerNorm.weight")


@dataclass
class TrainConfig:
    base_model: str = "toy"
    learning_rate: float = 1e-5
    epochs: int = 14
    weight_decay: float = 0.01
    max_length: int = 512
    batch_size: int = 16
    seed: int = 0
    balance_classes: bool = False
    # toy architecture
    hidden_size: int = 64
    num_layers: int = 2
    num_heads: int = 2

    def __post_init__(self):
        if self.base_model in NAMED_PROFILES:
            expected = NAMED_PROFILES[self.base_model][1]
            if self.max_length != expected:
                raise ValueError(
                    f"{self.base_model} runs at max_length {expected}, got {self.max_length}"
                )
        elif self.base_model != "toy":
            raise ValueError(f"unknown base model: {self.base_model}")

    @classmethod
    def named(cls, base_model: str, **overrides) -> "TrainConfig":
        _, max_length = NAMED_PROFILES[base_model]
        return cls(base_model=base_model, max_length=max_length, **overrides)

    @classmethod
    def toy(cls, **overrides) -> "TrainConfig":
        defaults = dict(
            base_model="toy",
            learning_rate=1e-3,
            epochs=2,
            max_length=128,
            batch_size=8,
            balance_classes=True,
        )
        defaults.update(overrides)
        return cls(**defaults)


def _optimizer(model: torch.nn.Module, config: TrainConfig) -> torch.optim.AdamW:
    decay, no_decay = [], []
    for name, param in model.named_parameters():
        if not param.requires_grad:
            continue
        if any(marker in name for marker in NO_DECAY_MARKERS):
            no_decay.append(param)
        else:
            decay.append(param)
    return torch.optim.AdamW(
        [
            {"params": decay, "weight_decay": config.weight_decay},
            {"params": no_decay, "weight_decay": 0.0},
        ],
        lr=config.learning_rate,
    )


def _toy_model(vocab: WordVocab, config: TrainConfig) -> BertForSequenceClassification:
    model_config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=config.hidden_size,
        num_hidden_layers=config.num_layers,
        num_attention_heads=config.num_heads,
        intermediate_size=config.hidden_size * 4,
        max_position_embeddings=config.max_length,
        num_labels=2,
    )
    return BertForSequenceClassification(model_config)


def _encode_rows(rows: list[dict], vocab: WordVocab, max_length: int):
    return [
        encode_pair(vocab, row["context"], render_hypothesis(row), max_length) for row in rows
    ]


def train(
    instances_file: str | Path, config: TrainConfig, out_dir: str | Path
) -> Path:
    """Train on an instance file and save the artifact directory.

    Returns the artifact path. The training log (loss per epoch) is both
    logged and written to training_log.jsonl inside the artifact.
    """
    if config.base_model != "toy":
        raise NotImplementedError(
            f"profile {config.base_model!r} loads the published checkpoint "
            f"{NAMED_PROFILES[config.base_model][0]!r} from the model hub; this "
            "environment has no hub access, use the toy profile or pre-download"
        )
    rows = read_instances(instances_file)
    torch.manual_seed(config.seed)

    vocab = WordVocab.from_rows(rows)
    model = _toy_model(vocab, config)
    optimizer = _optimizer(model, config)
    encoded = _encode_rows(rows, vocab, config.max_length)
    labels = [1 if row["label"] else 0 for row in rows]

    generator = torch.Generator().manual_seed(config.seed)
    positives = [i for i, label in enumerate(labels) if label == 1]
    negatives = [i for i, label in enumerate(labels) if label == 0]

    def epoch_order() -> list[int]:
        if config.balance_classes and positives and len(negatives) > len(positives):
            repeats = len(negatives) // len(positives)
            pool = negatives + positives * repeats
        else:
            pool = list(range(len(rows)))
        perm = torch.randperm(len(pool), generator=generator).tolist()
        return [pool[i] for i in perm]

    log: list[dict] = []
    model.train()
    try:
        for epoch in range(config.epochs):
            order = epoch_order()
            total_loss = 0.0
            batches = 0
            for start in range(0, len(order), config.batch_size):
                batch_idx = order[start : start + config.batch_size]
                ids, types, masks = pad_batch([encoded[i] for i in batch_idx])
                outputs = model(
                    input_ids=torch.tensor(ids),
                    token_type_ids=torch.tensor(types),
                    attention_mask=torch.tensor(masks),
                    labels=torch.tensor([labels[i] for i in batch_idx]),
                )
                optimizer.zero_grad()
                outputs.loss.backward()
                optimizer.step()
                total_loss += outputs.loss.item()
                batches += 1
            entry = {"epoch": epoch, "loss": total_loss / batches}
            log.append(entry)
            logger.info("epoch %d mean loss %.4f", epoch, entry["loss"])
    except RuntimeError as exc:
        if "out of memory" in str(exc).lower():
            raise ResourceExhaustionError(
                "training ran out of memory; lower --batch-size or --max-length, "
                "or switch to a smaller profile"
            ) from exc
        raise

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out_dir / "weights.pt")
    vocab.save(out_dir / "vocab.json")
    with open(out_dir / "config.json", "w", encoding="utf-8") as handle:
        json.dump({"config": asdict(config), "identity": identity(config)}, handle, indent=2)
    with open(out_dir / "training_log.jsonl", "w", encoding="utf-8") as handle:
        for entry in log:
            handle.write(json.dumps(entry) + "\n")
    return out_dir


def identity(config: TrainConfig) -> str:
    return f"{config.base_model}-seqpair-cls-len{config.max_length}"


@dataclass
class ScoringModel:
    """Loaded artifact: maps (context, hypothesis) pairs to probability_true."""

    model: BertForSequenceClassification
    vocab: WordVocab
    config: TrainConfig
    name: str = field(default="")

    @classmethod
    def load(cls, artifact_dir: str | Path) -> "ScoringModel":
        artifact_dir = Path(artifact_dir)
        needed = ["config.json", "vocab.json", "weights.pt"]
        missing = [n for n in needed if not (artifact_dir / n).is_file()]
        if missing:
            raise ArtifactMissingError(
                f"artifact at {artifact_dir} is missing {missing}"
            )
        with open(artifact_dir / "config.json", encoding="utf-8") as handle:
            saved = json.load(handle)
        config = TrainConfig(**saved["config"])
        vocab = WordVocab.load(artifact_dir / "vocab.json")
        model = _toy_model(vocab, config)
        model.load_state_dict(torch.load(artifact_dir / "weights.pt", weights_only=True))
        model.eval()
        return cls(model=model, vocab=vocab, config=config, name=saved["identity"])

    @torch.no_grad()
    def score_pairs(self, pairs: list[tuple[str, str]]) -> list[float]:
        if not pairs:
            return []
        encoded = [
            encode_pair(self.vocab, context, hypothesis, self.config.max_length)
            for context, hypothesis in pairs
        ]
        ids, types, masks = pad_batch(encoded)
        logits = self.model(
            input_ids=torch.tensor(ids),
            token_type_ids=torch.tensor(types),
            attention_mask=torch.tensor(masks),
        ).logits
        # two-way softmax: probability of the entailed class
        return torch.softmax(logits, dim=-1)[:, 1].tolist()
