from __future__ import annotations

import json

import pytest
import torch

from model_service.data import encode_pair, pad_batch
from model_service.errors import ArtifactMissingError, MalformedInstanceFileError
from model_service.train import NAMED_PROFILES, ScoringModel, TrainConfig, train


class TestTrainConfig:
    def test_named_profiles_follow_published_recipe(self):
        config = TrainConfig.named("bert-base-uncased")
        assert config.learning_rate == 1e-5
        assert config.epochs == 14
        assert config.weight_decay == 0.01
        assert config.max_length == 512

    def test_long_context_profiles_run_at_2000(self):
        assert TrainConfig.named("xlnet-base-cased").max_length == 2000
        assert TrainConfig.named("bigbird-base").max_length == 2000

    def test_length_invariant_enforced(self):
        with pytest.raises(ValueError):
            TrainConfig(base_model="bert-base-uncased", max_length=2000)
        with pytest.raises(ValueError):
            TrainConfig(base_model="bigbird-base", max_length=512)

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(base_model="gpt-17")

    def test_all_named_profiles_have_checkpoints(self):
        for name, (checkpoint, max_length) in NAMED_PROFILES.items():
            assert checkpoint
            assert max_length in (512, 2000)


class TestTrain:
    def test_artifact_layout_and_log(self, toy_workspace, toy_artifact):
        for name in ("weights.pt", "vocab.json", "config.json", "training_log.jsonl"):
            assert (toy_artifact / name).is_file()
        log = [json.loads(l) for l in (toy_artifact / "training_log.jsonl").read_text().splitlines()]
        assert [entry["epoch"] for entry in log] == list(range(TrainConfig.toy().epochs))
        assert all(entry["loss"] > 0 for entry in log)

    def test_empty_instance_file(self, tmp_path):
        empty = tmp_path / "instances.jsonl"
        empty.write_text("")
        with pytest.raises(MalformedInstanceFileError):
            train(empty, TrainConfig.toy(), tmp_path / "out")

    def test_same_seed_identical_first_epoch_loss(self, toy_workspace, tmp_path):
        config = TrainConfig.toy(epochs=1, seed=5)
        first = train(toy_workspace.train_instances, config, tmp_path / "a")
        second = train(toy_workspace.train_instances, config, tmp_path / "b")
        loss_a = json.loads((first / "training_log.jsonl").read_text())["loss"]
        loss_b = json.loads((second / "training_log.jsonl").read_text())["loss"]
        assert loss_a == loss_b

    def test_named_profile_needs_hub(self, toy_workspace, tmp_path):
        with pytest.raises(NotImplementedError) as err:
            train(
                toy_workspace.train_instances,
                TrainConfig.named("bert-base-uncased"),
                tmp_path / "out",
            )
        assert "checkpoint" in str(err.value)


class TestScoringModel:
    def test_missing_artifact(self, tmp_path):
        with pytest.raises(ArtifactMissingError):
            ScoringModel.load(tmp_path / "nowhere")

    def test_scores_in_unit_interval(self, toy_artifact):
        model = ScoringModel.load(toy_artifact)
        probabilities = model.score_pairs(
            [
                ("results reported on corpus1", "area1 : corpus1 : measure1"),
                ("a general discussion piece", "area2 : corpus2 : measure2"),
            ]
        )
        assert len(probabilities) == 2
        assert all(0.0 <= p <= 1.0 for p in probabilities)

    def test_probabilities_sum_to_one_with_contradiction_class(self, toy_artifact):
        model = ScoringModel.load(toy_artifact)
        ids, types, masks = pad_batch(
            [encode_pair(model.vocab, "results on corpus1", "area1 : corpus1 : measure1", 64)]
        )
        with torch.no_grad():
            logits = model.model(
                input_ids=torch.tensor(ids),
                token_type_ids=torch.tensor(types),
                attention_mask=torch.tensor(masks),
            ).logits
        both = torch.softmax(logits, dim=-1)[0]
        assert float(both.sum()) == pytest.approx(1.0)
        assert model.score_pairs([("results on corpus1", "area1 : corpus1 : measure1")])[
            0
        ] == pytest.approx(float(both[1]))

    def test_deterministic_scoring(self, toy_artifact):
        model = ScoringModel.load(toy_artifact)
        pair = [("results reported on corpus3", "area3 : corpus3 : measure3")]
        assert model.score_pairs(pair) == model.score_pairs(pair)

    def test_empty_batch(self, toy_artifact):
        assert ScoringModel.load(toy_artifact).score_pairs([]) == []
