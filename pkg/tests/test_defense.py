"""Tests for adversarial training and the paired defense evaluation."""

import logging

import numpy as np
import pytest
import torch

from lcdr.errors import InsufficientDataError
from lcdr.models import LABEL_FAULT, LABEL_FDIA, Architecture, AttackConfig, Dataset, DefenseConfig, TrainConfig
from lcdr.nn.detector import Detector
from lcdr.services.defense_service import (
    DefenseService,
    adversarial_training,
    augment_training_set,
    evaluate_defense,
    harden,
    round_epochs,
)
from lcdr.services.relay_service import trip_check

FAST_DEFENSE = DefenseConfig(retrain_epochs=2, epsilons=[0.3, 0.5], attack=AttackConfig(max_iterations=3))
FAST_TRAINING = TrainConfig(epochs=2, batch_size=16, seed=3)


@pytest.fixture(scope="module")
def defense_train(small_split):
    """Forty training windows, both classes."""
    train, _ = small_split
    return train.subset(range(40), description="train40")


def test_gate_skips_undetected_fdias(defense_train, small_scaler, relay_ctx, caplog):
    """Test a detector with zero FDIA recall attacks nothing and warns before retraining."""
    detector = Detector.build(Architecture.MLP, small_scaler, seed=0)
    with torch.no_grad():
        detector.network.head.weight.zero_()
        detector.network.head.bias.fill_(-50.0)
    augmentation = augment_training_set(detector, defense_train, FAST_DEFENSE, relay_ctx)
    assert augmentation.attempted == 0
    assert augmentation.successes_per_epsilon == {"0.3": 0, "0.5": 0}
    assert len(augmentation.dataset) == len(defense_train)

    with caplog.at_level(logging.WARNING):
        adversarial_training(detector, defense_train, FAST_DEFENSE, relay_ctx, FAST_TRAINING)
    assert "no successful adversarial samples" in caplog.text


def test_augmentation_bookkeeping(trained_mlp, defense_train, relay_ctx):
    """Test |D'| = |D| + successes, added samples are tripping FDIAs and faults are untouched."""
    augmentation = augment_training_set(trained_mlp, defense_train, FAST_DEFENSE, relay_ctx)
    augmented = augmentation.dataset
    assert len(augmented) == len(defense_train) + augmentation.added
    assert augmentation.attempted <= int(np.sum(defense_train.labels() == LABEL_FDIA))

    for original, kept in zip(defense_train.samples, augmented.samples):
        assert kept is original
    for sample in augmented.samples[len(defense_train):]:
        assert sample.label == LABEL_FDIA
        assert sample.provenance.origin == "augmented"
        assert sample.provenance.attack.success
        assert trip_check(sample.window, relay_ctx.settings, relay_ctx.pickup_count).tripped
    assert augmented.manifest.class_counts["fault"] == int(np.sum(defense_train.labels() == LABEL_FAULT))


def test_defense_leaves_input_detector(trained_mlp, defense_train, relay_ctx):
    """Test adversarial training returns a new detector and keeps the original parameters."""
    before = {k: v.clone() for k, v in trained_mlp.network.state_dict().items()}
    robust = adversarial_training(trained_mlp, defense_train, FAST_DEFENSE, relay_ctx, FAST_TRAINING)
    assert robust is not trained_mlp
    for key, value in trained_mlp.network.state_dict().items():
        assert torch.equal(value, before[key])
    assert len(robust.history) == len(trained_mlp.history) + FAST_DEFENSE.retrain_epochs


def test_retraining_is_deterministic(trained_mlp, defense_train, relay_ctx):
    first = adversarial_training(trained_mlp, defense_train, FAST_DEFENSE, relay_ctx, FAST_TRAINING)
    second = adversarial_training(trained_mlp, defense_train, FAST_DEFENSE, relay_ctx, FAST_TRAINING)
    for key, value in first.network.state_dict().items():
        assert torch.equal(value, second.network.state_dict()[key])


def test_zero_retrain_epochs_rejected():
    with pytest.raises(ValueError):
        DefenseConfig(retrain_epochs=0)


def test_evaluate_defense_requires_adversarial_set(trained_mlp, small_split, relay_ctx):
    _, test = small_split
    with pytest.raises(InsufficientDataError):
        evaluate_defense(trained_mlp, test, Dataset.from_samples([]), relay_ctx)


def test_evaluate_defense_reports(trained_mlp, small_split, relay_ctx):
    """Test the clean and adversarial reports cover their sets and the fooling rate is a fraction."""
    _, test = small_split
    clean, adversarial = evaluate_defense(trained_mlp, test, test, relay_ctx)
    assert clean.total == adversarial.total == len(test)
    assert 0.0 <= adversarial.fooling_rate <= 1.0
    assert clean.metadata.model_id == "mlp"


def test_defense_service_report(trained_mlp, defense_train, small_split, relay_ctx):
    """Test a full defense round fills every section of the report."""
    _, test = small_split
    result = DefenseService(relay_ctx).defend(trained_mlp, defense_train, test, FAST_DEFENSE, FAST_TRAINING)
    report = result.report
    assert report.architecture == "mlp"
    assert report.augmented == result.augmentation.added == sum(report.successes_per_epsilon.values())
    for section in (report.pre_clean, report.pre_adversarial, report.post_clean, report.post_replayed, report.post_adaptive):
        assert section.total == len(test)
    assert report.post_clean.metadata.model_id == "mlp_robust"
    assert len(result.adaptive_test) == len(test)


def test_rounds_split_retraining_epochs():
    assert round_epochs(DefenseConfig(retrain_epochs=10, rounds=3)) == [4, 3, 3]
    assert round_epochs(DefenseConfig(retrain_epochs=4)) == [1, 1, 1, 1]
    assert DefenseConfig(retrain_epochs=4).round_count == 4
    with pytest.raises(ValueError, match="round"):
        DefenseConfig(retrain_epochs=2, rounds=3)


def test_harden_crafts_against_each_round(trained_mlp, defense_train, relay_ctx, caplog):
    """Test every round crafts again and the pool keeps one sample per epsilon and source."""
    cfg = FAST_DEFENSE.model_copy(update={"retrain_epochs": 3, "rounds": 2})
    with caplog.at_level(logging.INFO, logger="lcdr.services.defense_service"):
        robust, augmentation = harden(trained_mlp, defense_train, cfg, relay_ctx, FAST_TRAINING)
    assert "round 1/2" in caplog.text and "round 2/2" in caplog.text
    assert len(robust.history) == len(trained_mlp.history) + 3

    fdias = int(np.sum(defense_train.labels() == LABEL_FDIA))
    assert augmentation.added <= len(cfg.epsilons) * fdias
    assert len(augmentation.dataset) == len(defense_train) + augmentation.added
    sources = [
        (s.provenance.attack.epsilon, s.provenance.source_index)
        for s in augmentation.dataset.samples[len(defense_train):]
    ]
    assert len(sources) == len(set(sources))
    assert sources == sorted(sources)
