"""Adversarial training defense.

FDIA training samples the detector gets right are attacked at each
configured epsilon; every dual-criterion success joins the training set
with label 1 and the detector keeps training from its current parameters.
Retraining runs in rounds: before each round the adversarial samples are
crafted again against the detector as it stands, so later rounds train on
the attacks the hardened model is still open to.
"""

import logging
from dataclasses import dataclass

import numpy as np

from lcdr.errors import ConfigurationError, InsufficientDataError
from lcdr.models import (
    LABEL_FDIA,
    Dataset,
    DefenseConfig,
    DefenseReport,
    LabeledSample,
    MetricsReport,
    ReportMetadata,
    SampleProvenance,
    TrainConfig,
)
from lcdr.nn.detector import Detector
from lcdr.services.attack_service import attack_samples, build_adversarial_testset
from lcdr.services.metrics_service import classification_metrics
from lcdr.services.protection_service import false_trip_rate
from lcdr.services.relay_service import RelayContext
from lcdr.services.training_service import TrainingService, predict_batch

logger = logging.getLogger(__name__)

# (epsilon position in DefenseConfig.epsilons, training sample index)
PoolKey = tuple[int, int]


@dataclass
class Augmentation:
    """Training set extended with successful adversarial FDIAs."""

    dataset: Dataset
    attempted: int
    successes_per_epsilon: dict[str, int]

    @property
    def added(self) -> int:
        return sum(self.successes_per_epsilon.values())


@dataclass
class DefenseResult:
    detector: Detector
    augmentation: Augmentation
    adaptive_test: Dataset
    report: DefenseReport


def craft_training_adversarials(
    detector: Detector,
    train: Dataset,
    cfg: DefenseConfig,
    relay_ctx: RelayContext,
) -> tuple[int, dict[PoolKey, LabeledSample]]:
    """Attack every correctly detected training FDIA once per epsilon.

    Returns:
        (number of gated FDIAs, successful adversarial samples keyed by
        epsilon position and training index)
    """
    if relay_ctx is None:
        raise ConfigurationError("the defense needs a relay context to validate trips")
    predictions = predict_batch(detector, train)
    gated = np.flatnonzero((train.labels() == LABEL_FDIA) & (predictions == LABEL_FDIA))
    sources = [train.samples[int(i)] for i in gated]

    crafted: dict[PoolKey, LabeledSample] = {}
    for position, epsilon in enumerate(cfg.epsilons):
        attack_cfg = cfg.attack.model_copy(update={"epsilon": epsilon})
        outcomes = attack_samples(detector, sources, attack_cfg, relay_ctx, desc=f"Augmenting eps={epsilon}")
        for index, sample, outcome in zip(gated, sources, outcomes):
            if not outcome.success:
                continue
            crafted[(position, int(index))] = LabeledSample(
                window=outcome.adversarial_window,
                label=LABEL_FDIA,
                provenance=SampleProvenance(
                    origin="augmented",
                    scenario=sample.provenance.scenario,
                    source_index=int(index),
                    attack=outcome.record(int(index), attack_cfg),
                ),
            )
    return len(gated), crafted


def pooled_augmentation(
    train: Dataset,
    pool: dict[PoolKey, LabeledSample],
    cfg: DefenseConfig,
    attempted: int,
    model_id: str,
) -> Augmentation:
    """Training set followed by the pooled adversarial samples, ordered by epsilon then source index."""
    keys = sorted(pool)
    per_epsilon = {str(epsilon): 0 for epsilon in cfg.epsilons}
    for position, _ in keys:
        per_epsilon[str(cfg.epsilons[position])] += 1
    dataset = Dataset.from_samples(
        train.samples + [pool[key] for key in keys],
        train.window_spec,
        train.manifest.generator_seed,
        description=f"{train.manifest.description} + {len(keys)} adversarial ({model_id})".strip(),
    )
    return Augmentation(dataset=dataset, attempted=attempted, successes_per_epsilon=per_epsilon)


def augment_training_set(
    detector: Detector,
    train: Dataset,
    cfg: DefenseConfig,
    relay_ctx: RelayContext,
) -> Augmentation:
    """One crafting pass against ``detector``: the training set plus every success.

    Fault samples and the original FDIA samples are kept as they are.
    """
    attempted, crafted = craft_training_adversarials(detector, train, cfg, relay_ctx)
    augmentation = pooled_augmentation(train, crafted, cfg, attempted, detector.model_id)
    logger.info(
        f"{detector.model_id}: {attempted} FDIAs attacked, {augmentation.added} adversarial samples added "
        f"{augmentation.successes_per_epsilon}"
    )
    return augmentation


def round_epochs(cfg: DefenseConfig) -> list[int]:
    """Retraining epochs per crafting round, spread as evenly as the total allows."""
    return [len(chunk) for chunk in np.array_split(np.arange(cfg.retrain_epochs), cfg.round_count)]


def harden(
    detector: Detector,
    train: Dataset,
    cfg: DefenseConfig,
    relay_ctx: RelayContext,
    train_cfg: TrainConfig,
) -> tuple[Detector, Augmentation]:
    """Round-based adversarial training of a copy of ``detector``.

    Each round crafts adversarial samples against the current copy and
    trains it on the clean set plus the pool, which keeps the latest
    success per (epsilon, training sample). With a single round this is
    one crafting pass against the input detector followed by
    ``cfg.retrain_epochs`` epochs.

    Returns:
        The robust detector and the augmentation of the last round.
    """
    robust = detector.copy()
    pool: dict[PoolKey, LabeledSample] = {}
    attempted = 0
    augmentation = None
    for round_no, epochs in enumerate(round_epochs(cfg), start=1):
        gated, crafted = craft_training_adversarials(robust, train, cfg, relay_ctx)
        attempted += gated
        pool.update(crafted)
        augmentation = pooled_augmentation(train, pool, cfg, attempted, detector.model_id)
        logger.info(
            f"{detector.model_id} round {round_no}/{cfg.round_count}: {gated} FDIAs attacked, "
            f"{len(crafted)} new successes, pool {augmentation.successes_per_epsilon}"
        )
        if not pool:
            logger.warning(f"{detector.model_id}: no successful adversarial samples, retraining on the original data")
        round_cfg = train_cfg.model_copy(update={"epochs": epochs, "seed": train_cfg.seed + round_no - 1})
        TrainingService().train(robust, augmentation.dataset, round_cfg)
    return robust, augmentation


def adversarial_training(
    detector: Detector,
    train: Dataset,
    cfg: DefenseConfig,
    relay_ctx: RelayContext,
    train_cfg: TrainConfig | None = None,
) -> Detector:
    """Robust copy of an already trained detector; the input detector is left unchanged."""
    robust, _ = harden(detector, train, cfg, relay_ctx, train_cfg or TrainConfig())
    return robust


def evaluate_defense(
    detector: Detector,
    clean_test: Dataset,
    adv_test: Dataset,
    relay_ctx: RelayContext,
    metadata: ReportMetadata | None = None,
) -> tuple[MetricsReport, MetricsReport]:
    """Clean-set and adversarial-set metrics of one detector.

    The adversarial report carries the fooling rate of this detector on that
    set, i.e. the fraction of FDIAs that trip the relay while classified as
    faults.

    Raises:
        InsufficientDataError: either set is empty.
    """
    if len(adv_test) == 0 or len(clean_test) == 0:
        raise InsufficientDataError("defense evaluation needs non-empty clean and adversarial sets")
    metadata = metadata or ReportMetadata(model_id=detector.model_id)
    clean = classification_metrics(
        predict_batch(detector, clean_test),
        clean_test.labels(),
        metadata.model_copy(update={"dataset_id": clean_test.manifest.description or "clean"}),
    )
    adversarial = classification_metrics(
        predict_batch(detector, adv_test),
        adv_test.labels(),
        metadata.model_copy(update={"dataset_id": adv_test.manifest.description or "adversarial"}),
    )
    if np.any(adv_test.labels() == LABEL_FDIA):
        adversarial = adversarial.model_copy(update={"fooling_rate": false_trip_rate(detector, adv_test, relay_ctx)})
    return clean, adversarial


class DefenseService:
    """Full defense round: pre-defense evaluation, augmentation, retraining, paired re-evaluation."""

    def __init__(self, relay_ctx: RelayContext):
        self.relay_ctx = relay_ctx

    def defend(
        self,
        detector: Detector,
        train: Dataset,
        test: Dataset,
        cfg: DefenseConfig,
        train_cfg: TrainConfig,
        pre_adversarial: Dataset | None = None,
    ) -> DefenseResult:
        """Harden ``detector`` and report before/after metrics.

        Args:
            detector: Detector trained on clean data.
            train: Clean training set.
            test: Clean test set.
            cfg: Defense configuration; ``cfg.attack`` also builds the test-time attacks.
            train_cfg: Optimizer settings for retraining (epochs replaced by ``cfg.retrain_epochs``).
            pre_adversarial: Adversarial test set crafted against ``detector``; built when absent.

        Returns:
            DefenseResult with the robust detector, the augmented training set,
            the adaptive adversarial test set and the paired report.
        """
        metadata = ReportMetadata(
            model_id=detector.model_id, epsilon=cfg.attack.epsilon, iterations=cfg.attack.max_iterations
        )
        if pre_adversarial is None:
            pre_adversarial = build_adversarial_testset(detector, test, cfg.attack, self.relay_ctx)
        pre_clean, pre_adv = evaluate_defense(detector, test, pre_adversarial, self.relay_ctx, metadata)

        robust, augmentation = harden(detector, train, cfg, self.relay_ctx, train_cfg)

        robust_meta = metadata.model_copy(update={"model_id": f"{detector.model_id}_robust"})
        adaptive = build_adversarial_testset(robust, test, cfg.attack, self.relay_ctx)
        post_clean, post_replayed = evaluate_defense(robust, test, pre_adversarial, self.relay_ctx, robust_meta)
        _, post_adaptive = evaluate_defense(robust, test, adaptive, self.relay_ctx, robust_meta)

        report = DefenseReport(
            architecture=detector.model_id,
            attempted=augmentation.attempted,
            augmented=augmentation.added,
            successes_per_epsilon=augmentation.successes_per_epsilon,
            pre_clean=pre_clean,
            pre_adversarial=pre_adv,
            post_clean=post_clean,
            post_replayed=post_replayed,
            post_adaptive=post_adaptive,
        )
        logger.info(
            f"{detector.model_id} defense: adversarial FDIA recall {pre_adv.recall} -> {post_adaptive.recall} "
            f"(replayed {post_replayed.recall}), fault recall {pre_clean.fault_recall} -> {post_clean.fault_recall}"
        )
        return DefenseResult(detector=robust, augmentation=augmentation, adaptive_test=adaptive, report=report)
