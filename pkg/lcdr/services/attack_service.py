"""Masked iterative FGSM against FDIA detectors.

An adversarial FDIA must satisfy two conditions at once: the detector
labels it a fault, and the relay still trips on the physical window.
Only the remote channels (rows 3-5) are perturbed.
"""

import logging
import sys

import numpy as np
import torch
from tqdm import tqdm

from lcdr.errors import ConfigurationError, ParameterError
from lcdr.models import (
    LABEL_FAULT,
    LABEL_FDIA,
    AttackConfig,
    AttackOutcome,
    AttackSummary,
    Dataset,
    LabeledSample,
    MeasurementWindow,
    SampleProvenance,
)
from lcdr.nn.detector import Detector
from lcdr.services.metrics_service import fooling_rate
from lcdr.services.relay_service import RelayContext

logger = logging.getLogger(__name__)

ATTACK_BATCH_SIZE = 256


def amplitude_factor(x) -> float:
    """Largest absolute element of the sample (0.0 for an all-zero sample)."""
    x = torch.as_tensor(x)
    if x.numel() == 0:
        raise ParameterError("amplitude factor of an empty sample")
    return float(x.abs().max())


def _mask(cfg: AttackConfig, like: torch.Tensor) -> torch.Tensor:
    rows = torch.tensor(cfg.channel_mask, dtype=torch.bool)
    return rows[:, None].expand_as(like)


def fgsm_step(
    detector: Detector,
    x: torch.Tensor,
    y: int,
    cfg: AttackConfig,
    original: torch.Tensor | None = None,
    amplitude: float | torch.Tensor | None = None,
) -> torch.Tensor:
    """One masked, amplitude-scaled, clipped FGSM step in model space.

    delta = epsilon * sign(grad_x J) * a, with a the amplitude factor of the
    original sample. Elements outside the channel mask keep their exact
    value. Perturbed elements are clipped to the original sample's
    [min, max] (per channel when ``cfg.clip_scope == "channel"``).

    Works on one sample (6, T) or a batch (B, 6, T); the networks have no
    cross-sample layers, so each sample's step equals its single-sample step.

    Args:
        detector: Model under attack.
        x: Current model-space sample(s).
        y: True label (1 = FDIA).
        cfg: Attack configuration.
        original: Clean model-space sample(s); defaults to ``x``.
        amplitude: Amplitude factor, one per sample for a batch; defaults to that of ``original``.
    """
    x = torch.as_tensor(x, dtype=detector.dtype)
    original = x if original is None else torch.as_tensor(original, dtype=detector.dtype)
    if amplitude is None:
        amplitude = original.abs().flatten(start_dim=-2).amax(dim=-1)
    a = torch.as_tensor(amplitude, dtype=detector.dtype)[..., None, None]
    _, grad = detector.loss_and_input_gradient(x, y)

    stepped = x + cfg.epsilon * torch.sign(grad) * a
    if cfg.clip_scope == "channel":
        low = original.amin(dim=-1, keepdim=True)
        high = original.amax(dim=-1, keepdim=True)
    else:
        low = original.flatten(start_dim=-2).amin(dim=-1)[..., None, None]
        high = original.flatten(start_dim=-2).amax(dim=-1)[..., None, None]
    stepped = torch.maximum(torch.minimum(stepped, high), low)
    return torch.where(_mask(cfg, x), stepped, x).detach()


def physical_window(detector: Detector, x: torch.Tensor, source: MeasurementWindow, cfg: AttackConfig) -> MeasurementWindow:
    """Inverse-scale the masked rows of ``x`` into ``source``, at stored (float32) precision."""
    samples = np.array(source.samples)
    restored = detector.to_physical(x).astype("<f4").astype(np.float64)
    rows = np.array(cfg.channel_mask)
    samples[rows] = restored[rows]
    return source.with_samples(samples)


def _check_attackable(samples: list[LabeledSample], relay_ctx: RelayContext | None) -> None:
    if relay_ctx is None:
        raise ConfigurationError("the attack needs a relay context to validate trips")
    if any(sample.label != LABEL_FDIA for sample in samples):
        raise ParameterError("only FDIA samples are attacked")


def generate_adversarial_batch(
    detector: Detector,
    samples: list[LabeledSample],
    cfg: AttackConfig,
    relay_ctx: RelayContext | None,
) -> list[AttackOutcome]:
    """Run the iterative attack on several FDIAs at once.

    Every sample follows its own loop: it leaves the batch at its first
    success, and the outcome is the one ``generate_adversarial`` gives for
    that sample alone.

    Raises:
        ConfigurationError: no relay context.
        ParameterError: a sample is not an FDIA.
    """
    _check_attackable(samples, relay_ctx)
    if not samples:
        return []
    windows = [sample.window for sample in samples]
    x0 = detector.to_model_space(np.stack([w.samples for w in windows]))
    amplitudes = x0.abs().flatten(start_dim=1).amax(dim=1)
    outcomes: list[AttackOutcome | None] = [None] * len(samples)

    for i, label in enumerate(detector.predict(x0)):
        if label == cfg.target_label:
            tripped = relay_ctx.trips(windows[i])
            outcomes[i] = AttackOutcome(
                success=tripped,
                adversarial_window=windows[i],
                iterations_used=0,
                fooled_model=True,
                relay_tripped=tripped,
            )
        elif float(amplitudes[i]) == 0.0:
            # An all-zero sample has no perturbation direction
            outcomes[i] = AttackOutcome(
                success=False,
                adversarial_window=windows[i],
                iterations_used=0,
                fooled_model=False,
                relay_tripped=False,
            )

    active = [i for i, outcome in enumerate(outcomes) if outcome is None]
    fooled = np.zeros(len(samples), dtype=bool)
    tripped = np.zeros(len(samples), dtype=bool)
    x = x0.clone()
    for iteration in range(1, cfg.max_iterations + 1):
        if not active:
            break
        rows = torch.as_tensor(active)
        x[rows] = fgsm_step(detector, x[rows], LABEL_FDIA, cfg, x0[rows], amplitudes[rows])
        candidates = [physical_window(detector, x[i], windows[i], cfg) for i in active]
        labels = detector.predict(detector.to_model_space(np.stack([c.samples for c in candidates])))
        remaining = []
        for i, candidate, label in zip(active, candidates, labels):
            fooled[i] = label == cfg.target_label
            tripped[i] = relay_ctx.trips(candidate)
            if not (fooled[i] and tripped[i]):
                remaining.append(i)
                continue
            outcomes[i] = AttackOutcome(
                success=True,
                adversarial_window=candidate,
                iterations_used=iteration,
                fooled_model=True,
                relay_tripped=True,
                perturbation_inf_norm_ka=float(np.max(np.abs(candidate.samples - windows[i].samples))),
            )
        active = remaining

    for i in active:
        outcomes[i] = AttackOutcome(
            success=False,
            adversarial_window=windows[i],
            iterations_used=cfg.max_iterations,
            fooled_model=bool(fooled[i]),
            relay_tripped=bool(tripped[i]),
        )
    return outcomes


def generate_adversarial(
    detector: Detector,
    sample: LabeledSample,
    cfg: AttackConfig,
    relay_ctx: RelayContext | None,
) -> AttackOutcome:
    """Iterate FGSM steps until the detector says fault while the relay trips.

    A clean sample the detector already labels a fault returns at once with
    zero iterations, as does an all-zero sample. On failure the original
    window is returned.

    Raises:
        ConfigurationError: no relay context.
        ParameterError: the sample is not an FDIA.
    """
    return generate_adversarial_batch(detector, [sample], cfg, relay_ctx)[0]


def attack_samples(
    detector: Detector,
    samples: list[LabeledSample],
    cfg: AttackConfig,
    relay_ctx: RelayContext | None,
    desc: str = "Attacking",
    batch_size: int = ATTACK_BATCH_SIZE,
) -> list[AttackOutcome]:
    """Attack FDIAs in batches of ``batch_size`` with a progress bar."""
    _check_attackable(samples, relay_ctx)
    outcomes: list[AttackOutcome] = []
    with tqdm(total=len(samples), desc=desc, disable=not sys.stderr.isatty()) as progress:
        for start in range(0, len(samples), batch_size):
            chunk = samples[start:start + batch_size]
            outcomes.extend(generate_adversarial_batch(detector, chunk, cfg, relay_ctx))
            progress.update(len(chunk))
    return outcomes


def build_adversarial_testset(
    detector: Detector,
    test: Dataset,
    cfg: AttackConfig,
    relay_ctx: RelayContext | None,
) -> Dataset:
    """Replace every FDIA in ``test`` by its adversarial version; faults are copied verbatim.

    Failed attacks keep the original window. Each FDIA's provenance carries
    its attack record.
    """
    if relay_ctx is None:
        raise ConfigurationError("the attack needs a relay context to validate trips")
    fdia_indices = [i for i, sample in enumerate(test.samples) if sample.label == LABEL_FDIA]
    outcomes = attack_samples(
        detector, [test.samples[i] for i in fdia_indices], cfg, relay_ctx, desc=f"Attacking {detector.model_id}"
    )
    samples = list(test.samples)
    for index, outcome in zip(fdia_indices, outcomes):
        samples[index] = LabeledSample(
            window=outcome.adversarial_window,
            label=LABEL_FDIA,
            provenance=SampleProvenance(
                origin="adversarial",
                scenario=test.samples[index].provenance.scenario,
                source_index=index,
                attack=outcome.record(index, cfg),
            ),
        )
    return Dataset.from_samples(
        samples,
        test.window_spec,
        test.manifest.generator_seed,
        description=f"adversarial {detector.model_id} eps={cfg.epsilon} iters={cfg.max_iterations}",
    )


def summarize_attack(detector: Detector, adversarial: Dataset, cfg: AttackConfig) -> AttackSummary:
    """Fooling rate and per-sample records of an adversarial test set."""
    records = [p.attack for p in adversarial.manifest.provenance if p.attack is not None]
    n_fdias = len(records)
    return AttackSummary(
        architecture=detector.model_id,
        epsilon=cfg.epsilon,
        max_iterations=cfg.max_iterations,
        n_fdias=n_fdias,
        successes=sum(r.success for r in records),
        fooling_rate_pct=fooling_rate(records, n_fdias) if n_fdias else 0.0,
        records=records,
    )


class AttackService:
    """Runs attacks against one relay configuration."""

    def __init__(self, relay_ctx: RelayContext):
        self.relay_ctx = relay_ctx

    def attack_sample(self, detector: Detector, sample: LabeledSample, cfg: AttackConfig) -> AttackOutcome:
        return generate_adversarial(detector, sample, cfg, self.relay_ctx)

    def attack_dataset(self, detector: Detector, test: Dataset, cfg: AttackConfig) -> tuple[Dataset, AttackSummary]:
        adversarial = build_adversarial_testset(detector, test, cfg, self.relay_ctx)
        summary = summarize_attack(detector, adversarial, cfg)
        logger.info(
            f"{summary.architecture} eps={cfg.epsilon} iters={cfg.max_iterations}: "
            f"{summary.successes}/{summary.n_fdias} successful ({summary.fooling_rate_pct:.2f}%)"
        )
        return adversarial, summary
