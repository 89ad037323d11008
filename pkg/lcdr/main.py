"""LCDR lab command line.

Subcommands run one pipeline stage each and read/write a single output
directory:

    <out>/data/{train,test}              gen
    <out>/models/<arch>.pt               train (+ <arch>_history.csv)
    <out>/attack/<arch>_eps<e>_it<n>/    attack (dataset, report.json, records.csv)
    <out>/sweep/fooling_rate.csv         sweep
    <out>/defense/<arch>_*               defend
    <out>/eval/<arch>_<dataset>.*        eval

Usage:
    python -m lcdr.main gen --config config/desk.json
    python -m lcdr.main train --arch all
    python -m lcdr.main attack --arch mlp --epsilon 0.5 --iters 5
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from lcdr.core.config import Settings, apply_overrides, get_settings, load_experiment_config
from lcdr.core.dependencies import PipelineCore, set_pipeline_core
from lcdr.errors import ConfigurationError, LcdrError
from lcdr.models import Architecture, Dataset, ExperimentConfig, ReportMetadata, SweepRow
from lcdr.nn.checkpoint import load_checkpoint, save_checkpoint
from lcdr.nn.detector import Detector
from lcdr.services.dataset_service import fit_scaler
from lcdr.services.metrics_service import classification_metrics, emit_report, emit_sweep
from lcdr.services.protection_service import false_trip_rate
from lcdr.services.training_service import measure_latency, predict_batch
from lcdr.storage import report_store
from lcdr.storage.dataset_store import load_dataset, save_dataset

LOG_FORMAT = '{"level":"%(levelname)s","logger":"%(name)s","time":%(created)d,"message":"%(message)s"}'

logger = logging.getLogger(__name__)


def configure_logging(settings: Settings):
    logging.basicConfig(level=settings.log_level.upper(), format=LOG_FORMAT)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


def data_dir(config: ExperimentConfig) -> Path:
    return config.output_dir / "data"


def model_path(config: ExperimentConfig, arch: Architecture) -> Path:
    return config.output_dir / "models" / f"{arch.value}.pt"


def attack_dir(config: ExperimentConfig, arch: Architecture) -> Path:
    return config.output_dir / "attack" / f"{arch.value}_eps{config.attack.epsilon:g}_it{config.attack.max_iterations}"


def _architectures(args) -> list[Architecture]:
    if args.arch == "all":
        return list(Architecture)
    return [Architecture(args.arch)]


def _arch_index(arch: Architecture) -> int:
    """Stable per-architecture seed offset, the same with ``--arch all`` or a single model."""
    return list(Architecture).index(arch)


def _load_split(config: ExperimentConfig, name: str) -> Dataset:
    path = data_dir(config) / name
    if not path.exists():
        raise ConfigurationError(f"no {name} dataset at {path}; run `gen` first")
    return load_dataset(path, verify_trip=config.relay)


def _load_detector(core: PipelineCore, args, arch: Architecture) -> Detector:
    path = Path(args.model) if getattr(args, "model", None) else model_path(core.config, arch)
    if not path.exists():
        raise ConfigurationError(f"no {arch.value} checkpoint at {path}; run `train --arch {arch.value}` first")
    return load_checkpoint(path, dtype=core.dtype)


def _emit(payload: dict):
    print(json.dumps(payload, indent=2, default=str))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gen(core: PipelineCore, args) -> int:
    config = core.config
    dataset = core.dataset_service.generate_dataset(config.generation, core.seed("generate"))
    train, test = core.dataset_service.split(dataset, config.split.test_fraction, core.seed("split"))
    save_dataset(train, data_dir(config) / "train")
    save_dataset(test, data_dir(config) / "test")
    _emit({
        "generated": dataset.manifest.class_counts,
        "train": train.manifest.class_counts,
        "test": test.manifest.class_counts,
        "output": data_dir(config),
    })
    return 0


def cmd_train(core: PipelineCore, args) -> int:
    config = core.config
    train = _load_split(config, "train")
    test = _load_split(config, "test")
    scaler = fit_scaler(train)
    summary = {}
    for arch in _architectures(args):
        offset = _arch_index(arch)
        detector = Detector.build(
            arch, scaler, seed=core.seed("init", offset), length=train.manifest.length, dtype=core.dtype
        )
        train_cfg = config.training.model_copy(update={"seed": core.seed("train", offset)})
        core.training_service.train(detector, train, train_cfg)

        path = save_checkpoint(detector, model_path(config, arch))
        report_store.save_rows(detector.history, path.with_name(f"{arch.value}_history.csv"))
        report = classification_metrics(
            predict_batch(detector, test), test.labels(), ReportMetadata(model_id=arch.value, dataset_id="test")
        )
        summary[arch.value] = {
            "checkpoint": path,
            "test_accuracy": report.accuracy,
            "latency_ms": measure_latency(detector, test.windows()),
        }
    _emit(summary)
    return 0


def cmd_attack(core: PipelineCore, args) -> int:
    config = core.config
    test = _load_split(config, "test")
    summary = {}
    for arch in _architectures(args):
        detector = _load_detector(core, args, arch)
        adversarial, result = core.attack_service.attack_dataset(detector, test, config.attack)
        out = attack_dir(config, arch)
        save_dataset(adversarial, out)
        report_store.save_json(result.model_copy(update={"records": []}), out / "report.json")
        report_store.save_rows(result.records, out / "records.csv")
        summary[arch.value] = {
            "n_fdias": result.n_fdias,
            "successes": result.successes,
            "fooling_rate_pct": result.fooling_rate_pct,
            "output": out,
        }
    _emit(summary)
    return 0


def cmd_sweep(core: PipelineCore, args) -> int:
    config = core.config
    test = _load_split(config, "test")
    rows: list[SweepRow] = []
    for arch in _architectures(args):
        detector = _load_detector(core, args, arch)
        for iterations in config.sweep.iterations:
            for epsilon in config.sweep.epsilons:
                attack_cfg = config.attack.model_copy(update={"epsilon": epsilon, "max_iterations": iterations})
                _, result = core.attack_service.attack_dataset(detector, test, attack_cfg)
                rows.append(
                    SweepRow(
                        model=arch.value,
                        epsilon=epsilon,
                        iterations=iterations,
                        n_fdias=result.n_fdias,
                        successes=result.successes,
                        fooling_rate_pct=result.fooling_rate_pct,
                    )
                )
    path = emit_sweep(rows, config.output_dir / "sweep" / "fooling_rate.csv")
    _emit({"rows": len(rows), "output": path})
    return 0


def cmd_defend(core: PipelineCore, args) -> int:
    config = core.config
    train = _load_split(config, "train")
    test = _load_split(config, "test")
    defense_cfg = config.defense.model_copy(update={"attack": config.attack})
    out = config.output_dir / "defense"
    summary = {}
    for arch in _architectures(args):
        detector = _load_detector(core, args, arch)
        previous = attack_dir(config, arch)
        pre_adversarial = load_dataset(previous) if previous.exists() else None
        train_cfg = config.training.model_copy(update={"seed": core.seed("defense", _arch_index(arch))})
        result = core.defense_service.defend(detector, train, test, defense_cfg, train_cfg, pre_adversarial)

        save_checkpoint(result.detector, out / f"{arch.value}_robust.pt")
        report_store.save_json(result.report, out / f"{arch.value}_report.json")
        save_dataset(result.augmentation.dataset, out / f"{arch.value}_augmented")
        summary[arch.value] = {
            "attempted": result.augmentation.attempted,
            "augmented": result.augmentation.added,
            "successes_per_epsilon": result.augmentation.successes_per_epsilon,
            "adversarial_recall": {
                "before": result.report.pre_adversarial.recall,
                "after_replayed": result.report.post_replayed.recall,
                "after_adaptive": result.report.post_adaptive.recall,
            },
            "fault_recall": {
                "before": result.report.pre_clean.fault_recall,
                "after": result.report.post_clean.fault_recall,
            },
        }
    _emit(summary)
    return 0


def cmd_eval(core: PipelineCore, args) -> int:
    config = core.config
    dataset_path = Path(args.dataset) if args.dataset else data_dir(config) / "test"
    dataset = load_dataset(dataset_path)
    records = [p.attack for p in dataset.manifest.provenance if p.attack is not None]
    adversarial = any(p.origin == "adversarial" for p in dataset.manifest.provenance)
    summary = {}
    for arch in _architectures(args):
        detector = _load_detector(core, args, arch)
        metadata = ReportMetadata(
            model_id=arch.value,
            dataset_id=dataset_path.name,
            epsilon=records[0].epsilon if records else None,
            iterations=records[0].max_iterations if records else None,
        )
        report = classification_metrics(predict_batch(detector, dataset), dataset.labels(), metadata)
        trip_rate = None
        if report.tp + report.fn > 0:
            trip_rate = false_trip_rate(detector, dataset, core.relay_ctx)
            if adversarial:
                report = report.model_copy(update={"fooling_rate": trip_rate})
        stem = config.output_dir / "eval" / f"{arch.value}_{dataset_path.name}"
        emit_report(report, stem.parent / f"{stem.name}.json", "json")
        emit_report(report, stem.parent / f"{stem.name}.csv", "csv")
        summary[arch.value] = {
            "confusion": {"tp": report.tp, "tn": report.tn, "fp": report.fp, "fn": report.fn},
            "accuracy": report.accuracy,
            "precision": report.precision,
            "recall": report.recall,
            "f1": report.f1,
            "fault_recall": report.fault_recall,
            "fooling_rate": report.fooling_rate,
            "false_trip_rate": trip_rate,
        }
    _emit(summary)
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "attack": cmd_attack,
    "sweep": cmd_sweep,
    "defend": cmd_defend,
    "eval": cmd_eval,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcdr", description="Attack and defense of FDIA detectors in differential relays")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Experiment config (JSON)")
    common.add_argument("--seed", type=int, help="Global seed")
    common.add_argument("--out", type=Path, help="Output directory")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--arch", choices=[a.value for a in Architecture] + ["all"], default="mlp")
    model.add_argument("--model", type=Path, help="Checkpoint path (single architecture only)")

    attack = argparse.ArgumentParser(add_help=False)
    attack.add_argument("--epsilon", type=float, help="FGSM step scale")
    attack.add_argument("--iters", type=int, help="Maximum FGSM iterations")

    sub.add_parser("gen", parents=[common], help="Generate and split the dataset")
    train = sub.add_parser("train", parents=[common], help="Train detectors on the clean training set")
    train.add_argument("--arch", choices=[a.value for a in Architecture] + ["all"], default="mlp")
    sub.add_parser("attack", parents=[common, model, attack], help="Build the adversarial test set")
    sub.add_parser("sweep", parents=[common, model, attack], help="Fooling rate over the epsilon and iteration grid")
    sub.add_parser("defend", parents=[common, model, attack], help="Adversarial training and paired evaluation")
    evaluate = sub.add_parser("eval", parents=[common, model], help="Metrics of a detector on a dataset")
    evaluate.add_argument("--dataset", type=Path, help="Dataset directory (default: the test split)")
    sub.add_parser("schema", help="Print the experiment config JSON schema")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        _emit(ExperimentConfig.model_json_schema())
        return 0
    try:
        settings = get_settings()
        configure_logging(settings)
        config = load_experiment_config(args.config, settings)
        config = apply_overrides(
            config,
            seed=args.seed,
            output_dir=args.out,
            epsilon=getattr(args, "epsilon", None),
            iterations=getattr(args, "iters", None),
        )
        if getattr(args, "model", None) and getattr(args, "arch", None) == "all":
            raise ConfigurationError("--model names one checkpoint; pick a single --arch")
        core = PipelineCore(config, settings)
        core.initialize()
        set_pipeline_core(core)
        logger.info(f"Running {args.command} into {config.output_dir}")
        return COMMANDS[args.command](core, args)
    except LcdrError as e:
        print(f"error[{e.category}]: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
