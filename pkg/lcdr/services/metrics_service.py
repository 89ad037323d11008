"""Classification metrics and fooling rate, FDIA as the positive class."""

import logging
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
from sklearn.metrics import confusion_matrix

from lcdr.errors import InsufficientDataError, ParameterError, ShapeError
from lcdr.models import AttackOutcome, AttackRecord, MetricsReport, ReportMetadata, SweepRow
from lcdr.storage import report_store

logger = logging.getLogger(__name__)


def _ratio(numerator: int, denominator: int) -> float | None:
    return numerator / denominator if denominator else None


def classification_metrics(predictions, labels, metadata: ReportMetadata | None = None) -> MetricsReport:
    """Confusion counts plus accuracy, precision, recall, F1 and fault recall.

    Ratios with a zero denominator are reported as None, not 0.
    """
    predictions = np.asarray(predictions, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if predictions.shape != labels.shape:
        raise ShapeError(f"{predictions.shape[0]} predictions for {labels.shape[0]} labels")
    if predictions.size == 0:
        raise InsufficientDataError("metrics need at least one prediction")
    if not np.isin(predictions, (0, 1)).all() or not np.isin(labels, (0, 1)).all():
        raise ParameterError("predictions and labels must be 0 (fault) or 1 (FDIA)")

    (tn, fp), (fn, tp) = confusion_matrix(labels, predictions, labels=[0, 1])
    tp, tn, fp, fn = int(tp), int(tn), int(fp), int(fn)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    if precision is None or recall is None:
        logger.warning(f"Undefined metrics for {(metadata or ReportMetadata()).model_id or 'model'}: precision={precision} recall={recall}")
    return MetricsReport(
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
        accuracy=(tp + tn) / predictions.size,
        precision=precision,
        recall=recall,
        f1=f1,
        fault_recall=_ratio(tn, tn + fp),
        metadata=metadata or ReportMetadata(),
    )


def fooling_rate(outcomes: Iterable[AttackOutcome | AttackRecord], n_fdias: int) -> float:
    """Percentage of FDIAs whose adversarial version fooled the detector AND tripped the relay."""
    outcomes = list(outcomes)
    if n_fdias < 1:
        raise ParameterError("fooling rate needs at least one FDIA sample")
    if len(outcomes) > n_fdias:
        raise ParameterError(f"{len(outcomes)} outcomes for {n_fdias} FDIA samples")
    successes = sum(1 for o in outcomes if o.success and o.fooled_model and o.relay_tripped)
    return 100.0 * successes / n_fdias


def with_fooling_rate(report: MetricsReport, rate_pct: float) -> MetricsReport:
    """Attach a fooling rate (given in percent, stored as a fraction)."""
    return report.model_copy(update={"fooling_rate": rate_pct / 100.0})


def emit_report(report: MetricsReport, path: Path | str, fmt: Literal["json", "csv"] = "json") -> Path:
    """Write a report as JSON or as a one-row CSV with stable columns."""
    if fmt == "json":
        return report_store.save_json(report, path)
    if fmt == "csv":
        return report_store.save_metrics_csv(report, path)
    raise ParameterError(f"unknown report format {fmt!r}")


def load_report(path: Path | str) -> MetricsReport:
    """Read a report written by ``emit_report`` (format taken from the suffix)."""
    path = Path(path)
    if path.suffix == ".csv":
        return report_store.load_metrics_csv(path)
    return report_store.load_json(path, MetricsReport)


def emit_sweep(rows: list[SweepRow], path: Path | str) -> Path:
    """One CSV row per (model, epsilon, iterations)."""
    return report_store.save_rows(rows, path)
