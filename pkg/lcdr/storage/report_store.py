"""JSON and CSV persistence for reports."""

from pathlib import Path
from typing import TypeVar

import pandas as pd
from pydantic import BaseModel, ValidationError

from lcdr.errors import DataIntegrityError
from lcdr.models import MetricsReport, ReportMetadata

ModelT = TypeVar("ModelT", bound=BaseModel)

METRICS_COLUMNS = [
    "tp", "tn", "fp", "fn",
    "accuracy", "precision", "recall", "f1", "fault_recall", "fooling_rate",
    "model_id", "dataset_id", "epsilon", "iterations",
]
_INT_COLUMNS = {"tp", "tn", "fp", "fn", "iterations"}
_TEXT_COLUMNS = {"model_id", "dataset_id"}


def _writable(path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def save_json(model: BaseModel, path: Path | str) -> Path:
    path = _writable(path)
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    return path


def load_json(path: Path | str, model_type: type[ModelT]) -> ModelT:
    path = Path(path)
    try:
        return model_type.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise DataIntegrityError(f"report not found: {path}") from e
    except ValidationError as e:
        raise DataIntegrityError(f"report {path} is malformed: {e}") from e


def save_metrics_csv(report: MetricsReport, path: Path | str) -> Path:
    """One row, columns in METRICS_COLUMNS order; absent values are empty cells."""
    row = report.model_dump(exclude={"metadata"})
    row.update(report.metadata.model_dump())
    frame = pd.DataFrame([[row[c] for c in METRICS_COLUMNS]], columns=METRICS_COLUMNS)
    path = _writable(path)
    frame.to_csv(path, index=False)
    return path


def load_metrics_csv(path: Path | str) -> MetricsReport:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError as e:
        raise DataIntegrityError(f"report not found: {path}") from e
    if list(frame.columns) != METRICS_COLUMNS or len(frame) != 1:
        raise DataIntegrityError(f"report {path} does not have the metrics layout")
    raw = frame.iloc[0].to_dict()
    values = {}
    for column, text in raw.items():
        if column in _TEXT_COLUMNS:
            values[column] = text
        elif text == "":
            values[column] = None
        elif column in _INT_COLUMNS:
            values[column] = int(float(text))
        else:
            values[column] = float(text)
    metadata = ReportMetadata(**{k: values.pop(k) for k in ("model_id", "dataset_id", "epsilon", "iterations")})
    try:
        return MetricsReport(**values, metadata=metadata)
    except ValidationError as e:
        raise DataIntegrityError(f"report {path} is malformed: {e}") from e


def save_rows(rows: list[BaseModel], path: Path | str) -> Path:
    """Rows of one model type as CSV, one line per row, columns in field order."""
    path = _writable(path)
    if rows:
        frame = pd.DataFrame([r.model_dump() for r in rows])
    else:
        frame = pd.DataFrame()
    frame.to_csv(path, index=False)
    return path


def load_rows(path: Path | str, model_type: type[ModelT]) -> list[ModelT]:
    path = Path(path)
    if not path.is_file():
        raise DataIntegrityError(f"table not found: {path}")
    frame = pd.read_csv(path)
    return [model_type.model_validate(record) for record in frame.astype(object).to_dict(orient="records")]
