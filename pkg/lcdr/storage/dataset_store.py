"""Dataset directory format.

A dataset directory holds:

- ``manifest.json``: versioned manifest with counts, window layout and provenance
- ``samples.f32``: little-endian float32 windows, row-major [N, 6, T]
- ``labels.u8``: one byte per sample (0 = fault, 1 = FDIA)
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from lcdr.errors import DataIntegrityError, ParameterError
from lcdr.models import (
    CHANNELS,
    Dataset,
    DatasetManifest,
    LabeledSample,
    MeasurementWindow,
    ProtectionConfig,
    SampleProvenance,
    WindowSpec,
)
from lcdr.services.relay_service import trip_check

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.json"
SAMPLES_FILE = "samples.f32"
LABELS_FILE = "labels.u8"


def save_dataset(dataset: Dataset, path: Path | str) -> Path:
    """Write ``dataset`` to directory ``path`` (created if missing)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    windows = dataset.windows()
    labels = dataset.labels()
    manifest = dataset.manifest.model_copy(
        update={
            "format_version": FORMAT_VERSION,
            "count": len(dataset),
            "length": windows.shape[2],
            "class_counts": {"fault": int(np.sum(labels == 0)), "fdia": int(np.sum(labels == 1))},
            "provenance": [s.provenance for s in dataset.samples],
        }
    )
    stored = windows.astype("<f4")
    if not np.array_equal(stored.astype(np.float64), windows):
        logger.warning(f"Dataset {path} holds values beyond float32 precision; they are rounded on save")

    (path / MANIFEST_FILE).write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    (path / SAMPLES_FILE).write_bytes(np.ascontiguousarray(stored).tobytes(order="C"))
    (path / LABELS_FILE).write_bytes(labels.astype(np.uint8).tobytes())
    logger.info(f"Saved {len(dataset)} windows to {path}")
    return path


def load_dataset(path: Path | str, verify_trip: ProtectionConfig | None = None) -> Dataset:
    """Read a dataset directory, rejecting truncated or inconsistent files.

    Args:
        path: Dataset directory.
        verify_trip: When given, every window must trip the relay with these settings.

    Raises:
        DataIntegrityError: missing files, version mismatch, size or count disagreement.
    """
    path = Path(path)
    if not path.is_dir():
        raise DataIntegrityError(f"dataset directory not found: {path}")
    try:
        manifest = DatasetManifest.model_validate_json((path / MANIFEST_FILE).read_text(encoding="utf-8"))
        raw_samples = (path / SAMPLES_FILE).read_bytes()
        raw_labels = (path / LABELS_FILE).read_bytes()
    except FileNotFoundError as e:
        raise DataIntegrityError(f"dataset {path} is incomplete: {e.filename} missing") from e
    except ValidationError as e:
        raise DataIntegrityError(f"dataset {path} has an invalid manifest: {e}") from e

    if manifest.format_version != FORMAT_VERSION:
        raise DataIntegrityError(
            f"dataset {path} has format version {manifest.format_version}, expected {FORMAT_VERSION}"
        )
    if manifest.channels != CHANNELS:
        raise DataIntegrityError(f"dataset {path} has channel layout {manifest.channels}")
    try:
        layout = WindowSpec(
            sample_rate_hz=manifest.sample_rate_hz,
            base_frequency_hz=manifest.base_frequency_hz,
            cycles=manifest.cycles,
            pre_event_cycles=manifest.pre_event_cycles,
        )
    except ValidationError as e:
        raise DataIntegrityError(f"dataset {path} has an invalid window layout: {e}") from e
    if (layout.length, layout.trigger_index) != (manifest.length, manifest.trigger_index):
        raise DataIntegrityError(
            f"dataset {path}: {manifest.cycles} cycles with trigger after {manifest.pre_event_cycles} give "
            f"{layout.length}/{layout.trigger_index} samples, manifest declares {manifest.length}/{manifest.trigger_index}"
        )
    per_sample = len(CHANNELS) * manifest.length * 4
    if len(raw_samples) != manifest.count * per_sample:
        raise DataIntegrityError(
            f"dataset {path}: {SAMPLES_FILE} holds {len(raw_samples)} bytes, "
            f"manifest declares {manifest.count} windows of {per_sample} bytes"
        )
    if len(raw_labels) != manifest.count:
        raise DataIntegrityError(
            f"dataset {path}: {LABELS_FILE} holds {len(raw_labels)} labels, manifest declares {manifest.count}"
        )
    if manifest.provenance and len(manifest.provenance) != manifest.count:
        raise DataIntegrityError(
            f"dataset {path}: {len(manifest.provenance)} provenance entries for {manifest.count} windows"
        )

    windows = np.frombuffer(raw_samples, dtype="<f4").reshape(manifest.count, len(CHANNELS), manifest.length)
    labels = np.frombuffer(raw_labels, dtype=np.uint8)
    counts = {"fault": int(np.sum(labels == 0)), "fdia": int(np.sum(labels == 1))}
    if counts != manifest.class_counts:
        raise DataIntegrityError(f"dataset {path}: class counts {counts} disagree with manifest {manifest.class_counts}")

    samples = []
    for i in range(manifest.count):
        window = MeasurementWindow(
            samples=windows[i].astype(np.float64),
            sample_rate_hz=manifest.sample_rate_hz,
            base_frequency_hz=manifest.base_frequency_hz,
            trigger_index=manifest.trigger_index,
        )
        try:
            sample = LabeledSample(
                window=window,
                label=int(labels[i]),
                provenance=manifest.provenance[i] if manifest.provenance else SampleProvenance(),
            )
        except ParameterError as e:
            raise DataIntegrityError(f"dataset {path}, sample {i}: {e}") from e
        if verify_trip is not None and not trip_check(window, verify_trip.settings, verify_trip.pickup_count).tripped:
            raise DataIntegrityError(f"dataset {path}, sample {i} no longer trips the relay")
        samples.append(sample)

    logger.info(f"Loaded {manifest.count} windows from {path}")
    return Dataset(samples=samples, manifest=manifest)


def export_csv(dataset: Dataset, path: Path | str) -> Path:
    """One row per sample: label, then every channel sample as ``<channel>_t<n>``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    length = dataset.manifest.length
    columns = [f"{channel}_t{n}" for channel in CHANNELS for n in range(length)]
    frame = pd.DataFrame(dataset.windows().reshape(len(dataset), -1), columns=columns)
    frame.insert(0, "label", dataset.labels())
    frame.to_csv(path, index=False)
    return path
