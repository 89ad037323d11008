"""Versioned detector checkpoints."""

import logging
from pathlib import Path

import torch

from lcdr.errors import DataIntegrityError
from lcdr.models import Architecture, EpochStats, Scaler
from lcdr.nn.architectures import build_network
from lcdr.nn.detector import Detector

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


def save_checkpoint(detector: Detector, path: Path | str) -> Path:
    """Write architecture descriptor, float64 parameters, scaler and training history with ``torch.save``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "architecture": {
            "name": detector.architecture.value,
            "channels": detector.channels,
            "length": detector.length,
        },
        "state_dict": {k: v.detach().to(torch.float64).clone() for k, v in detector.network.state_dict().items()},
        "scaler": {
            "mean": torch.as_tensor(detector.scaler.mean, dtype=torch.float64),
            "std": torch.as_tensor(detector.scaler.std, dtype=torch.float64),
        },
        "history": [stats.model_dump() for stats in detector.history],
    }
    torch.save(payload, path)
    logger.info(f"Saved {detector.model_id} checkpoint to {path}")
    return path


def load_checkpoint(path: Path | str, dtype: torch.dtype = torch.float64) -> Detector:
    """Rebuild a detector from a checkpoint.

    Raises:
        DataIntegrityError: missing file, unreadable payload or version mismatch.
    """
    path = Path(path)
    if not path.is_file():
        raise DataIntegrityError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        raise DataIntegrityError(f"checkpoint {path} is unreadable: {e}") from e
    if not isinstance(payload, dict) or payload.get("format_version") != CHECKPOINT_VERSION:
        version = payload.get("format_version") if isinstance(payload, dict) else None
        raise DataIntegrityError(f"checkpoint {path} has format version {version}, expected {CHECKPOINT_VERSION}")

    descriptor = payload["architecture"]
    architecture = Architecture(descriptor["name"])
    network = build_network(architecture, descriptor["channels"], descriptor["length"]).to(dtype)
    try:
        network.load_state_dict(payload["state_dict"])
    except RuntimeError as e:
        raise DataIntegrityError(f"checkpoint {path} does not match the {architecture.value} layout: {e}") from e
    scaler = Scaler(mean=payload["scaler"]["mean"].numpy().copy(), std=payload["scaler"]["std"].numpy().copy())
    detector = Detector(architecture, network, scaler, descriptor["channels"], descriptor["length"])
    detector.history = [EpochStats(**stats) for stats in payload.get("history", [])]
    return detector
