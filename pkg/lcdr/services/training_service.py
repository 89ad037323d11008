"""Detector training, batch prediction and inference timing."""

import logging
import time

import numpy as np
import torch
import torch.nn as nn
from torch.utils.data import DataLoader, TensorDataset

from lcdr.errors import InsufficientDataError, TrainingError
from lcdr.models import Dataset, EpochStats, OptimizerName, TrainConfig
from lcdr.nn.detector import DECISION_THRESHOLD, Detector, first_non_finite_layer, logit_bce

logger = logging.getLogger(__name__)


class TrainingService:
    """Mini-batch BCE training with seeded shuffling."""

    def fit(self, network: nn.Module, x: torch.Tensor, y: torch.Tensor, cfg: TrainConfig, name: str = "model") -> list[EpochStats]:
        """Train ``network`` in place on model-space inputs ``x`` with 0/1 targets ``y``.

        Returns:
            One EpochStats per epoch (empty for ``cfg.epochs == 0``).

        Raises:
            InsufficientDataError: empty training set.
            TrainingError: the loss became NaN or infinite.
        """
        if x.shape[0] == 0:
            raise InsufficientDataError("cannot train on an empty dataset")
        dtype = next(network.parameters()).dtype
        x = x.to(dtype)
        y = y.to(dtype)
        generator = torch.Generator().manual_seed(cfg.seed)
        loader = DataLoader(TensorDataset(x, y), batch_size=cfg.batch_size, shuffle=True, generator=generator)
        if cfg.optimizer == OptimizerName.ADAM:
            optimizer = torch.optim.Adam(network.parameters(), lr=cfg.learning_rate)
        else:
            optimizer = torch.optim.SGD(network.parameters(), lr=cfg.learning_rate)

        history: list[EpochStats] = []
        for epoch in range(1, cfg.epochs + 1):
            network.train()
            total_loss, correct = 0.0, 0
            for xb, yb in loader:
                optimizer.zero_grad()
                logits = network(xb)
                loss = logit_bce(logits, yb).mean()
                if not torch.isfinite(loss):
                    layer = first_non_finite_layer(network, xb)
                    raise TrainingError(
                        f"{name}: loss is {loss.item()} at epoch {epoch} "
                        f"(first non-finite layer: {layer!r}, lr {cfg.learning_rate})"
                    )
                loss.backward()
                optimizer.step()
                total_loss += loss.item() * xb.shape[0]
                predicted = torch.sigmoid(logits.detach()) >= DECISION_THRESHOLD
                correct += int((predicted == (yb >= 0.5)).sum())
            stats = EpochStats(epoch=epoch, loss=total_loss / x.shape[0], accuracy=correct / x.shape[0])
            history.append(stats)
            logger.info(f"{name} epoch {epoch}/{cfg.epochs}: loss={stats.loss:.6f} accuracy={stats.accuracy:.4f}")
        network.eval()
        return history

    def train(self, detector: Detector, train_set: Dataset, cfg: TrainConfig) -> Detector:
        """Train the detector in place on a physical dataset and return it."""
        if len(train_set) == 0:
            raise InsufficientDataError("cannot train on an empty dataset")
        x = detector.to_model_space(train_set.windows())
        y = torch.as_tensor(train_set.labels(), dtype=detector.dtype)
        history = self.fit(detector.network, x, y, cfg, name=detector.model_id)
        detector.history = detector.history + history
        return detector


def predict_batch(detector: Detector, dataset: Dataset) -> np.ndarray:
    """0/1 predictions (1 = FDIA) for every window, in dataset order."""
    if len(dataset) == 0:
        return np.zeros(0, dtype=np.int64)
    return detector.predict(detector.to_model_space(dataset.windows()))


def measure_latency(detector: Detector, windows: np.ndarray, limit: int = 1000) -> float:
    """Mean single-window inference time in milliseconds (scaling included)."""
    windows = np.asarray(windows)[:limit]
    if windows.shape[0] == 0:
        raise InsufficientDataError("latency needs at least one window")
    detector.network.eval()
    # One warm-up pass keeps lazy initialization out of the timing
    with torch.no_grad():
        detector.forward(detector.to_model_space(windows[0]))
    elapsed = 0.0
    with torch.no_grad():
        for window in windows:
            start = time.perf_counter()
            detector.forward(detector.to_model_space(window))
            elapsed += time.perf_counter() - start
    mean_ms = 1000.0 * elapsed / windows.shape[0]
    logger.info(f"{detector.model_id} mean inference {mean_ms:.3f} ms over {windows.shape[0]} windows")
    return mean_ms
