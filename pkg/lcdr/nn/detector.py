"""FDIA detector: a network plus the scaler that maps physical windows to model space."""

from __future__ import annotations

import logging

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from lcdr.errors import NumericError, ShapeError
from lcdr.models import Architecture, MeasurementWindow, Scaler
from lcdr.nn.architectures import build_network

logger = logging.getLogger(__name__)

PROBABILITY_CLAMP = 1e-7
DECISION_THRESHOLD = 0.5


def bce_loss(prob, y):
    """Binary cross-entropy on probabilities clamped to [1e-7, 1 - 1e-7]."""
    prob = torch.as_tensor(prob, dtype=torch.float64).clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
    y = torch.as_tensor(y, dtype=prob.dtype)
    return -(y * torch.log(prob) + (1.0 - y) * torch.log1p(-prob))


def logit_bce(logits: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy computed from logits: y*softplus(-z) + (1-y)*softplus(z).

    Equal to ``bce_loss(sigmoid(z), y)`` wherever the probability lies inside
    the clamp, and keeps a non-zero gradient when the sigmoid saturates.
    """
    y = y.to(logits.dtype)
    return y * F.softplus(-logits) + (1.0 - y) * F.softplus(logits)


def first_non_finite_layer(module: nn.Module, x: torch.Tensor) -> str | None:
    """Name of the first leaf layer whose output contains NaN or inf, if any."""
    found: list[str] = []
    handles = []

    def flatten(output):
        if isinstance(output, torch.Tensor):
            return [output]
        if isinstance(output, (tuple, list)):
            return [t for item in output for t in flatten(item)]
        return []

    def hook(name):
        def check(_, __, output):
            if not found and any(not torch.isfinite(t).all() for t in flatten(output)):
                found.append(name)

        return check

    for name, child in module.named_modules():
        if name and not list(child.children()):
            handles.append(child.register_forward_hook(hook(name)))
    try:
        with torch.no_grad():
            module(x)
    finally:
        for handle in handles:
            handle.remove()
    if found:
        return found[0]
    if not torch.isfinite(x).all():
        return "input"
    return None


class Detector:
    """Architecture, parameters and scaler of one FDIA detector.

    ``forward`` takes model-space tensors of shape (6, T) or (B, 6, T) and
    returns FDIA probabilities. A window is classified as FDIA (1) when its
    probability is at least 0.5.
    """

    def __init__(
        self,
        architecture: Architecture,
        network: nn.Module,
        scaler: Scaler,
        channels: int = 6,
        length: int = 66,
    ):
        self.architecture = Architecture(architecture)
        self.network = network
        self.scaler = scaler
        self.channels = channels
        self.length = length
        self.dtype = next(network.parameters()).dtype
        self.history: list = []

    @classmethod
    def build(
        cls,
        architecture: Architecture,
        scaler: Scaler,
        seed: int = 0,
        channels: int = 6,
        length: int = 66,
        dtype: torch.dtype = torch.float64,
    ) -> Detector:
        """Fresh detector with parameters drawn after ``torch.manual_seed(seed)``."""
        torch.manual_seed(seed)
        network = build_network(architecture, channels, length).to(dtype)
        return cls(architecture, network, scaler, channels, length)

    @property
    def model_id(self) -> str:
        return self.architecture.value

    def _batch(self, x: torch.Tensor) -> tuple[torch.Tensor, bool]:
        x = torch.as_tensor(x, dtype=self.dtype)
        single = x.dim() == 2
        if single:
            x = x.unsqueeze(0)
        if x.dim() != 3 or tuple(x.shape[1:]) != (self.channels, self.length):
            raise ShapeError(
                f"{self.model_id} expects input ({self.channels}, {self.length}), got {tuple(x.shape)}"
            )
        return x, single

    def logits(self, x: torch.Tensor) -> torch.Tensor:
        x, single = self._batch(x)
        z = self.network(x)
        return z[0] if single else z

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """FDIA probability for one window or a batch."""
        return torch.sigmoid(self.logits(x))

    __call__ = forward

    def to_model_space(self, samples: np.ndarray | MeasurementWindow) -> torch.Tensor:
        """Scale physical samples (6, T) or (N, 6, T) into a model-space tensor."""
        if isinstance(samples, MeasurementWindow):
            samples = samples.samples
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim == 2:
            return torch.as_tensor(self.scaler.transform(samples), dtype=self.dtype)
        scaled = (samples - self.scaler.mean[None, :, None]) / self.scaler.std[None, :, None]
        return torch.as_tensor(scaled, dtype=self.dtype)

    def to_physical(self, x: torch.Tensor) -> np.ndarray:
        return self.scaler.inverse_transform(x.detach().cpu().numpy().astype(np.float64))

    def probabilities(self, x: torch.Tensor, batch_size: int = 512) -> np.ndarray:
        """Probabilities for a model-space batch, evaluated without gradient tracking."""
        self.network.eval()
        x, _ = self._batch(x)
        out = []
        with torch.no_grad():
            for start in range(0, x.shape[0], batch_size):
                out.append(torch.sigmoid(self.network(x[start:start + batch_size])))
        if not out:
            return np.zeros(0)
        probabilities = torch.cat(out).cpu().numpy().astype(np.float64)
        if not np.all(np.isfinite(probabilities)):
            layer = first_non_finite_layer(self.network, x)
            raise NumericError(f"{self.model_id} produced non-finite output at layer {layer!r}")
        return probabilities

    def predict(self, x: torch.Tensor) -> np.ndarray:
        """0/1 labels (1 = FDIA) for a model-space batch."""
        return (self.probabilities(x) >= DECISION_THRESHOLD).astype(np.int64)

    def predict_one(self, x: torch.Tensor) -> int:
        return int(self.predict(x)[0])

    def loss_and_input_gradient(self, x: torch.Tensor, y: int | torch.Tensor) -> tuple[float, torch.Tensor]:
        """Loss and its gradient with respect to the model-space input."""
        self.network.eval()
        x = torch.as_tensor(x, dtype=self.dtype).detach().clone().requires_grad_(True)
        z = self.logits(x)
        target = torch.as_tensor(y, dtype=self.dtype).expand_as(z)
        loss = logit_bce(z, target).sum()
        (grad,) = torch.autograd.grad(loss, x)
        if not torch.isfinite(grad).all() or not torch.isfinite(loss):
            layer = first_non_finite_layer(self.network, x.detach() if x.dim() == 3 else x.detach()[None])
            raise NumericError(f"non-finite input gradient in {self.model_id} (layer {layer!r})")
        return float(loss.detach()), grad.detach()

    def backward(self, x: torch.Tensor, y: int | torch.Tensor) -> tuple[dict[str, torch.Tensor], torch.Tensor]:
        """Gradients of the loss with respect to every parameter and the input."""
        self.network.eval()
        x = torch.as_tensor(x, dtype=self.dtype).detach().clone().requires_grad_(True)
        z = self.logits(x)
        target = torch.as_tensor(y, dtype=self.dtype).expand_as(z)
        loss = logit_bce(z, target).sum()
        names, params = zip(*self.network.named_parameters())
        grads = torch.autograd.grad(loss, [*params, x])
        for name, g in zip((*names, "input"), grads):
            if not torch.isfinite(g).all():
                layer = first_non_finite_layer(self.network, x.detach() if x.dim() == 3 else x.detach()[None])
                raise NumericError(f"non-finite gradient for {name} in {self.model_id} (layer {layer!r})")
        return dict(zip(names, (g.detach() for g in grads[:-1]))), grads[-1].detach()

    def copy(self) -> Detector:
        network = build_network(self.architecture, self.channels, self.length).to(self.dtype)
        network.load_state_dict(self.network.state_dict())
        clone = Detector(self.architecture, network, self.scaler, self.channels, self.length)
        clone.history = list(self.history)
        return clone
