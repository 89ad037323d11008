"""Detector networks, the Detector wrapper and checkpoints."""

from lcdr.nn.architectures import build_network
from lcdr.nn.checkpoint import load_checkpoint, save_checkpoint
from lcdr.nn.detector import Detector

__all__ = ["build_network", "Detector", "load_checkpoint", "save_checkpoint"]
