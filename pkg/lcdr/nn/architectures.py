"""Classifier architectures. Every network maps (B, C, T) to one logit per window."""

import torch
import torch.nn as nn
import torch.nn.functional as F

from lcdr.models import Architecture


class MLP(nn.Module):
    def __init__(self, in_features: int, hidden: tuple[int, ...] = (128, 64)):
        super().__init__()
        layers: list[nn.Module] = [nn.Flatten()]
        width = in_features
        for size in hidden:
            layers += [nn.Linear(width, size), nn.ReLU()]
            width = size
        self.body = nn.Sequential(*layers)
        self.head = nn.Linear(width, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.body(x)).squeeze(-1)


class CNN(nn.Module):
    """Two convolution stages, global average pooling, dense head."""

    def __init__(self, in_channels: int = 6):
        super().__init__()
        self.conv1 = nn.Conv1d(in_channels, 16, kernel_size=5)
        self.pool = nn.MaxPool1d(2)
        self.conv2 = nn.Conv1d(16, 32, kernel_size=5)
        self.head = nn.Linear(32, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.pool(F.relu(self.conv1(x)))
        x = F.relu(self.conv2(x))
        return self.head(x.mean(dim=-1)).squeeze(-1)


class LSTM(nn.Module):
    """Single-layer LSTM over time; the last hidden state feeds the head."""

    def __init__(self, in_channels: int = 6, hidden_size: int = 32):
        super().__init__()
        self.lstm = nn.LSTM(input_size=in_channels, hidden_size=hidden_size, batch_first=True)
        self.head = nn.Linear(hidden_size, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _, (h_n, _) = self.lstm(x.transpose(1, 2))
        return self.head(h_n[-1]).squeeze(-1)


class ResidualBlock(nn.Module):
    """relu(x + conv(relu(conv(x)))) with length-preserving convolutions."""

    def __init__(self, channels: int, kernel_size: int = 5):
        super().__init__()
        padding = kernel_size // 2
        self.conv1 = nn.Conv1d(channels, channels, kernel_size, padding=padding)
        self.conv2 = nn.Conv1d(channels, channels, kernel_size, padding=padding)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.relu(x + self.conv2(F.relu(self.conv1(x))))


class ResNet(nn.Module):
    def __init__(self, in_channels: int = 6, width: int = 16, blocks: int = 2, kernel_size: int = 5):
        super().__init__()
        self.stem = nn.Conv1d(in_channels, width, kernel_size, padding=kernel_size // 2)
        self.blocks = nn.Sequential(*[ResidualBlock(width, kernel_size) for _ in range(blocks)])
        self.head = nn.Linear(width, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.blocks(F.relu(self.stem(x)))
        return self.head(x.mean(dim=-1)).squeeze(-1)


def build_network(architecture: Architecture, channels: int = 6, length: int = 66) -> nn.Module:
    """Instantiate an untrained network with torch's default fan-in initialization."""
    architecture = Architecture(architecture)
    if architecture == Architecture.MLP:
        return MLP(channels * length)
    if architecture == Architecture.CNN:
        return CNN(channels)
    if architecture == Architecture.LSTM:
        return LSTM(channels)
    return ResNet(channels)
