"""Line current differential relay: phasor estimation, dual-slope characteristic, trip logic."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from lcdr.errors import InsufficientDataError, ParameterError, ShapeError
from lcdr.models import MeasurementWindow, PhasorSet, ProtectionConfig, RelaySettings, TripDecision, WindowSpec

logger = logging.getLogger(__name__)


def estimator_length(samples_per_cycle: float) -> int:
    """Number of samples in one estimation window (one cycle, rounded)."""
    return max(3, int(round(samples_per_cycle)))


def first_evaluated_index(samples_per_cycle: float) -> int:
    return int(math.ceil(samples_per_cycle - 1e-9))


def _estimator(samples_per_cycle: float) -> tuple[np.ndarray, np.ndarray]:
    """Pseudo-inverse of the one-cycle {cos, sin, 1} basis and the basis phase per sample."""
    m = estimator_length(samples_per_cycle)
    phase = 2.0 * math.pi * np.arange(m) / samples_per_cycle
    basis = np.column_stack([math.sqrt(2.0) * np.cos(phase), -math.sqrt(2.0) * np.sin(phase), np.ones(m)])
    return np.linalg.pinv(basis), phase


def estimate_phasors(samples: np.ndarray, samples_per_cycle: float) -> tuple[np.ndarray, np.ndarray]:
    """Sliding fundamental phasors (kA RMS) for every channel.

    Each estimate is a least-squares fit of a fundamental sinusoid plus a
    constant to the one-cycle block of samples ending at the evaluated index.
    With an integer number of samples per cycle this is the full-cycle DFT.
    Phasors share the absolute time reference of sample 0, so a steady
    sinusoid gives the same phasor at every index.

    Args:
        samples: Array of shape (C, T).
        samples_per_cycle: Sample rate over base frequency.

    Returns:
        (indices, phasors) with phasors of shape (C, len(indices)).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ShapeError(f"expected (channels, samples), got shape {samples.shape}")
    m = estimator_length(samples_per_cycle)
    first = first_evaluated_index(samples_per_cycle)
    length = samples.shape[1]
    if length <= first:
        raise InsufficientDataError(
            f"{length} samples hold no index with a full cycle ({samples_per_cycle:.2f} samples) before it"
        )
    pinv, _ = _estimator(samples_per_cycle)
    blocks = sliding_window_view(samples, m, axis=1)[:, first - m + 1:]
    coefficients = blocks @ pinv.T
    indices = np.arange(first, length)
    starts = indices - m + 1
    rotation = np.exp(-2j * math.pi * starts / samples_per_cycle)
    phasors = (coefficients[..., 0] + 1j * coefficients[..., 1]) * rotation[None, :]
    return indices, phasors


def estimate_phasor(channel, end_index: int, samples_per_cycle: float) -> complex:
    """Fundamental phasor (kA RMS) of one channel over the cycle ending at ``end_index``."""
    channel = np.asarray(channel, dtype=np.float64).reshape(-1)
    if end_index >= channel.shape[0] or end_index < 0:
        raise ParameterError(f"end index {end_index} outside channel of {channel.shape[0]} samples")
    if end_index < first_evaluated_index(samples_per_cycle):
        raise InsufficientDataError(
            f"end index {end_index} leaves less than one cycle ({samples_per_cycle:.2f} samples) of history"
        )
    m = estimator_length(samples_per_cycle)
    pinv, _ = _estimator(samples_per_cycle)
    start = end_index - m + 1
    real, imag, _ = pinv @ channel[start:end_index + 1]
    return complex((real + 1j * imag) * np.exp(-2j * math.pi * start / samples_per_cycle))


def differential_currents(i1: PhasorSet, i2: PhasorSet) -> tuple[np.ndarray, np.ndarray]:
    """Per-phase differential (complex kA) and restraining (kA) currents."""
    return i1.phasors + i2.phasors, np.abs(i1.phasors) + np.abs(i2.phasors)


def operating_current(i_r, settings: RelaySettings):
    """Dual-slope operating current for restraining current ``i_r`` (scalar or array)."""
    values = np.asarray(i_r, dtype=np.float64)
    if np.any(values < 0):
        raise ParameterError("restraining current must be non-negative")
    lower = settings.i_d0 + settings.m1 * values
    upper = settings.i_d0 + settings.m1 * settings.i_b + settings.m2 * (values - settings.i_b)
    result = np.where(values <= settings.i_b, lower, upper)
    return float(result) if result.ndim == 0 else result


def trip_check(window: MeasurementWindow, settings: RelaySettings, pickup_count: int = 4) -> TripDecision:
    """Evaluate the differential element on every index with a full cycle of history.

    A phase operates where |i_d| >= i_op. The relay trips when any phase
    operates on ``pickup_count`` consecutive indices; ``trip_index`` is the
    index completing the first such run.
    """
    if not isinstance(window, MeasurementWindow):
        raise ShapeError(f"trip_check needs a MeasurementWindow, got {type(window).__name__}")
    if pickup_count < 1:
        raise ParameterError("pickup_count must be at least 1")
    indices, phasors = estimate_phasors(window.samples, window.samples_per_cycle)
    local, remote = phasors[:3], phasors[3:]
    i_d = np.abs(local + remote)
    i_r = np.abs(local) + np.abs(remote)
    i_op = operating_current(i_r, settings)

    operating = i_d >= i_op
    trip_index = None
    if operating.shape[1] >= pickup_count:
        runs = sliding_window_view(operating, pickup_count, axis=1).all(axis=-1).any(axis=0)
        if runs.any():
            trip_index = int(indices[int(np.argmax(runs)) + pickup_count - 1])
    return TripDecision(
        tripped=trip_index is not None,
        trip_index=trip_index,
        indices=indices,
        i_d=i_d,
        i_r=i_r,
        i_op=i_op,
    )


@dataclass(frozen=True)
class RelayContext:
    """Relay settings and window timing handed to attack and defense callers."""

    protection: ProtectionConfig = field(default_factory=ProtectionConfig)
    window: WindowSpec = field(default_factory=WindowSpec)

    @property
    def settings(self) -> RelaySettings:
        return self.protection.settings

    @property
    def pickup_count(self) -> int:
        return self.protection.pickup_count

    def trips(self, window: MeasurementWindow) -> bool:
        return trip_check(window, self.settings, self.pickup_count).tripped

    def wrap(self, samples: np.ndarray) -> MeasurementWindow:
        """Physical samples (6, T) as a window with this context's timing."""
        return MeasurementWindow(
            samples=samples,
            sample_rate_hz=self.window.sample_rate_hz,
            base_frequency_hz=self.window.base_frequency_hz,
            trigger_index=self.window.trigger_index,
        )
