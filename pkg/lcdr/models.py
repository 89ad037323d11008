"""Domain models for the LCDR lab.

Configuration, scenario and report models are pydantic models so they
validate on construction and serialize to JSON. Array carriers (windows,
phasors, trip traces) are frozen dataclasses around numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Literal

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from lcdr.errors import NumericError, ParameterError, ShapeError

CHANNELS = ["local_a", "local_b", "local_c", "remote_a", "remote_b", "remote_c"]
REMOTE_MASK = (False, False, False, True, True, True)
LABEL_FAULT = 0
LABEL_FDIA = 1


class ScenarioKind(str, Enum):
    NORMAL = "normal"
    FAULT = "fault"
    FDIA = "fdia"


class FaultType(str, Enum):
    AG = "AG"
    BG = "BG"
    CG = "CG"
    AB = "AB"
    BC = "BC"
    CA = "CA"
    ABG = "ABG"
    BCG = "BCG"
    CAG = "CAG"
    ABC = "ABC"
    ABCG = "ABCG"

    @property
    def phases(self) -> tuple[int, ...]:
        """Indices of the faulted phases (A=0, B=1, C=2)."""
        return tuple("ABC".index(p) for p in self.value.rstrip("G"))

    @property
    def grounded(self) -> bool:
        return self.value.endswith("G")


class Architecture(str, Enum):
    MLP = "mlp"
    CNN = "cnn"
    LSTM = "lstm"
    RESNET = "resnet"


class OptimizerName(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


# ---------------------------------------------------------------------------
# System, window and relay configuration
# ---------------------------------------------------------------------------


class WindowSpec(BaseModel):
    """Sampling layout of a measurement window."""

    sample_rate_hz: float = Field(1000.0, gt=0)
    base_frequency_hz: float = Field(60.0, gt=0)
    cycles: int = Field(4, ge=2, description="Window length in power cycles")
    pre_event_cycles: int = Field(2, ge=1, description="Cycles recorded before the event")

    @model_validator(mode="after")
    def _check_cycles(self) -> "WindowSpec":
        if self.pre_event_cycles >= self.cycles:
            raise ValueError("pre_event_cycles must be smaller than cycles")
        return self

    @property
    def samples_per_cycle(self) -> float:
        return self.sample_rate_hz / self.base_frequency_hz

    @property
    def length(self) -> int:
        return int(math.floor(self.cycles * self.samples_per_cycle + 1e-9))

    @property
    def trigger_index(self) -> int:
        return int(math.floor(self.pre_event_cycles * self.samples_per_cycle + 1e-9))

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.base_frequency_hz


class SystemModel(BaseModel):
    """Analytic two-source line model feeding the waveform synthesizer."""

    nominal_load_current_ka: float = Field(0.3, gt=0, description="kA RMS at 1.0 pu load")
    nominal_voltage_kv: float = Field(69.0, gt=0, description="Line-to-line kV RMS")
    load_power_factor: float = Field(0.95, gt=0, le=1.0)
    source_resistance_ohm: float = Field(0.5, gt=0)
    source_reactance_ohm: float = Field(4.0, gt=0)
    line_resistance_ohm: float = Field(1.0, gt=0)
    line_reactance_ohm: float = Field(3.0, gt=0)
    fcl_limit_pu: float = Field(1.5, ge=1.0)
    dc_decay_time_constant_s: float = Field(0.02, gt=0)

    @property
    def source_impedance(self) -> complex:
        return complex(self.source_resistance_ohm, self.source_reactance_ohm)

    @property
    def line_impedance(self) -> complex:
        return complex(self.line_resistance_ohm, self.line_reactance_ohm)

    @property
    def phase_voltage_kv(self) -> float:
        return self.nominal_voltage_kv / math.sqrt(3.0)

    @property
    def fault_current_cap_ka(self) -> float:
        return self.fcl_limit_pu * self.nominal_load_current_ka


class RelaySettings(BaseModel):
    """Dual-slope operating characteristic constants (kA RMS)."""

    i_d0: float = Field(0.05, gt=0)
    i_b: float = Field(0.585, gt=0)
    m1: float = Field(0.2, gt=0)
    m2: float = Field(0.4, gt=0)

    @model_validator(mode="after")
    def _check_slopes(self) -> "RelaySettings":
        if not self.m1 < self.m2:
            raise ValueError("slopes must satisfy 0 < m1 < m2")
        return self


class ProtectionConfig(BaseModel):
    settings: RelaySettings = Field(default_factory=RelaySettings)
    pickup_count: int = Field(4, ge=1, description="Consecutive evaluations required to trip")


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


class FaultParams(BaseModel):
    fault_type: FaultType
    location_frac: float = Field(..., ge=0.1, le=0.9)
    impedance_ohm: float = Field(..., ge=0.0, le=100.0)
    inception_angle_ms: int = Field(..., ge=0, le=15)


class FdiaParams(BaseModel):
    alpha_magnitude: float = Field(..., ge=0.0, le=5.0)
    alpha_angle_rad: float = Field(..., gt=-math.pi, le=math.pi)
    onset_index: int = Field(..., ge=0)

    @property
    def alpha(self) -> complex:
        return complex(np.exp(1j * self.alpha_angle_rad)) * self.alpha_magnitude

    @classmethod
    def from_alpha(cls, alpha: complex, onset_index: int) -> "FdiaParams":
        angle = float(np.angle(alpha))
        if angle <= -math.pi:
            angle = math.pi
        return cls(alpha_magnitude=float(abs(alpha)), alpha_angle_rad=angle, onset_index=onset_index)


class ScenarioSpec(BaseModel):
    """One synthesizable event: normal load, an internal fault or an FDIA."""

    kind: ScenarioKind
    load_pu: float = Field(1.0, ge=0.2, le=1.0)
    fault: FaultParams | None = None
    fdia: FdiaParams | None = None
    snr_db: float | None = Field(None, ge=35.0, le=60.0, description="None disables noise")
    wave_phase_rad: float = Field(
        0.0, ge=-math.pi, le=math.pi,
        description="Phase-A voltage angle at the trigger instant (normal/FDIA windows)",
    )
    seed: int = 0

    @model_validator(mode="after")
    def _check_groups(self) -> "ScenarioSpec":
        if self.kind == ScenarioKind.FAULT and (self.fault is None or self.fdia is not None):
            raise ValueError("fault scenarios need fault parameters only")
        if self.kind == ScenarioKind.FDIA and (self.fdia is None or self.fault is not None):
            raise ValueError("fdia scenarios need fdia parameters only")
        if self.kind == ScenarioKind.NORMAL and (self.fault is not None or self.fdia is not None):
            raise ValueError("normal scenarios carry no fault or fdia parameters")
        return self

    def as_normal(self) -> "ScenarioSpec":
        """The pre-event (normal load) counterpart of this scenario."""
        return self.model_copy(update={"kind": ScenarioKind.NORMAL, "fault": None, "fdia": None})


# ---------------------------------------------------------------------------
# Generation, training, attack and defense configuration
# ---------------------------------------------------------------------------


class GenerationConfig(BaseModel):
    fault_types: list[FaultType] = Field(default_factory=lambda: list(FaultType))
    fault_impedances_ohm: list[float] = Field(default_factory=lambda: [0.0, 25.0, 50.0, 75.0, 100.0])
    fault_locations: list[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    inception_angles_ms: list[int] = Field(default_factory=lambda: [0, 4, 8, 12])
    fault_loads_pu: list[float] = Field(default_factory=lambda: [0.5, 1.0])
    fdia_alpha_draws: int = Field(500, ge=1)
    fdia_onsets: list[int] = Field(default_factory=lambda: [33, 37])
    fdia_loads_pu: list[float] = Field(default_factory=lambda: [0.5, 1.0])
    snr_db_range: tuple[float, float] | None = (35.0, 60.0)
    workers: int = Field(1, ge=1)

    @field_validator(
        "fault_types", "fault_impedances_ohm", "fault_locations", "inception_angles_ms",
        "fault_loads_pu", "fdia_onsets", "fdia_loads_pu",
    )
    @classmethod
    def _non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("every grid needs at least one value")
        return value

    @field_validator("fault_impedances_ohm")
    @classmethod
    def _impedance_range(cls, value: list[float]) -> list[float]:
        if any(not 0.0 <= z <= 100.0 for z in value):
            raise ValueError("fault impedances must lie in [0, 100] ohm")
        return value

    @field_validator("fault_locations")
    @classmethod
    def _location_range(cls, value: list[float]) -> list[float]:
        if any(not 0.1 <= f <= 0.9 for f in value):
            raise ValueError("fault locations must lie in [0.1, 0.9]")
        return value

    @field_validator("inception_angles_ms")
    @classmethod
    def _angle_range(cls, value: list[int]) -> list[int]:
        if any(not 0 <= a <= 15 for a in value):
            raise ValueError("inception angles must lie in 0..15 ms")
        return value

    @field_validator("fault_loads_pu", "fdia_loads_pu")
    @classmethod
    def _load_range(cls, value: list[float]) -> list[float]:
        if any(not 0.2 <= p <= 1.0 for p in value):
            raise ValueError("loads must lie in [0.2, 1.0] pu")
        return value

    @field_validator("snr_db_range")
    @classmethod
    def _snr_range(cls, value: tuple[float, float] | None) -> tuple[float, float] | None:
        if value is not None and not 35.0 <= value[0] <= value[1] <= 60.0:
            raise ValueError("snr range must satisfy 35 <= low <= high <= 60 dB")
        return value

    @property
    def fault_count(self) -> int:
        return (
            len(self.fault_types) * len(self.fault_impedances_ohm) * len(self.fault_locations)
            * len(self.inception_angles_ms) * len(self.fault_loads_pu)
        )

    @property
    def fdia_count(self) -> int:
        return self.fdia_alpha_draws * len(self.fdia_onsets) * len(self.fdia_loads_pu)


class SplitConfig(BaseModel):
    test_fraction: float = Field(0.2, gt=0.0, lt=1.0)


class TrainConfig(BaseModel):
    epochs: int = Field(30, ge=0)
    batch_size: int = Field(32, gt=0)
    learning_rate: float = Field(1e-3, gt=0)
    optimizer: OptimizerName = OptimizerName.ADAM
    seed: int = 0


class AttackConfig(BaseModel):
    epsilon: float = Field(0.5, ge=0.0)
    max_iterations: int = Field(5, ge=1)
    target_label: Literal[0] = LABEL_FAULT
    channel_mask: tuple[bool, bool, bool, bool, bool, bool] = REMOTE_MASK
    clip_scope: Literal["sample", "channel"] = "sample"

    @field_validator("channel_mask")
    @classmethod
    def _remote_only(cls, value: tuple[bool, ...]) -> tuple[bool, ...]:
        if tuple(value) != REMOTE_MASK:
            raise ValueError("only the remote rows (3-5) may be perturbed")
        return value


class DefenseConfig(BaseModel):
    retrain_epochs: int = Field(10, ge=1)
    rounds: int | None = Field(
        None, ge=1,
        description="Crafting rounds; adversarial samples are regenerated against the current model before each. "
        "Defaults to one round per retraining epoch",
    )
    epsilons: list[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5])
    attack: AttackConfig = Field(default_factory=AttackConfig)

    @field_validator("epsilons")
    @classmethod
    def _epsilons(cls, value: list[float]) -> list[float]:
        if not value or any(e < 0 for e in value):
            raise ValueError("defense needs at least one non-negative epsilon")
        return value

    @model_validator(mode="after")
    def _check_rounds(self) -> "DefenseConfig":
        if self.rounds is not None and self.rounds > self.retrain_epochs:
            raise ValueError("every crafting round needs at least one retraining epoch")
        return self

    @property
    def round_count(self) -> int:
        return self.rounds or self.retrain_epochs


class SweepConfig(BaseModel):
    epsilons: list[float] = Field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    iterations: list[int] = Field(default_factory=lambda: [5, 50])


class ExperimentConfig(BaseModel):
    """Complete experiment description, loaded from a JSON file."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 7
    output_dir: Path = Path("runs/desk")
    system: SystemModel = Field(default_factory=SystemModel)
    window: WindowSpec = Field(default_factory=WindowSpec)
    relay: ProtectionConfig = Field(default_factory=ProtectionConfig)
    generation: GenerationConfig = Field(default_factory=GenerationConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    attack: AttackConfig = Field(default_factory=AttackConfig)
    defense: DefenseConfig = Field(default_factory=DefenseConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)

    @model_validator(mode="after")
    def _check_onsets(self) -> "ExperimentConfig":
        spc = self.window.samples_per_cycle
        latest = self.window.length - int(round(spc)) - self.relay.pickup_count
        for onset in self.generation.fdia_onsets:
            if not 0 <= onset <= latest:
                raise ValueError(
                    f"fdia onset {onset} leaves less than one cycle plus pickup before the window end"
                )
        return self


# ---------------------------------------------------------------------------
# Records and reports
# ---------------------------------------------------------------------------


class AttackRecord(BaseModel):
    index: int
    success: bool
    fooled_model: bool
    relay_tripped: bool
    iterations_used: int
    epsilon: float
    max_iterations: int
    perturbation_inf_norm_ka: float = 0.0


class SampleProvenance(BaseModel):
    origin: Literal["generated", "adversarial", "augmented"] = "generated"
    scenario: ScenarioSpec | None = None
    source_index: int | None = None
    attack: AttackRecord | None = None


class DatasetManifest(BaseModel):
    format_version: int = 1
    channels: list[str] = Field(default_factory=lambda: list(CHANNELS))
    sample_rate_hz: float = 1000.0
    base_frequency_hz: float = 60.0
    cycles: int = 4
    pre_event_cycles: int = 2
    length: int = 66
    trigger_index: int = 33
    count: int = 0
    class_counts: dict[str, int] = Field(default_factory=lambda: {"fault": 0, "fdia": 0})
    generator_seed: int | None = None
    description: str = ""
    provenance: list[SampleProvenance] = Field(default_factory=list)


class ReportMetadata(BaseModel):
    model_id: str = ""
    dataset_id: str = ""
    epsilon: float | None = None
    iterations: int | None = None


class MetricsReport(BaseModel):
    """Confusion counts and derived metrics, FDIA = positive class."""

    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    fault_recall: float | None = None
    fooling_rate: float | None = Field(None, ge=0.0, le=1.0)
    metadata: ReportMetadata = Field(default_factory=ReportMetadata)

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


class EpochStats(BaseModel):
    epoch: int
    loss: float
    accuracy: float


class AttackSummary(BaseModel):
    architecture: str
    epsilon: float
    max_iterations: int
    n_fdias: int
    successes: int
    fooling_rate_pct: float
    records: list[AttackRecord] = Field(default_factory=list)


class SweepRow(BaseModel):
    model: str
    epsilon: float
    iterations: int
    n_fdias: int
    successes: int
    fooling_rate_pct: float


class DefenseReport(BaseModel):
    architecture: str
    attempted: int
    augmented: int
    successes_per_epsilon: dict[str, int]
    pre_clean: MetricsReport
    pre_adversarial: MetricsReport
    post_clean: MetricsReport
    post_replayed: MetricsReport
    post_adaptive: MetricsReport


class ProtectionDecision(BaseModel):
    """Outcome of the relay plus detector for one event."""

    fault_detected: bool = Field(..., description="Differential element tripped")
    fdia_alarm: bool = Field(False, description="Detector flagged the event as an FDIA; trip blocked")
    trip_command: bool = Field(False, description="Breaker trip issued")
    probability: float | None = Field(None, description="Detector FDIA probability, absent when not consulted")
    trip_index: int | None = None

    @model_validator(mode="after")
    def _consistent(self) -> ProtectionDecision:
        if not self.fault_detected and (self.fdia_alarm or self.trip_command):
            raise ValueError("no alarm or trip without a detected fault")
        if self.fault_detected and self.fdia_alarm == self.trip_command:
            raise ValueError("a detected fault yields exactly one of alarm or trip")
        return self


# ---------------------------------------------------------------------------
# Array carriers
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PhasorSet:
    """Per-phase RMS phasors (kA) for phases A, B, C."""

    phasors: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.phasors, dtype=np.complex128).reshape(-1)
        if values.shape != (3,):
            raise ShapeError(f"a phasor set holds 3 phases, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NumericError("phasor set contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "phasors", values)

    @classmethod
    def from_polar(cls, magnitudes, angles) -> "PhasorSet":
        magnitudes = np.asarray(magnitudes, dtype=np.float64)
        if np.any(magnitudes < 0):
            raise ParameterError("phasor magnitudes must be non-negative")
        return cls(magnitudes * np.exp(1j * np.asarray(angles, dtype=np.float64)))

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.phasors)

    @property
    def angles(self) -> np.ndarray:
        return np.angle(self.phasors)

    def __neg__(self) -> "PhasorSet":
        return PhasorSet(-self.phasors)

    def scaled(self, alpha: complex) -> "PhasorSet":
        return PhasorSet(self.phasors * alpha)


@dataclass(frozen=True, eq=False)
class MeasurementWindow:
    """6 x T instantaneous currents in kA: rows 0-2 local A/B/C, rows 3-5 remote A/B/C."""

    samples: np.ndarray
    sample_rate_hz: float = 1000.0
    base_frequency_hz: float = 60.0
    trigger_index: int = 33

    def __post_init__(self) -> None:
        values = np.array(self.samples, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != len(CHANNELS):
            raise ShapeError(f"expected a (6, T) window, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NumericError("window contains non-finite samples")
        if not 0 <= self.trigger_index < values.shape[1]:
            raise ShapeError(f"trigger index {self.trigger_index} outside window of {values.shape[1]}")
        values.setflags(write=False)
        object.__setattr__(self, "samples", values)

    @property
    def length(self) -> int:
        return self.samples.shape[1]

    @property
    def samples_per_cycle(self) -> float:
        return self.sample_rate_hz / self.base_frequency_hz

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.length) / self.sample_rate_hz

    @property
    def local(self) -> np.ndarray:
        return self.samples[:3]

    @property
    def remote(self) -> np.ndarray:
        return self.samples[3:]

    def with_samples(self, samples: np.ndarray) -> "MeasurementWindow":
        return replace(self, samples=samples)

    def to_storage_precision(self) -> "MeasurementWindow":
        """Round to the float32 precision datasets are stored with."""
        return self.with_samples(self.samples.astype("<f4").astype(np.float64))


@dataclass(frozen=True, eq=False)
class TripDecision:
    """Trip verdict plus the per-phase (i_d, i_r, i_op) trace in kA."""

    tripped: bool
    trip_index: int | None
    indices: np.ndarray
    i_d: np.ndarray
    i_r: np.ndarray
    i_op: np.ndarray

    def per_phase_trace(self, phase: int) -> list[tuple[float, float, float]]:
        return [
            (float(d), float(r), float(o))
            for d, r, o in zip(self.i_d[phase], self.i_r[phase], self.i_op[phase])
        ]

    def at(self, index: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(i_d, i_r, i_op) for all phases at one evaluated sample index."""
        position = int(np.searchsorted(self.indices, index))
        if position >= len(self.indices) or self.indices[position] != index:
            raise ParameterError(f"index {index} was not evaluated")
        return self.i_d[:, position], self.i_r[:, position], self.i_op[:, position]


@dataclass(frozen=True, eq=False)
class LabeledSample:
    window: MeasurementWindow
    label: int
    provenance: SampleProvenance = field(default_factory=SampleProvenance)

    def __post_init__(self) -> None:
        if self.label not in (LABEL_FAULT, LABEL_FDIA):
            raise ParameterError(f"label must be 0 (fault) or 1 (FDIA), got {self.label}")
        scenario = self.provenance.scenario
        if scenario is not None:
            expected = ScenarioKind.FDIA if self.label == LABEL_FDIA else ScenarioKind.FAULT
            if scenario.kind != expected:
                raise ParameterError(f"label {self.label} inconsistent with scenario kind {scenario.kind.value}")


@dataclass(eq=False)
class Dataset:
    samples: list[LabeledSample]
    manifest: DatasetManifest

    @classmethod
    def from_samples(
        cls,
        samples: list[LabeledSample],
        window: WindowSpec | None = None,
        generator_seed: int | None = None,
        description: str = "",
    ) -> "Dataset":
        window = window or WindowSpec()
        labels = [s.label for s in samples]
        manifest = DatasetManifest(
            sample_rate_hz=window.sample_rate_hz,
            base_frequency_hz=window.base_frequency_hz,
            cycles=window.cycles,
            pre_event_cycles=window.pre_event_cycles,
            length=window.length,
            trigger_index=window.trigger_index,
            count=len(samples),
            class_counts={"fault": labels.count(LABEL_FAULT), "fdia": labels.count(LABEL_FDIA)},
            generator_seed=generator_seed,
            description=description,
            provenance=[s.provenance for s in samples],
        )
        return cls(samples=list(samples), manifest=manifest)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def window_spec(self) -> WindowSpec:
        m = self.manifest
        return WindowSpec(
            sample_rate_hz=m.sample_rate_hz,
            base_frequency_hz=m.base_frequency_hz,
            cycles=m.cycles,
            pre_event_cycles=m.pre_event_cycles,
        )

    def windows(self) -> np.ndarray:
        """All windows stacked as an (N, 6, T) float64 array."""
        if not self.samples:
            return np.zeros((0, len(CHANNELS), self.manifest.length))
        return np.stack([s.window.samples for s in self.samples])

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def subset(self, indices, description: str | None = None) -> "Dataset":
        picked = [self.samples[int(i)] for i in indices]
        return Dataset.from_samples(
            picked, self.window_spec, self.manifest.generator_seed,
            self.manifest.description if description is None else description,
        )

    def concat(self, other: "Dataset", description: str | None = None) -> "Dataset":
        return Dataset.from_samples(
            self.samples + other.samples, self.window_spec, self.manifest.generator_seed,
            self.manifest.description if description is None else description,
        )


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-channel standardization fitted on training windows (kA)."""

    mean: np.ndarray
    std: np.ndarray

    def transform(self, samples: np.ndarray) -> np.ndarray:
        return (np.asarray(samples, dtype=np.float64) - self.mean[:, None]) / self.std[:, None]

    def inverse_transform(self, scaled: np.ndarray) -> np.ndarray:
        return np.asarray(scaled, dtype=np.float64) * self.std[:, None] + self.mean[:, None]

    def to_tensor(self, window: MeasurementWindow, dtype: torch.dtype = torch.float64) -> torch.Tensor:
        """Model-space tensor of shape (6, T)."""
        return torch.as_tensor(self.transform(window.samples), dtype=dtype)


@dataclass(frozen=True, eq=False)
class AttackOutcome:
    success: bool
    adversarial_window: MeasurementWindow
    iterations_used: int
    fooled_model: bool
    relay_tripped: bool
    perturbation_inf_norm_ka: float = 0.0

    def record(self, index: int, config: AttackConfig) -> AttackRecord:
        return AttackRecord(
            index=index,
            success=self.success,
            fooled_model=self.fooled_model,
            relay_tripped=self.relay_tripped,
            iterations_used=self.iterations_used,
            epsilon=config.epsilon,
            max_iterations=config.max_iterations,
            perturbation_inf_norm_ka=self.perturbation_inf_norm_ka,
        )
