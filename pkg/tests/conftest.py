"""Pytest fixtures for the LCDR lab tests.

These fixtures build real components on small instances.
No mocking - tests run the actual synthesis, relay, training and attack code.
"""

import numpy as np
import pytest
import torch

from lcdr.core.config import Settings
from lcdr.models import (
    Architecture,
    FaultParams,
    FaultType,
    FdiaParams,
    GenerationConfig,
    ProtectionConfig,
    RelaySettings,
    ScenarioKind,
    ScenarioSpec,
    SystemModel,
    TrainConfig,
    WindowSpec,
)
from lcdr.nn.detector import Detector
from lcdr.services.dataset_service import DatasetService
from lcdr.services.relay_service import RelayContext
from lcdr.services.training_service import TrainingService

torch.set_default_dtype(torch.float64)


@pytest.fixture(scope="session")
def lcdr_settings() -> Settings:
    """Process settings with defaults (no .env lookups affect tests)."""
    return Settings(_env_file=None)


@pytest.fixture(scope="session")
def system() -> SystemModel:
    return SystemModel()


@pytest.fixture(scope="session")
def window_spec() -> WindowSpec:
    return WindowSpec()


@pytest.fixture(scope="session")
def relay_settings() -> RelaySettings:
    """Relay settings 0.05 kA, 0.585 kA, 0.2, 0.4."""
    return RelaySettings()


@pytest.fixture(scope="session")
def relay_ctx(window_spec: WindowSpec) -> RelayContext:
    return RelayContext(protection=ProtectionConfig(), window=window_spec)


@pytest.fixture
def normal_spec() -> ScenarioSpec:
    return ScenarioSpec(kind=ScenarioKind.NORMAL, load_pu=1.0, seed=3)


@pytest.fixture
def bolted_abc_spec() -> ScenarioSpec:
    return ScenarioSpec(
        kind=ScenarioKind.FAULT,
        load_pu=1.0,
        fault=FaultParams(fault_type=FaultType.ABC, location_frac=0.5, impedance_ohm=0.0, inception_angle_ms=0),
        seed=5,
    )


@pytest.fixture
def reversal_fdia_spec() -> ScenarioSpec:
    """Remote current reversed (alpha = -1) from the trigger index."""
    return ScenarioSpec(
        kind=ScenarioKind.FDIA,
        load_pu=1.0,
        fdia=FdiaParams.from_alpha(-1.0 + 0j, onset_index=33),
        seed=9,
    )


@pytest.fixture(scope="session")
def small_generation() -> GenerationConfig:
    """A reduced grid: 11 types x 2 impedances x 2 locations x 2 angles x 1 load = 88 faults, 88 FDIAs."""
    return GenerationConfig(
        fault_impedances_ohm=[0.0, 100.0],
        fault_locations=[0.1, 0.9],
        inception_angles_ms=[0, 8],
        fault_loads_pu=[1.0],
        fdia_alpha_draws=44,
        fdia_onsets=[33, 37],
        fdia_loads_pu=[1.0],
    )


@pytest.fixture(scope="session")
def dataset_service(system: SystemModel, window_spec: WindowSpec) -> DatasetService:
    return DatasetService(system=system, window=window_spec, protection=ProtectionConfig())


@pytest.fixture(scope="session")
def small_dataset(dataset_service: DatasetService, small_generation: GenerationConfig):
    """Generated once per session, 176 windows."""
    return dataset_service.generate_dataset(small_generation, seed=11)


@pytest.fixture(scope="session")
def small_split(dataset_service: DatasetService, small_dataset):
    return dataset_service.split(small_dataset, test_fraction=0.25, seed=11)


@pytest.fixture(scope="session")
def small_scaler(dataset_service: DatasetService, small_split):
    train, _ = small_split
    return dataset_service.fit_scaler(train)


@pytest.fixture(scope="session")
def trained_mlp(small_split, small_scaler) -> Detector:
    """MLP trained on the small split; session scoped, tests must not train it further."""
    train, _ = small_split
    detector = Detector.build(Architecture.MLP, small_scaler, seed=1)
    return TrainingService().train(detector, train, TrainConfig(epochs=40, batch_size=16, seed=1))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)
