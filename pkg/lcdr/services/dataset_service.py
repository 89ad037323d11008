"""Fault/FDIA corpus generation, stratified splitting and feature scaling."""

import itertools
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import torch
from sklearn.model_selection import train_test_split
from tqdm import tqdm

from lcdr.errors import GenerationError, InfeasibleError, ParameterError, ScalerError, StratificationError
from lcdr.models import (
    LABEL_FAULT,
    LABEL_FDIA,
    Dataset,
    FaultParams,
    FdiaParams,
    GenerationConfig,
    LabeledSample,
    MeasurementWindow,
    ProtectionConfig,
    SampleProvenance,
    Scaler,
    ScenarioKind,
    ScenarioSpec,
    SystemModel,
    WindowSpec,
)
from lcdr.services.relay_service import trip_check
from lcdr.services.waveform_service import WaveformService, inception_phase

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _Task:
    index: int
    kind: ScenarioKind
    load_pu: float
    fault: FaultParams | None = None
    onset_index: int | None = None


class DatasetService:
    """Builds labeled corpora whose every window trips the relay."""

    def __init__(
        self,
        system: SystemModel | None = None,
        window: WindowSpec | None = None,
        protection: ProtectionConfig | None = None,
    ):
        self.system = system or SystemModel()
        self.window = window or WindowSpec()
        self.protection = protection or ProtectionConfig()
        self.waveforms = WaveformService(self.system, self.window)

    def scenario_tasks(self, config: GenerationConfig) -> list[_Task]:
        """Enumerate the fault grid, then the FDIA grid, in a fixed order."""
        tasks: list[_Task] = []
        for fault_type, impedance, location, angle, load in itertools.product(
            config.fault_types,
            config.fault_impedances_ohm,
            config.fault_locations,
            config.inception_angles_ms,
            config.fault_loads_pu,
        ):
            fault = FaultParams(
                fault_type=fault_type, location_frac=location, impedance_ohm=impedance, inception_angle_ms=angle
            )
            tasks.append(_Task(index=len(tasks), kind=ScenarioKind.FAULT, load_pu=load, fault=fault))
        for _, onset, load in itertools.product(range(config.fdia_alpha_draws), config.fdia_onsets, config.fdia_loads_pu):
            tasks.append(_Task(index=len(tasks), kind=ScenarioKind.FDIA, load_pu=load, onset_index=onset))
        return tasks

    def build_scenario(self, task: _Task, config: GenerationConfig, seed: int) -> ScenarioSpec:
        """Draw the random parts of one scenario from its own RNG stream."""
        rng = np.random.default_rng([seed, task.index])
        snr = None
        if config.snr_db_range is not None:
            low, high = config.snr_db_range
            snr = float(rng.uniform(low, high))
        if task.kind == ScenarioKind.FAULT:
            return ScenarioSpec(
                kind=ScenarioKind.FAULT,
                load_pu=task.load_pu,
                fault=task.fault,
                snr_db=snr,
                seed=int(rng.integers(2**31)),
            )
        try:
            alpha = self.waveforms.sample_alpha(self.protection.settings, task.load_pu, rng)
        except InfeasibleError as e:
            raise GenerationError(f"scenario #{task.index} (fdia, load {task.load_pu} pu): {e}") from e
        # Point-on-wave drawn from the same 1 ms grid as fault inception
        wave_phase = inception_phase(int(rng.integers(0, 16)), self.window)
        return ScenarioSpec(
            kind=ScenarioKind.FDIA,
            load_pu=task.load_pu,
            fdia=FdiaParams.from_alpha(alpha, task.onset_index),
            snr_db=snr,
            wave_phase_rad=wave_phase,
            seed=int(rng.integers(2**31)),
        )

    def build_sample(self, task: _Task, config: GenerationConfig, seed: int) -> LabeledSample:
        spec = self.build_scenario(task, config, seed)
        window = self.waveforms.synthesize(spec).to_storage_precision()
        if not trip_check(window, self.protection.settings, self.protection.pickup_count).tripped:
            raise GenerationError(f"scenario #{task.index} does not trip the relay: {spec.model_dump_json()}")
        label = LABEL_FDIA if spec.kind == ScenarioKind.FDIA else LABEL_FAULT
        return LabeledSample(
            window=window,
            label=label,
            provenance=SampleProvenance(origin="generated", scenario=spec, source_index=task.index),
        )

    def generate_dataset(self, config: GenerationConfig, seed: int) -> Dataset:
        """Generate the fault grid and the FDIA draws, verifying every window trips.

        Args:
            config: Generation grid and counts.
            seed: Generator seed; scenario i draws from default_rng([seed, i]).

        Returns:
            Dataset with faults first, then FDIAs.
        """
        tasks = self.scenario_tasks(config)
        logger.info(
            f"Generating {config.fault_count} fault and {config.fdia_count} FDIA windows "
            f"(seed {seed}, {config.workers} workers)"
        )
        progress = tqdm(total=len(tasks), desc="Generating", disable=not sys.stderr.isatty())

        def run(task: _Task) -> LabeledSample:
            sample = self.build_sample(task, config, seed)
            progress.update(1)
            return sample

        try:
            if config.workers > 1:
                with ThreadPoolExecutor(max_workers=config.workers) as pool:
                    samples = list(pool.map(run, tasks))
            else:
                samples = [run(task) for task in tasks]
        finally:
            progress.close()

        dataset = Dataset.from_samples(samples, self.window, generator_seed=seed, description="generated")
        logger.info(f"Generated {dataset.manifest.count} windows: {dataset.manifest.class_counts}")
        return dataset

    def split(self, dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
        """Stratified train/test split; shuffling is deterministic in ``seed``."""
        if not 0.0 < test_fraction < 1.0:
            raise ParameterError(f"test_fraction must lie in (0, 1), got {test_fraction}")
        if len(dataset) == 0:
            raise StratificationError("cannot split an empty dataset")
        labels = dataset.labels()
        for label in (LABEL_FAULT, LABEL_FDIA):
            count = int(np.sum(labels == label))
            if 0 < count < 2:
                raise StratificationError(f"class {label} has {count} sample(s); stratification needs at least 2")
        try:
            train_idx, test_idx = train_test_split(
                np.arange(len(dataset)),
                test_size=test_fraction,
                stratify=labels,
                random_state=seed,
                shuffle=True,
            )
        except ValueError as e:
            raise StratificationError(str(e)) from e
        train = dataset.subset(train_idx, description="train")
        test = dataset.subset(test_idx, description="test")
        logger.info(f"Split {len(dataset)} windows into {len(train)} train / {len(test)} test")
        return train, test

    def fit_scaler(self, train: Dataset) -> Scaler:
        return fit_scaler(train)


def fit_scaler(train: Dataset) -> Scaler:
    """Per-channel mean and standard deviation over all training windows and samples."""
    if len(train) == 0:
        raise ScalerError("cannot fit a scaler on an empty dataset")
    windows = train.windows()
    mean = windows.mean(axis=(0, 2))
    std = windows.std(axis=(0, 2))
    if np.any(std <= 0):
        flat = [int(c) for c in np.flatnonzero(std <= 0)]
        raise ScalerError(f"zero variance in channel(s) {flat}")
    return Scaler(mean=mean, std=std)


def apply_scaler(scaler: Scaler, window: MeasurementWindow, dtype: torch.dtype = torch.float64) -> torch.Tensor:
    """Model-space tensor (6, T) for a physical window."""
    return scaler.to_tensor(window, dtype)
