"""Service wiring for one experiment run."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np
import torch

from lcdr.core.config import Settings, get_settings
from lcdr.models import ExperimentConfig

if TYPE_CHECKING:
    from lcdr.services.attack_service import AttackService
    from lcdr.services.dataset_service import DatasetService
    from lcdr.services.defense_service import DefenseService
    from lcdr.services.relay_service import RelayContext
    from lcdr.services.training_service import TrainingService
    from lcdr.services.waveform_service import WaveformService

logger = logging.getLogger(__name__)

# Fixed stage codes; changing one changes every seed derived for that stage.
STAGE_CODES = {
    "generate": 1,
    "split": 2,
    "init": 3,
    "train": 4,
    "attack": 5,
    "defense": 6,
}


def derive_seed(global_seed: int, stage: str, offset: int = 0) -> int:
    """Per-stage seed from the global seed via ``SeedSequence([global_seed, stage_code, offset])``."""
    if stage not in STAGE_CODES:
        raise KeyError(f"unknown pipeline stage {stage!r}")
    sequence = np.random.SeedSequence([global_seed, STAGE_CODES[stage], offset])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


class PipelineCore:
    """Services of one experiment, built from a single ExperimentConfig."""

    def __init__(self, config: ExperimentConfig, settings: Settings | None = None):
        self.config = config
        self.settings = settings or get_settings()
        self._relay_ctx: RelayContext | None = None
        self._waveform_service: WaveformService | None = None
        self._dataset_service: DatasetService | None = None
        self._training_service: TrainingService | None = None
        self._attack_service: AttackService | None = None
        self._defense_service: DefenseService | None = None

    def initialize(self):
        """Set torch numerics and build every service."""
        from lcdr.services.attack_service import AttackService
        from lcdr.services.dataset_service import DatasetService
        from lcdr.services.defense_service import DefenseService
        from lcdr.services.relay_service import RelayContext
        from lcdr.services.training_service import TrainingService
        from lcdr.services.waveform_service import WaveformService

        torch.set_default_dtype(self.dtype)
        if self.settings.deterministic:
            torch.use_deterministic_algorithms(True)

        self._relay_ctx = RelayContext(protection=self.config.relay, window=self.config.window)
        self._waveform_service = WaveformService(self.config.system, self.config.window)
        self._dataset_service = DatasetService(self.config.system, self.config.window, self.config.relay)
        self._training_service = TrainingService()
        self._attack_service = AttackService(self._relay_ctx)
        self._defense_service = DefenseService(self._relay_ctx)
        logger.info(f"Pipeline initialized (seed {self.config.seed}, dtype {self.settings.dtype}, output {self.config.output_dir})")

    @property
    def dtype(self) -> torch.dtype:
        return torch.float64 if self.settings.dtype == "float64" else torch.float32

    def seed(self, stage: str, offset: int = 0) -> int:
        return derive_seed(self.config.seed, stage, offset)

    @property
    def relay_ctx(self) -> RelayContext:
        if not self._relay_ctx:
            raise RuntimeError("Pipeline core not initialized")
        return self._relay_ctx

    @property
    def waveform_service(self) -> WaveformService:
        if not self._waveform_service:
            raise RuntimeError("Pipeline core not initialized")
        return self._waveform_service

    @property
    def dataset_service(self) -> DatasetService:
        if not self._dataset_service:
            raise RuntimeError("Pipeline core not initialized")
        return self._dataset_service

    @property
    def training_service(self) -> TrainingService:
        if not self._training_service:
            raise RuntimeError("Pipeline core not initialized")
        return self._training_service

    @property
    def attack_service(self) -> AttackService:
        if not self._attack_service:
            raise RuntimeError("Pipeline core not initialized")
        return self._attack_service

    @property
    def defense_service(self) -> DefenseService:
        if not self._defense_service:
            raise RuntimeError("Pipeline core not initialized")
        return self._defense_service


# Global instance
_pipeline_core: PipelineCore | None = None


def set_pipeline_core(core: PipelineCore):
    """Set global pipeline core instance."""
    global _pipeline_core
    _pipeline_core = core


def get_pipeline_core() -> PipelineCore:
    """Get global pipeline core instance."""
    if _pipeline_core is None:
        raise RuntimeError("Pipeline core not initialized")
    return _pipeline_core
