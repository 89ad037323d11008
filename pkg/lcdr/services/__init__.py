"""Services for the LCDR lab."""

from lcdr.services.attack_service import AttackService
from lcdr.services.dataset_service import DatasetService
from lcdr.services.defense_service import DefenseService
from lcdr.services.protection_service import ProtectionService
from lcdr.services.relay_service import RelayContext
from lcdr.services.training_service import TrainingService
from lcdr.services.waveform_service import WaveformService

__all__ = [
    "AttackService",
    "DatasetService",
    "DefenseService",
    "ProtectionService",
    "RelayContext",
    "TrainingService",
    "WaveformService",
]
