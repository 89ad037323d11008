"""Core module for the LCDR lab."""

from lcdr.core.config import Settings, get_settings, load_experiment_config
from lcdr.core.dependencies import PipelineCore, derive_seed, get_pipeline_core

__all__ = ["Settings", "get_settings", "load_experiment_config", "PipelineCore", "derive_seed", "get_pipeline_core"]
