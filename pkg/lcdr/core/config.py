"""LCDR lab configuration."""

import json
from functools import lru_cache
from pathlib import Path

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from lcdr.errors import ConfigurationError
from lcdr.models import ExperimentConfig


class Settings(BaseSettings):
    """Process-level settings, read from LCDR_* environment variables or .env."""

    # Logging
    log_level: str = "INFO"

    # Run defaults (the experiment config and CLI flags override these)
    output_dir: Path = Path("runs/desk")
    seed: int = 7
    workers: int = 1

    # Numerics
    deterministic: bool = True
    dtype: str = "float64"

    model_config = SettingsConfigDict(
        env_prefix="LCDR_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    def model_post_init(self, __context):
        """Validate the few fields that have a closed set of values."""
        if self.dtype not in ("float32", "float64"):
            raise ConfigurationError(f"LCDR_DTYPE must be float32 or float64, got {self.dtype!r}")
        if self.workers < 1:
            raise ConfigurationError("LCDR_WORKERS must be at least 1")


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


def load_experiment_config(path: Path | str | None = None, settings: Settings | None = None) -> ExperimentConfig:
    """Load and validate an experiment config.

    Without a path the defaults are used, seeded from the process settings.
    Every section is validated before any work starts.

    Raises:
        ConfigurationError: unreadable file, malformed JSON or failed validation.
    """
    settings = settings or get_settings()
    base = {"seed": settings.seed, "output_dir": str(settings.output_dir)}
    if path is None:
        raw: dict = {}
    else:
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigurationError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigurationError(f"config file {path} must hold a JSON object")
    data = {**base, **raw}
    data.setdefault("generation", {})
    if isinstance(data["generation"], dict):
        data["generation"].setdefault("workers", settings.workers)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid experiment config: {e}") from e


def apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Apply CLI flag overrides (None values are skipped) and re-validate."""
    data = config.model_dump(mode="json")
    if overrides.get("seed") is not None:
        data["seed"] = overrides["seed"]
    if overrides.get("output_dir") is not None:
        data["output_dir"] = str(overrides["output_dir"])
    if overrides.get("epsilon") is not None:
        data["attack"]["epsilon"] = overrides["epsilon"]
    if overrides.get("iterations") is not None:
        data["attack"]["max_iterations"] = overrides["iterations"]
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid override: {e}") from e
