"""Exception hierarchy for the LCDR lab.

Every error carries an exit code so the CLI can report a category.
"""


class LcdrError(Exception):
    """Base error."""

    category = "error"
    exit_code = 1


class ConfigurationError(LcdrError):
    """Experiment configuration is invalid or incomplete."""

    category = "config"
    exit_code = 2


class ParameterError(LcdrError, ValueError):
    """An operation received a parameter outside its domain."""

    category = "parameter"
    exit_code = 3


class ShapeError(ParameterError):
    """A window or tensor does not have the expected shape."""

    category = "shape"


class InsufficientDataError(ParameterError):
    """Not enough samples for the requested computation."""

    category = "insufficient-data"


class InfeasibleError(LcdrError):
    """No admissible value exists (e.g. an empty FDIA trip locus)."""

    category = "infeasible"
    exit_code = 4


class GenerationError(LcdrError):
    """A generated scenario failed validation."""

    category = "generation"
    exit_code = 4


class StratificationError(LcdrError):
    """A dataset cannot be split by label."""

    category = "split"
    exit_code = 4


class ScalerError(LcdrError):
    """Feature scaling cannot be fitted."""

    category = "scaler"
    exit_code = 4


class DataIntegrityError(LcdrError):
    """Stored data is truncated, corrupt or from another format version."""

    category = "integrity"
    exit_code = 5


class NumericError(LcdrError, ArithmeticError):
    """A non-finite value appeared in a computation."""

    category = "numeric"
    exit_code = 6


class TrainingError(NumericError):
    """Training diverged."""

    category = "training"
