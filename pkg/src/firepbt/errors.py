"""Exception types shared across the package."""


class FirePbtError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateInput(FirePbtError):
    """Input data too small or non-finite for the requested operation."""


class IllConditioned(FirePbtError):
    """Kernel matrix factorization failed even after jitter escalation."""


class InvalidArgs(FirePbtError):
    """Arguments violate a documented precondition."""


class MissingHyper(FirePbtError):
    """A task was driven without a hyperparameter it declares as required."""


class CorruptBlob(FirePbtError):
    """A snapshot blob failed magic/length/schema validation."""


class CheckpointMissing(FirePbtError):
    """A donor checkpoint could not be materialized from the store."""


class UnknownRef(FirePbtError):
    """Checkpoint reference not present in the store."""


class StaleTarget(FirePbtError):
    """Evaluator success target changed lineage between check and apply."""


class NoEligibleParent(FirePbtError):
    """No parent sub-population member is currently eligible for evaluation."""


class ConfigInvalid(FirePbtError):
    """Experiment configuration failed validation."""


class EmptyLog(FirePbtError):
    """Event log contains no training evaluations."""


class ScheduleGap(FirePbtError):
    """Hyperparameter schedule does not cover the requested span."""
