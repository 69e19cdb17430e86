"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures without
inspecting types: 1 usage/config, 2 data, 3 internal invariant violation.
"""


class PipelineError(Exception):
    exit_code = 2


class InvalidArgumentError(PipelineError, ValueError):
    exit_code = 1


class ConfigError(InvalidArgumentError):
    pass


class DegenerateSignalError(PipelineError):
    """A channel carries no usable variation (dead sensor)."""


class InsufficientBeatsError(PipelineError):
    pass


class ManifestMismatchError(PipelineError):
    """Detected cuff episodes disagree with the annotated readings."""


class SparseIntervalError(PipelineError):
    pass


class SingularDesignError(PipelineError):
    pass


class InsufficientDataError(PipelineError):
    pass


class DegenerateMetricsError(PipelineError):
    pass


class ProfileError(InvalidArgumentError):
    pass


class InvariantViolation(PipelineError):
    exit_code = 3
