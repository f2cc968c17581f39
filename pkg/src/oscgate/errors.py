"""Exception hierarchy shared by every oscgate module."""


class OscgateError(Exception):
    """Base class; ``code`` is the machine-readable tag used by the CLI."""

    code = "error"


class InvalidInputError(OscgateError, ValueError):
    code = "invalid-input"


class InvalidTruncationError(InvalidInputError):
    code = "invalid-truncation"


class ShapeError(OscgateError, ValueError):
    code = "shape"


class ContractViolation(OscgateError, ValueError):
    """An operator failed a unitarity/Hermiticity precondition."""

    code = "contract-violation"


class RankDeficiencyError(OscgateError, ValueError):
    code = "rank-deficient"

    def __init__(self, message, smallest_singular_value):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class ParameterizationError(ContractViolation):
    code = "parameterization"


class ConstraintInfeasibleError(OscgateError, RuntimeError):
    code = "constraint-infeasible"


class IllConditionedError(OscgateError, RuntimeError):
    code = "ill-conditioned"


class DegenerateTargetError(OscgateError, ValueError):
    code = "degenerate-target"


class CoverageError(OscgateError, ValueError):
    code = "coverage"

    def __init__(self, message, missing):
        super().__init__(message)
        self.missing = list(missing)


class ConfigError(OscgateError, ValueError):
    code = "config"

    def __init__(self, message, line=None, field=None):
        super().__init__(message)
        self.line = line
        self.field = field
