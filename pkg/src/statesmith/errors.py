"""Exception types shared across the package."""


class StateSmithError(Exception):
    """Base class for all package errors."""


class NotNormalized(StateSmithError):
    """Coefficients do not satisfy the normalization invariant."""


class UnknownClass(StateSmithError):
    """A referenced coefficient class is not present in the state."""


class PreconditionViolated(StateSmithError):
    """The sign pattern required for a pi-flip diffusion step does not hold."""


class NoRoot(StateSmithError):
    """The equalizing-angle quadratic has no admissible root."""


class AlreadyUniform(StateSmithError):
    """The state has a single coefficient class; there is no pair to pick."""


class NotTwoClass(StateSmithError):
    """The closed-form iteration forecast needs exactly two classes."""


class IterationBudgetExceeded(StateSmithError):
    """The planner used more pi-flip diffusion steps than the budget allows."""


class NoIdleQubit(StateSmithError):
    """A gate decomposition needs a spare qubit and none is available."""


class QubitCapExceeded(StateSmithError):
    """The requested simulation is larger than the configured qubit cap."""


class SpecFormatError(StateSmithError):
    """A target-spec, plan, or circuit file failed to parse."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
