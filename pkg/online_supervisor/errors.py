"""
Exception hierarchy shared by every module.

The CLI turns an uncaught SupervisorError into a process exit code:
- 2: the input (formula, file, schedule, vocabulary) is invalid
- 3: the specification cannot be enforced from the initial state
- 4: the closed loop broke its protocol at runtime
"""

from typing import Optional


class SupervisorError(Exception):
    """Base class for all library errors."""

    exit_code = 1


# Validation errors (exit code 2)


class ValidationFailure(SupervisorError):
    exit_code = 2


class FormulaSyntaxError(ValidationFailure):
    """Formula text could not be parsed."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class NegationOnNonAtomError(FormulaSyntaxError):
    pass


class UnknownAtomError(FormulaSyntaxError):
    pass


class SchemaViolationError(ValidationFailure):
    pass


class NondeterminismError(SchemaViolationError):
    pass


class ControllabilityConflictError(ValidationFailure):
    pass


class VocabularyMismatchError(ValidationFailure):
    pass


class ScheduleError(ValidationFailure):
    pass


class UnknownStateError(ValidationFailure):
    pass


class ResourceLimitError(ValidationFailure):
    pass


# Specification cannot be enforced (exit code 3)


class UnenforceableError(SupervisorError):
    exit_code = 3

    def __init__(self, initial_rank: int, alpha: int):
        self.initial_rank = initial_rank
        self.alpha = alpha
        super().__init__(
            f"initial rank {initial_rank} equals alpha={alpha}: "
            "acceptance cannot be forced from the initial state"
        )


# Runtime protocol errors (exit code 4)


class ProtocolError(SupervisorError):
    exit_code = 4


class UndefinedTransitionError(ProtocolError):
    pass


class IllegalObservationError(ProtocolError):
    pass


class SessionStoppedError(ProtocolError):
    pass


class EmptyPatternError(ProtocolError):
    pass


class MaxStepsExceededError(ProtocolError):
    def __init__(self, seed: int, max_steps: int):
        self.seed = seed
        self.max_steps = max_steps
        super().__init__(f"run with seed {seed} did not accept within {max_steps} steps")
