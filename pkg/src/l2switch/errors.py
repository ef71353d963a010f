"""Exception types shared across the simulator."""


class InvariantViolation(AssertionError):
    """A hardware-model invariant was broken (double free, bus conflict,
    linked-list cycle, TX underrun).  Always indicates a simulator bug or
    a deliberately provoked failure mode, never bad user input."""


class TraceError(ValueError):
    """A trace file failed validation.  Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ScheduleError(ValueError):
    """Frame injection times overlap or violate the inter-frame gap."""
