"""
Error hierarchy shared by every app.

Management commands map the user-facing errors to exit code 2 and
`OSError` to exit code 3 (see core.commands).
"""


class SimulationError(Exception):
    """Base for all errors raised by the simulator."""


class ConfigurationError(SimulationError):
    """Bad user configuration (sizes, code ids, rates, unknown schedules)."""


class InputError(SimulationError):
    """Malformed arguments, e.g. a flip vector of the wrong length."""


class InvariantError(SimulationError):
    """A structural invariant of a built object does not hold."""


class DecoderInvariantError(InvariantError):
    """Odd defect parity on a closed lattice, or a correction that leaves a syndrome."""


class FitError(SimulationError):
    """A fit did not converge or produced an out-of-range estimate."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        return f"{base} ({extra})"
