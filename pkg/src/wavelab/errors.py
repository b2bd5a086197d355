"""Exception hierarchy.

Numerical guard violations carry a ``guard`` name so the CLI can report
which check tripped.
"""


class WaveLabError(Exception):
    guard = "error"


class InvalidArgumentError(WaveLabError, ValueError):
    guard = "invalid-argument"


class NonnegativityError(InvalidArgumentError):
    """A potential or weight took a negative value where V >= 0 is required."""

    guard = "potential-sign"


class StepSizeError(WaveLabError):
    guard = "step-size"

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class BoundaryClippingError(WaveLabError):
    guard = "boundary-clipping"


class ConsistencyError(WaveLabError):
    guard = "boundary-consistency"


class PreconditionError(WaveLabError):
    guard = "precondition"


class UnsupportedCheckError(WaveLabError):
    guard = "unsupported-check"
