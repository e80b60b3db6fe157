"""Exception hierarchy shared by all tiqflash modules.

Two branches matter to callers: ValidationError covers inputs that were
wrong before any work started (bad geometry, malformed files, degenerate
requests), ComputationError covers failures discovered while working
(solver breakdown, a width grid that cannot cover the ladder, bubble
errors in a thermometer code).  The CLI maps the branches to exit codes
1 and 2 respectively.
"""


class TiqFlashError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TiqFlashError):
    """Input rejected before any computation ran."""


class ComputationError(TiqFlashError):
    """Computation started but could not produce a valid result."""


class InvalidGeometryError(ValidationError):
    """Non-positive transistor width or length."""


class ParameterError(ValidationError):
    """Device parameters outside the model's domain."""


class IdealDeviceError(ValidationError):
    """Operation needs channel-length modulation but both lambdas are zero."""


class OutOfModelRangeError(ValidationError):
    """Temperature scaling drove a parameter outside the model's validity."""


class DegenerateResolutionError(ValidationError):
    """Resolution below two bits; message starts 'resolution must be >= 2'."""

    def __init__(self, n_bits):
        super().__init__(f"resolution must be >= 2, got {n_bits}")
        self.n_bits = n_bits


class InfeasibleLadderError(ValidationError):
    """Requested reference ladder does not fit inside the usable input band."""


class InvalidGridError(ValidationError):
    """Width grid is empty or violates w_min <= w_max, w_step > 0."""


class InvalidStimulusError(ValidationError):
    """Stimulus parameters out of range (rate, duration, rail clipping)."""


class InvalidOneHotError(ValidationError):
    """More than one bit set where a one-hot word was required."""


class ArityError(ValidationError):
    """Gate input count or code width does not match what a consumer expects."""


class ParseError(ValidationError):
    """Malformed preset, design file, netlist or trace.

    ``path`` locates the offending element, JSON-pointer style
    (for example ``$.designs[3].wp``) or line-based for text formats.
    """

    def __init__(self, message, path=None):
        if path is not None:
            message = f"{message} at {path}"
        super().__init__(message)
        self.path = path


class NumericalFailureError(ComputationError):
    """Operating-point solver failed to converge; carries the input voltage."""

    def __init__(self, message, v_in=None):
        super().__init__(message)
        self.v_in = v_in


class CoverageError(ComputationError):
    """Candidate thresholds do not span the ladder; carries uncovered rungs."""

    def __init__(self, message, uncovered=()):
        super().__init__(message)
        self.uncovered = tuple(uncovered)


class InsufficientResolutionError(ComputationError):
    """Fewer distinct candidate thresholds than ladder rungs to assign."""


class BubbleError(ComputationError):
    """Thermometer code violates monotonicity; carries the first bad index."""

    def __init__(self, index, sample=None):
        msg = f"bubble in thermometer code at bit {index}"
        if sample is not None:
            msg += f" (sample {sample})"
        super().__init__(msg)
        self.index = index
        self.sample = sample
