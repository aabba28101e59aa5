"""Exception types shared across the package.

The CLI maps these onto exit codes (config/parameter problems -> 2,
I/O problems -> 3, analysis failures -> 4), so library code should
raise the most specific class that applies.
"""


class PairlinkError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(PairlinkError, ValueError):
    """A single argument violates an operation's preconditions."""


class ConfigError(PairlinkError, ValueError):
    """One or more configuration fields violate their invariants."""


class ContractError(PairlinkError, ValueError):
    """Caller passed data violating a documented contract (e.g. unsorted)."""


class RecordError(PairlinkError, ValueError):
    """Timetag records cannot be quantized (e.g. negative times)."""


class AnalysisError(PairlinkError):
    """Base class for failures of the analysis stages."""


class NoPeakError(AnalysisError):
    """No coincidence peak rises above the histogram background."""


class DegenerateInputError(AnalysisError):
    """Input carries no usable signal (e.g. all-zero waveform)."""


class FitError(AnalysisError):
    """A regression is degenerate or its extrapolation never crosses."""


class GridResolutionError(AnalysisError):
    """A numerical grid is too coarse or too short for the requested model."""
