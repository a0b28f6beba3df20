"""Exception hierarchy shared by all modules.

Two families matter operationally: configuration-type errors (bad
parameters, malformed input — the CLI maps these to exit code 1) and
computation-type errors raised on data that cannot be processed
meaningfully (degenerate input, unresolvable resolution, horizon
violations).
"""

from __future__ import annotations


class DispersiveLabError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(DispersiveLabError):
    """Structurally invalid input: bad grid sizes, malformed configs."""


class ParameterError(ConfigurationError):
    """Exponent or parameter tuple outside its admissible window."""


class ZeroFrequencySingularity(DispersiveLabError):
    """Negative-order derivative requested for data with nonzero mean."""


class ResolutionError(DispersiveLabError):
    """Requested operation is below the resolving power of the grid."""


class HorizonError(DispersiveLabError):
    """Time window exceeds the wrap-around horizon of the periodic box."""


class DegenerateDataError(DispersiveLabError):
    """Input datum carries no usable signal (e.g. identically zero)."""


class InstabilityError(DispersiveLabError):
    """Time integration blew up; the run was aborted."""


class HorizonWarning(UserWarning):
    """Requested times reach beyond the wrap-around horizon.

    A warning rather than an error: the computation is still well
    defined on the periodic box, it just stops approximating the line.
    """
