"""Exception hierarchy.

CasimirError is the base for every failure the library raises on purpose,
so callers (and the CLI) can distinguish physics/validation problems from
genuine bugs.
"""


class CasimirError(Exception):
    """Base class for all library errors."""


class ConfigError(CasimirError):
    """Malformed or inconsistent configuration input.

    The message carries a JSON-pointer-style path to the offending field
    when the error originates from a config document.
    """


class InadmissibleModelError(CasimirError):
    """A dispersion relation was requested for a model outside its domain.

    Example: the standard causality transform applied to a model whose
    susceptibility has a second-order pole at zero frequency.
    """


class CoverageError(CasimirError):
    """Tabulated optical data does not cover enough of the spectrum to
    evaluate the requested transform at the requested accuracy."""


class ConvergenceError(CasimirError):
    """An iterative numerical procedure failed to meet its tolerance."""


class AmbiguousClassificationError(CasimirError):
    """A yes/no physics classification could not be made reliably.

    Raised when the numerical uncertainty of a fitted quantity is larger
    than the margin separating it from the decision threshold.
    """
