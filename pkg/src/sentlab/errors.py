"""Exception hierarchy shared across the pipeline.

Two broad families matter to callers: problems with inputs or
configuration (exit code 1 at the command line) and numerical failures
inside the estimators (exit code 2). Everything raised here derives
from one of those families so the CLI can map errors to exit codes
without enumerating leaf classes.
"""


class SentlabError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SentlabError):
    """Malformed, inconsistent, or out-of-contract input data or config."""


class NumericsError(SentlabError):
    """Estimator failed numerically (collinearity, non-convergence, ...)."""


class ConfigError(InputError):
    """Invalid run configuration value or missing required path."""


class FormatError(InputError):
    """A file does not match its expected layout (headers, fields, types)."""


class ConflictError(InputError):
    """A term is listed as both positive and negative in the lexicon."""


class RangeError(InputError):
    """A numeric field lies outside its documented range."""


class DuplicateError(InputError):
    """A key that must be unique appeared more than once."""


class MissingReturns(SentlabError):
    """A return window touches a (ticker, date) with no usable bar."""


class CollinearityError(NumericsError):
    """A regressor is constant or linearly dependent after demeaning."""


class ConvergenceError(NumericsError):
    """Iterative demeaning failed to reach tolerance within the sweep cap."""


class NumericalError(NumericsError):
    """A computed quantity is outside its mathematically valid range."""
