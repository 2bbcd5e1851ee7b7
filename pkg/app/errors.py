"""
Seirkit Errors

Every failure the numeric modules raise derives from SeirkitError so the
routers and the CLI can map them in one place.
"""


class SeirkitError(Exception):
    """Base class for toolkit errors."""


class ModelDefinitionError(SeirkitError, ValueError):
    """Unknown model, missing or invalid parameters, or a negative rate."""


class EventCapExceeded(SeirkitError, RuntimeError):
    """A single simulation fired more events than allowed."""


class NumericalInstabilityError(SeirkitError, ArithmeticError):
    """Float64 evaluation lost too much precision."""


class RegionViolationError(SeirkitError, ArithmeticError):
    """A deterministic path left the model's invariant region."""


class ConvergenceError(SeirkitError, RuntimeError):
    """An iterative solver did not converge."""


class UnstableEquilibriumError(SeirkitError, ValueError):
    """The drift matrix has an eigenvalue with nonnegative real part."""


class UnsupportedCombinationError(SeirkitError, ValueError):
    """The requested method, model and options do not fit together."""


class EmptyOutcomeError(SeirkitError, ValueError):
    """A statistic was requested over no outcomes."""


class NoEndemicStateError(SeirkitError, ValueError):
    """R0 <= 1, so there is no endemic equilibrium."""


class PathMismatchError(SeirkitError, ValueError):
    """A controlled path's states do not follow its controls."""
