"""Exception hierarchy shared by all modules."""


class MobintError(Exception):
    """Base class for all errors raised by this package."""


class InvalidElementError(MobintError, ValueError):
    """An element does not belong to the lattice it was used with."""


class MissingValueError(MobintError, KeyError):
    """A function to be inverted is undefined on a required lattice element."""


class DegenerateDistributionError(MobintError, ValueError):
    """A table has no probability mass at all."""


class InvalidTableError(MobintError, ValueError):
    """A probability table violates its structural invariants."""


class InvalidParamsError(MobintError, ValueError):
    """Ising couplings reference variables outside the model."""


class InvalidArgumentError(MobintError, ValueError):
    """Arguments are inconsistent with each other (e.g. subset not in universe)."""


class ZeroProbabilityError(MobintError, ArithmeticError):
    """A logarithm of a zero probability was required.

    Attributes
    ----------
    state : dict or None
        The offending state (variable name -> value), when known.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class UnestimableError(MobintError, ArithmeticError):
    """An empirical cell is empty or its conditional mean is exactly 0 or 1."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class SignificanceUnavailableError(MobintError, ArithmeticError):
    """Every bootstrap resample was unestimable."""


class InvalidSpecError(MobintError, ValueError):
    """An experiment specification violates its invariants."""


class InvalidDagError(MobintError, ValueError):
    """A causal graph is cyclic or otherwise malformed."""


class InconsistencyError(MobintError, AssertionError):
    """Two routes that must agree numerically did not."""
