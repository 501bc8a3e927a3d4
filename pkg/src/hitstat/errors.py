"""Exception and warning types shared across the package."""
from __future__ import annotations


class HitstatError(Exception):
    """Base class for all package-specific errors."""


# --- model construction and validation ---------------------------------

class NonStochasticRow(HitstatError, ValueError):
    """A probability vector or kernel row does not sum to one."""


class ZeroMassSymbol(HitstatError, ValueError):
    """A finite-alphabet distribution assigns zero mass to a symbol."""


class ReducibleChain(HitstatError, ValueError):
    """The transition kernel is not irreducible and aperiodic."""


class BadThetaRange(HitstatError, ValueError):
    """The geometric ratio lies outside the open interval (0, 1)."""


class InvalidSymbol(HitstatError, ValueError):
    """A symbol index is negative or outside the model's alphabet."""


class NonPositiveS(HitstatError, ValueError):
    """A Renyi order parameter s must be strictly positive."""


class PowerIterationNoConvergence(HitstatError, RuntimeError):
    """Power iteration failed to converge within its iteration cap."""


class BudgetExceeded(HitstatError, ValueError):
    """An exhaustive enumeration would exceed the configured budget."""


class ContractionDegenerate(UserWarning):
    """The one-step contraction coefficient equals one; the mixing bound
    decays no faster than its constant and is vacuous."""


# --- orbit engine -------------------------------------------------------

class ZeroMeasureTarget(HitstatError, ValueError):
    """The target word has zero measure under the model."""


class MixedLengths(HitstatError, ValueError):
    """A pattern set is empty or its words have unequal lengths."""


class CensoringExceeded(HitstatError, RuntimeError):
    """Too many censored samples for a trustworthy summary."""


# --- exact distributions ------------------------------------------------

class TailNotContracting(HitstatError, RuntimeError):
    """The transient block of an absorbing chain shows no certified
    contraction, so infinite sums over it cannot be truncated."""


class GridTooCoarse(HitstatError, ValueError):
    """Too few usable grid points to fit a survival decay rate."""


# --- byte-stream estimators ----------------------------------------------

class EmptyInput(HitstatError, ValueError):
    """An input byte sequence is empty."""


class IoFailure(HitstatError, OSError):
    """An input source could not be read."""


class SequenceTooShort(HitstatError, ValueError):
    """The symbol sequence is too short for the requested block length."""
