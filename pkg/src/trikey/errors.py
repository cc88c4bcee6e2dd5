"""Exception types raised across the package.

Everything derives from :class:`TrikeyError` so callers (notably the CLI)
can distinguish input/validation problems from genuine bugs.
"""


class TrikeyError(Exception):
    """Base class for all errors raised by this package."""


class NegativeMassError(TrikeyError):
    """A probability mass is negative (or not a finite number)."""


class BadSumError(TrikeyError):
    """Masses do not sum to 1 beyond the renormalization tolerance."""


class ShapeMismatchError(TrikeyError):
    """Array length or cardinality tuple inconsistent with the declaration."""


class ParamOutOfRangeError(TrikeyError):
    """A scalar parameter lies outside its documented domain."""


class CardTooLargeError(TrikeyError):
    """Alphabet sizes exceed what the exhaustive generators support."""


class EmptyVarSetError(TrikeyError):
    """A variable subset that must be nonempty is empty."""


class OverlappingSetsError(TrikeyError):
    """Variable subsets that must be disjoint share a label."""


class InternalConsistencyError(TrikeyError):
    """A quantity violated a mathematical bound by more than rounding noise."""


class UnboundedRegionError(TrikeyError):
    """A rate region is not bounded inside the nonnegative quadrant."""


class LengthMismatchError(TrikeyError):
    """Sample block length differs from the protocol blocklength."""


class RateInfeasibleError(TrikeyError):
    """Requested binning parameters exceed the decode/search budget."""


class StateSpaceTooLargeError(TrikeyError):
    """Exhaustive audit state space exceeds the configured budget."""


class SourceSpecError(TrikeyError):
    """Malformed source-spec record (bad type tag or field set)."""


class ProtocolSpecError(TrikeyError):
    """Malformed protocol descriptor record."""
