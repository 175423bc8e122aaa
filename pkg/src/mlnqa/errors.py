"""Exception hierarchy shared across the package."""


class MlnError(Exception):
    """Base class for all errors raised by this package."""


class ExistentialPresent(MlnError):
    """CNF conversion was asked to clausify a formula that still has EXIST nodes."""


class OutOfRange(MlnError):
    """A probability or score fell outside its legal interval."""


class NegativeNonUnitWeight(MlnError):
    """A negative-weight soft formula is not a single literal and cannot be flipped."""


class UnsupportedExistential(MlnError):
    """An EXIST occurs somewhere other than as a prefix over a consequent conjunction."""


class EmptyDomain(MlnError):
    """A quantified variable ranges over a sort with no constants."""


class HardContradiction(MlnError):
    """Hard constraints simplified to an empty clause; no world satisfies them."""


class Unsatisfiable(MlnError):
    """A clause set required to be satisfiable has no model."""


class SamplerStuck(MlnError):
    """SampleSAT exhausted its flip and restart budgets without finding a solution."""


class TooLarge(MlnError):
    """Exact enumeration was requested on a network above the free-atom cap."""


class AllHardViolated(MlnError):
    """No assignment satisfies the hard clauses during exact enumeration."""


class NoQueryNodes(MlnError):
    """A question graph has no query nodes to score."""


class EmptyKb(MlnError):
    """Rule selection was invoked with an empty knowledge base."""


class AllOptionsTimedOut(MlnError):
    """Every answer option of a question exceeded its time budget."""


class ParseError(MlnError):
    """Syntax or validation error in one of the on-disk formats.

    Carries a SourceSpan pointing into the offending token.
    """

    def __init__(self, message, span=None):
        self.span = span
        if span is not None:
            message = "%s: %s" % (span, message)
        super().__init__(message)
