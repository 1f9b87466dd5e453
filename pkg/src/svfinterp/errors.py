"""Exception types raised across the package."""


class SvfError(ValueError):
    """Base class for all package errors."""


class DomainError(SvfError):
    """Argument outside the domain of an operation (empty set, x outside [a, b])."""


class ModelInconsistencyError(SvfError):
    """A model produced an interval with lo > hi."""


class SampleFileError(SvfError):
    """Malformed sample or approximant document."""


class ClassificationError(SvfError):
    """Significant chains could not be related to the boundaries of the graph."""


class AmbiguousGapError(ClassificationError):
    """A gap at one node overlaps several gaps at the next node."""


class NoRootInBracket(SvfError):
    """The bracket holds no sign change.

    Callers treat this as a signal: the C4 PCT refinement falls back to the
    coarse cap when it is raised.
    """


class ReconstructionError(SvfError):
    """A reconstruction precondition failed for one of the holes."""
