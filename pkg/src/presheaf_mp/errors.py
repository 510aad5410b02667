"""Exception types raised across the package."""


class PresheafMPError(ValueError):
    """Base class for every error raised by presheaf_mp."""


class CycleError(PresheafMPError):
    pass


class UnknownElement(PresheafMPError):
    pass


class EmptyRegion(PresheafMPError):
    pass


class DuplicateRegion(PresheafMPError):
    pass


class NotComparable(PresheafMPError):
    pass


class SearchSpaceTooLarge(PresheafMPError):
    pass


class NegativeFactor(PresheafMPError):
    pass


class NonPositiveBelief(PresheafMPError):
    pass


class NotNormalized(PresheafMPError):
    pass


class AllMassMasked(PresheafMPError):
    pass


class NaturalityFailed(PresheafMPError):
    pass


class NotSurjective(PresheafMPError):
    pass


class PosetMismatch(PresheafMPError):
    pass


class Mismatch(PresheafMPError):
    pass


class ZeroPartition(PresheafMPError):
    pass


class ZeroEvidence(PresheafMPError):
    pass


class InconsistentEvidence(PresheafMPError):
    pass


class NotTree(PresheafMPError):
    pass


class ValidationError(PresheafMPError):
    """A structural invariant failed; the message names the invariant and the element(s)."""


class ParseError(PresheafMPError):
    def __init__(self, msg, line=None, column=None):
        if line is not None:
            msg = f"{msg} (line {line}, column {column})"
        super().__init__(msg)
        self.line = line
        self.column = column
