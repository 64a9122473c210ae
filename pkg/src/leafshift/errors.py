"""Exception hierarchy shared by all modules."""


class LeafShiftError(Exception):
    """Base class for every error raised by this package."""


class InputError(LeafShiftError, ValueError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class DuplicateSymbol(InputError):
    pass


class UnknownSymbol(InputError):
    pass


class StrandedSymbol(InputError):
    """A symbol without an incoming or outgoing edge lies on no bi-infinite chain."""


class InadmissibleWord(InputError):
    pass


class BadAnchor(InputError):
    pass


class WordMismatch(InputError):
    pass


class StemMismatch(InputError):
    pass


class BaseMismatch(InputError):
    pass


class SegmentMismatch(InputError):
    pass


class NotIrreducible(LeafShiftError, ValueError):
    pass


class TrivialSymbol(LeafShiftError, ValueError):
    pass


class PartitionInvalid(LeafShiftError):
    pass


class NoConvergence(LeafShiftError, RuntimeError):
    pass


class TooManyCylinders(InputError):
    """A cylinder table would exceed the configured storage guard."""
