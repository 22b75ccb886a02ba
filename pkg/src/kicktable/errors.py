"""Exception types shared across the package."""


class KickTableError(Exception):
    """Base class for all structure errors."""


class ParameterError(KickTableError, ValueError):
    """An argument is outside its documented domain."""


class CapacityError(KickTableError):
    """The structure is full and cannot accept another element."""


class DuplicateKeyError(KickTableError, KeyError):
    """Insertion of a key that is already present."""


class KeyNotFoundError(KickTableError, KeyError):
    """Deletion or lookup of a key that is not present."""


class EmptyStructureError(KickTableError):
    """A statistic was requested from an empty structure."""


class RouterOverflow(KickTableError):
    """A local query router outgrew its encoding cap.

    The enclosing structure must be rebuilt with a fresh seed.
    """


class RebuildNeeded(KickTableError):
    """A structural limit was hit; the caller must rebuild with new randomness."""


class StateError(KickTableError, RuntimeError):
    """An operation was called while its precondition on internal state is false."""
