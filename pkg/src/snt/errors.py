"""Exception hierarchy.

Everything raised deliberately by the package derives from :class:`SNTError`,
so callers (the CLI in particular) can separate domain failures from bugs.
"""


class SNTError(Exception):
    pass


class ShapeError(SNTError, ValueError):
    """Array dimensions do not fit together."""


class InvariantError(SNTError, ValueError):
    """An input violates a type invariant (negativity, asymmetry, ...)."""


class ReducibleError(SNTError):
    """Operation requires an irreducible matrix."""


class RankError(SNTError):
    """Operation requires a specific numerical rank."""


class NotSeparableError(SNTError):
    """The chosen columns do not nonnegatively generate the matrix."""

    def __init__(self, message, worst_column=None, worst_residual=None):
        super().__init__(message)
        self.worst_column = worst_column
        self.worst_residual = worst_residual
