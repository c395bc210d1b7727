"""Exception hierarchy shared by all purfit modules."""


class PurfitError(Exception):
    """Base class for every error raised by purfit."""


class SchemaError(PurfitError, KeyError):
    """Unknown feature or category name, or a malformed schema."""

    def __str__(self):
        # KeyError quotes its argument; keep messages readable.
        return str(self.args[0]) if self.args else ""


class ArgumentError(PurfitError, ValueError):
    """An argument is outside the domain of an operation."""


class EmptyDataError(PurfitError, ValueError):
    """A count table with zero total was used where data is required."""


class InfeasibleConstraintsError(PurfitError, ValueError):
    """Zero reduction forces every cell of a positive target to zero."""


class IllPosedReferenceError(PurfitError, ValueError):
    """The reference distribution vanishes where the constraints need mass."""


class SupportError(PurfitError, ValueError):
    """A KL divergence that must be finite is infinite."""


class NonConvergenceError(PurfitError, RuntimeError):
    """IPF exhausted its cycle budget without meeting the tolerance.

    The last iterate and the diagnostics are attached so callers can
    inspect the residual trace.
    """

    def __init__(self, message, diagnostics=None, iterate=None):
        super().__init__(message)
        self.diagnostics = diagnostics
        self.iterate = iterate


class IngestionError(PurfitError, ValueError):
    """A CSV file could not be mapped onto the declared schema."""
