"""Exception types shared across the toolkit.

Every error raised on bad input data derives from DataError so callers
(and the command line front end) can map them to a single exit path.
"""


class MolmaskError(Exception):
    """Base class for all toolkit errors."""


class DataError(MolmaskError):
    """Input data violates a documented precondition."""


class ParseError(DataError):
    """A SMILES string could not be turned into a molecular graph."""

    def __init__(self, message: str, smiles: str = "", position: int = -1):
        self.smiles = smiles
        self.position = position
        if position >= 0:
            message = f"{message} (at position {position} in {smiles!r})"
        super().__init__(message)


class UnknownToken(ParseError):
    """Unrecognized character or malformed token in a SMILES string."""


class UnclosedRing(ParseError):
    """A ring-closure digit was opened but never closed."""


class UnbalancedParen(ParseError):
    """Branch parentheses do not balance."""


class MultiFragment(ParseError):
    """The SMILES encodes more than one connected fragment."""


class DisconnectedMotif(DataError):
    """An atom set handed to the signature routine induces a disconnected subgraph."""


class ShapeMismatch(DataError):
    """An array or file does not have the expected shape."""


class NonFiniteScore(DataError):
    """Externally supplied node scores contain NaN or infinity."""


class OutOfRangeIndex(DataError):
    """A mask plan references atoms outside the target graph."""


class DimMismatch(DataError):
    """Embedding dimensionality does not match the codebook."""


class EmptyCounts(DataError):
    """An information-theoretic quantity was requested from zero observations."""


class EmptySupport(DataError):
    """A low-frequency label set is empty for at least one class."""


class MissingColumn(DataError):
    """A dataset file lacks a required column."""
