"""Exception types shared across the package."""


class TrotterlabError(Exception):
    """Base class for all errors raised by this package."""


class NonFinite(TrotterlabError):
    """Input contains NaN or Inf entries."""


class NonHermitian(TrotterlabError):
    """Matrix is not Hermitian within the accepted tolerance."""


class DimensionOverflow(TrotterlabError):
    """A Kronecker construction would exceed the configured dimension cap."""


class EmptyInput(TrotterlabError):
    """A transform was requested on an empty vector."""


class NonPowerOfTwo(TrotterlabError):
    """Fast transform requested for a length that is not a power of two."""


class DimensionMismatch(TrotterlabError):
    """Operator and operand sizes do not agree."""


class NotSplit(TrotterlabError):
    """Flow generator depends on both phase-space variables."""


class GridTooCoarse(TrotterlabError):
    """Sampled symbol resolution is too low for the requested quantization."""


class NonRealPotential(TrotterlabError):
    """Potential values have a non-negligible imaginary part."""


class OddN(TrotterlabError):
    """Construction requires an even number of grid points."""


class BadCutoff(TrotterlabError):
    """Smooth frequency cutoff parameter outside (0, 1/2)."""


class PacketTouchesBoundary(TrotterlabError):
    """Wavepacket amplitude at the domain boundary is not negligible."""


class UnnormalizedState(TrotterlabError):
    """State vector does not have unit norm."""


class TooFewPoints(TrotterlabError):
    """Not enough usable points for a least-squares slope fit."""


class Unreachable(TrotterlabError):
    """Step-count search exceeded its cap without meeting the target."""


class ParseError(TrotterlabError):
    """Configuration document is not syntactically valid."""


class ValidationError(TrotterlabError):
    """Configuration document is well-formed but semantically invalid."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
