"""Exception hierarchy shared across the package."""


class CardexError(Exception):
    """Base class for all domain errors."""


class DegenerateBox(CardexError):
    """A box collapsed to zero area (after clamping) or misses the image."""


class InvalidDomain(CardexError):
    """Image sample domain does not match what the operation expects."""


class InvalidParameter(CardexError):
    """Operator parameter outside its valid range."""


class DegenerateQuad(CardexError):
    """Quadrilateral is degenerate or the homography system is singular."""


class ShapeError(CardexError):
    """Vector/array length mismatch."""


class RangeError(CardexError):
    """Scalar argument outside its valid range."""


class ParseError(CardexError):
    """Malformed label file; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigError(CardexError):
    """Invalid dataset/pipeline configuration."""


class DateError(CardexError):
    """Unparseable or out-of-range date; carries the raw string."""

    def __init__(self, raw: str, reason: str):
        super().__init__(f"{reason}: {raw!r}")
        self.raw = raw


class NoCardFound(CardexError):
    """No card-like quadrilateral detected in the image."""


class PortError(CardexError):
    """A detector/OCR port failed; wraps the underlying cause."""
