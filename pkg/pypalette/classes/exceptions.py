class PyPaletteException(Exception):
    """Exception raised for errors in pypalette.

    Attributes:
        message -- explanation of the error
    """

    def __init__(self, message="pypalette encountered an error"):
        self.message = message
        super().__init__(self.message)


class ParseException(PyPaletteException):
    """Malformed hypergraph, palette or certificate text.

    Attributes:
        message -- explanation of the error
        line -- 1-based line number in the input (None when the problem is not tied to a line)
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f'line {line}: {message}' if line is not None else message)


class DimensionException(PyPaletteException):
    """A weight vector does not match the object it is evaluated on"""


class WeightingException(PyPaletteException):
    """A weighting is not a point of the standard simplex"""


class UnknownColourException(PyPaletteException):
    """A colour was requested that does not occur in the palette"""


class CertificateException(PyPaletteException):
    """A satisfaction certificate is structurally invalid for the graph/palette pair.

    This is NOT the same thing as a certificate that fails verification.
    """


class OracleBudgetException(PyPaletteException):
    """An exhaustive grid enumeration would exceed its configured budget"""


class PaletteTooLargeException(PyPaletteException):
    """Support enumeration was requested on a palette with too many colours"""


class AuditSizeException(PyPaletteException):
    """An exhaustive density audit was requested above its size cap"""


class ToleranceException(PyPaletteException):
    """A computed value missed its target by more than the allowed tolerance"""
